#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "reqdep/core.hpp"
#include "reqdep/retrieval.hpp"

namespace reqdep::prompt {

struct DependencyDefinition {
    DependencyLabel label;
    std::string text;
};

/// The seven built-in definitions, in prompt order.
const std::vector<DependencyDefinition>& default_definitions();

/// JSON object mapping label (any spelling canonical_label accepts) to text.
/// Labels missing from the file keep their default text.
std::vector<DependencyDefinition> load_definitions(const std::filesystem::path& path);

struct PromptContext {
    std::string domain_name;
    std::string system_name;
    RequirementPair pair;
    std::vector<DependencyDefinition> definitions = default_definitions();
    retrieval::ExampleSet examples;
    std::vector<retrieval::Chunk> context_chunks;
};

inline constexpr std::string_view kRequirementsHeader = "#Requirements to analyze:";
inline constexpr std::string_view kDefinitionsHeader = "#Dependency Definitions:";
inline constexpr std::string_view kExamplesHeader = "#Examples:";
inline constexpr std::string_view kContextHeader = "#Context:";
inline constexpr std::string_view kInstructionsHeader = "#Instructions";
inline constexpr std::string_view kEmptySection = "(none)";

/// Throws MissingDefinition unless every one of the seven types is defined.
std::string render_prompt(const PromptContext& ctx);

/// Renders the three-line answer shape the prompt asks for.
std::string render_answer(DependencyLabel label, const std::string& rationale, double confidence);

}  // namespace reqdep::prompt
