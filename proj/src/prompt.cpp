#include "reqdep/prompt.hpp"

#include <map>
#include <sstream>

#include "reqdep/error.hpp"
#include "reqdep/ingest.hpp"
#include "reqdep/vendor_json.hpp"

namespace reqdep::prompt {

const std::vector<DependencyDefinition>& default_definitions() {
    static const std::vector<DependencyDefinition> kDefinitions = {
        {DependencyLabel::Requires,
         "if the fulfillment of one requirement is a prerequisite to the fulfillment of the other requirement."},
        {DependencyLabel::Implements,
         "if one is a higher-level requirement (e.g., a system or subsystem level requirement) that is fulfilled by "
         "the other lower-level requirement (e.g., a subsystem or component level requirement)."},
        {DependencyLabel::Conflicts,
         "if the fulfillment of one requirement restricts the fulfillment of the other requirement."},
        {DependencyLabel::Contradicts,
         "if the two requirements are mutually exclusive, then the fulfillment of one requirement violates the other."},
        {DependencyLabel::Details,
         "if both requirements describe the same action under the same condition, and one requirement provides "
         "additional details specifically regarding the shared action."},
        {DependencyLabel::IsSimilar,
         "if one requirement replicates partially or totally the content of the other requirement, resulting in "
         "redundancy."},
        {DependencyLabel::IsAVariant, "if one requirement serves as an alternative to the other."},
    };
    return kDefinitions;
}

std::vector<DependencyDefinition> load_definitions(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(ingest::read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, path.string() + ": expected a JSON object");
    auto defs = default_definitions();
    for (const auto& [key, value] : j.items()) {
        const auto label = canonical_label(key);
        auto it = std::find_if(defs.begin(), defs.end(), [&](const auto& d) { return d.label == label; });
        if (it == defs.end()) {
            throw Error(ErrorCode::InvalidConfig, path.string() + ": '" + key + "' is not a dependency type");
        }
        if (!value.is_string() || trim(value.get<std::string>()).empty()) {
            throw Error(ErrorCode::InvalidConfig, path.string() + ": definition for '" + key + "' must be text");
        }
        it->text = value.get<std::string>();
    }
    return defs;
}

std::string render_prompt(const PromptContext& ctx) {
    std::map<DependencyLabel, const DependencyDefinition*> defs;
    for (const auto& d : ctx.definitions) defs[d.label] = &d;
    for (auto label : kDependencyTypes) {
        if (!defs.contains(label)) {
            throw Error(ErrorCode::MissingDefinition, "no definition for " + std::string(label_name(label)));
        }
    }

    std::ostringstream out;
    out << "You are an expert requirements engineer from the " << ctx.domain_name
        << ". You will be provided with a pair of requirements extracted from the software requirements "
           "specification for "
        << ctx.system_name << ".\n";
    out << "Given the following requirement dependency types definitions, examples, and context, your task is to "
           "analyze the pair of requirements and determine if a direct or indirect dependency exists between them.\n\n";

    out << kRequirementsHeader << '\n';
    out << "Requirement A: " << ctx.pair.a.text << '\n';
    out << "Requirement B: " << ctx.pair.b.text << "\n\n";

    out << kDefinitionsHeader << '\n';
    for (auto label : kDependencyTypes) {
        out << label_display_name(label) << ": " << defs[label]->text << '\n';
    }
    out << '\n';

    out << kExamplesHeader << '\n';
    if (ctx.examples.empty()) {
        out << kEmptySection << "\n\n";
    } else {
        for (auto label : kGroundTruthLabels) {
            const auto& list = ctx.examples.for_label(label);
            if (list.empty()) continue;
            out << "Examples of " << label_display_name(label) << ":\n";
            for (const auto& ex : list) {
                out << "Requirement A: " << ex.example.pair.a.text << '\n';
                out << "Requirement B: " << ex.example.pair.b.text << '\n';
                out << "Dependency: " << label_display_name(ex.example.label) << "\n\n";
            }
        }
    }

    out << kContextHeader << '\n';
    if (ctx.context_chunks.empty()) {
        out << kEmptySection << "\n\n";
    } else {
        for (std::size_t i = 0; i < ctx.context_chunks.size(); ++i) {
            out << "[Context " << (i + 1) << "]\n" << ctx.context_chunks[i].text << "\n\n";
        }
    }

    out << kInstructionsHeader << '\n';
    out << "- If a direct or indirect dependency exists between a pair, you should annotate it with the type of "
           "dependency.\n";
    out << "- If it does not fall into one of the above types of dependency, annotate it with \"No_dependency\".\n";
    out << "- Explain the rationale behind your annotation.\n";
    out << "- Provide a confidence score for the annotation. The score should range from 0 to 5, with 0 indicating "
           "no confidence and 5 indicating the highest confidence.\n";
    out << "- **The output MUST be structured using these exact labels, each on a new line:**\n";
    out << "**Dependency_Status: [TYPE]**\n";
    out << "**Rationale: [EXPLANATION]**\n";
    out << "**Confidence Score: [SCORE]**\n";
    return out.str();
}

std::string render_answer(DependencyLabel label, const std::string& rationale, double confidence) {
    std::ostringstream out;
    out << "Dependency_Status: " << label_display_name(label) << '\n';
    out << "Rationale: " << rationale << '\n';
    out << "Confidence Score: " << ingest::format_double(confidence) << '\n';
    return out.str();
}

}  // namespace reqdep::prompt
