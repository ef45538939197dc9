#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace reqdep {

struct Requirement {
    std::string id;
    std::string system_id;
    std::string text;

    // Identity across systems: ids are only unique within one system.
    bool same_requirement(const Requirement& other) const {
        return id == other.id && system_id == other.system_id;
    }
};

enum class DependencyLabel {
    Requires,
    Implements,
    Conflicts,
    Contradicts,
    Details,
    IsSimilar,
    IsAVariant,
    NoDependency,
    Unparsed,
};

/// The seven dependency types, in prompt order.
inline constexpr std::array<DependencyLabel, 7> kDependencyTypes = {
    DependencyLabel::Requires,  DependencyLabel::Implements, DependencyLabel::Conflicts,
    DependencyLabel::Contradicts, DependencyLabel::Details,  DependencyLabel::IsSimilar,
    DependencyLabel::IsAVariant,
};

/// Every label an annotator may assign: seven types plus NoDependency.
inline constexpr std::array<DependencyLabel, 8> kGroundTruthLabels = {
    DependencyLabel::Requires,  DependencyLabel::Implements, DependencyLabel::Conflicts,
    DependencyLabel::Contradicts, DependencyLabel::Details,  DependencyLabel::IsSimilar,
    DependencyLabel::IsAVariant, DependencyLabel::NoDependency,
};

inline constexpr std::array<DependencyLabel, 9> kAllLabels = {
    DependencyLabel::Requires,  DependencyLabel::Implements, DependencyLabel::Conflicts,
    DependencyLabel::Contradicts, DependencyLabel::Details,  DependencyLabel::IsSimilar,
    DependencyLabel::IsAVariant, DependencyLabel::NoDependency, DependencyLabel::Unparsed,
};

/// Serialized form used in every CSV file ("IsSimilar", "NoDependency", ...).
std::string_view label_name(DependencyLabel label);

/// Form shown to the model in prompts ("Is similar", "No_dependency", ...).
std::string_view label_display_name(DependencyLabel label);

/// Lenient label normalization: case-insensitive, '_' / '-' / ' ' interchangeable,
/// surrounding asterisks, brackets, quotes, trailing period and whitespace
/// stripped. Throws Error(UnknownLabel) for anything outside the taxonomy.
DependencyLabel canonical_label(std::string_view raw);

std::size_t label_index(DependencyLabel label);

/// Percent-style escaping that leaves ordinary ids untouched but guarantees the
/// "__" separator in pair ids is unambiguous.
std::string escape_pair_id_component(std::string_view id);
std::string make_pair_id(std::string_view a_id, std::string_view b_id);

struct RequirementPair {
    Requirement a;
    Requirement b;
    std::string pair_id;

    bool involves(const Requirement& r) const {
        return a.same_requirement(r) || b.same_requirement(r);
    }
    bool shares_requirement_with(const RequirementPair& other) const {
        return involves(other.a) || involves(other.b);
    }
};

/// Throws Error(InvalidInput) when a and b carry the same id.
RequirementPair make_requirement_pair(Requirement a, Requirement b);

struct AnnotatedPair {
    RequirementPair pair;
    DependencyLabel label = DependencyLabel::NoDependency;
    std::optional<std::string> annotator_tag;
};

class Corpus {
public:
    Corpus() = default;
    /// Validates id uniqueness and non-empty (trimmed) texts.
    Corpus(std::string system_id, std::vector<Requirement> requirements,
           std::optional<std::string> srs_text = std::nullopt,
           std::map<std::string, std::string> metadata = {});

    const std::string& system_id() const { return system_id_; }
    const std::vector<Requirement>& requirements() const { return requirements_; }
    const std::optional<std::string>& srs_text() const { return srs_text_; }
    const std::map<std::string, std::string>& metadata() const { return metadata_; }
    std::size_t size() const { return requirements_.size(); }

    const Requirement* find(std::string_view id) const;
    std::optional<std::size_t> index_of(std::string_view id) const;

    Corpus with_srs(std::string srs) const;

private:
    std::string system_id_;
    std::vector<Requirement> requirements_;
    std::optional<std::string> srs_text_;
    std::map<std::string, std::string> metadata_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// All n(n-1)/2 unordered pairs; outer index < inner index over corpus order.
std::vector<RequirementPair> generate_pairs(const Corpus& corpus);

std::string_view trim(std::string_view s);

}  // namespace reqdep

namespace reqdep {

/// Lowercases ASCII and splits on anything that is not an ASCII letter or
/// digit; bytes >= 0x80 are kept inside tokens so UTF-8 sequences stay whole.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace reqdep
