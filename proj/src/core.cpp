#include "reqdep/core.hpp"

#include <algorithm>
#include <cctype>

#include "reqdep/error.hpp"

namespace reqdep {

std::string_view label_name(DependencyLabel label) {
    switch (label) {
        case DependencyLabel::Requires: return "Requires";
        case DependencyLabel::Implements: return "Implements";
        case DependencyLabel::Conflicts: return "Conflicts";
        case DependencyLabel::Contradicts: return "Contradicts";
        case DependencyLabel::Details: return "Details";
        case DependencyLabel::IsSimilar: return "IsSimilar";
        case DependencyLabel::IsAVariant: return "IsAVariant";
        case DependencyLabel::NoDependency: return "NoDependency";
        case DependencyLabel::Unparsed: return "Unparsed";
    }
    return "Unparsed";
}

std::string_view label_display_name(DependencyLabel label) {
    switch (label) {
        case DependencyLabel::IsSimilar: return "Is similar";
        case DependencyLabel::IsAVariant: return "Is a variant";
        case DependencyLabel::NoDependency: return "No_dependency";
        default: return label_name(label);
    }
}

std::size_t label_index(DependencyLabel label) { return static_cast<std::size_t>(label); }

std::string_view trim(std::string_view s) {
    const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

DependencyLabel canonical_label(std::string_view raw) {
    std::string_view s = raw;
    constexpr std::string_view kWrapping = " \t\r\n*[]()\"'`";
    for (bool changed = true; changed && !s.empty();) {
        changed = false;
        while (!s.empty() && kWrapping.find(s.front()) != std::string_view::npos) {
            s.remove_prefix(1);
            changed = true;
        }
        while (!s.empty() && (kWrapping.find(s.back()) != std::string_view::npos || s.back() == '.')) {
            s.remove_suffix(1);
            changed = true;
        }
    }

    std::string key;
    key.reserve(s.size());
    for (char c : s) {
        if (c == '_' || c == ' ' || c == '-' || c == '\t') continue;
        key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }

    static const std::array<std::pair<std::string_view, DependencyLabel>, 9> kKeys{{
        {"requires", DependencyLabel::Requires},
        {"implements", DependencyLabel::Implements},
        {"conflicts", DependencyLabel::Conflicts},
        {"contradicts", DependencyLabel::Contradicts},
        {"details", DependencyLabel::Details},
        {"issimilar", DependencyLabel::IsSimilar},
        {"isavariant", DependencyLabel::IsAVariant},
        {"nodependency", DependencyLabel::NoDependency},
        {"unparsed", DependencyLabel::Unparsed},
    }};
    for (const auto& [name, label] : kKeys) {
        if (key == name) return label;
    }
    throw Error(ErrorCode::UnknownLabel, "'" + std::string(raw) + "' is not a dependency label");
}

std::string escape_pair_id_component(std::string_view id) {
    std::string out;
    out.reserve(id.size());
    for (std::size_t i = 0; i < id.size(); ++i) {
        const char c = id[i];
        if (c == '%') {
            out += "%25";
        } else if (c == '_') {
            const bool boundary = i == 0 || i + 1 == id.size();
            const bool adjacent = (i > 0 && id[i - 1] == '_') || (i + 1 < id.size() && id[i + 1] == '_');
            out += (boundary || adjacent) ? "%5F" : "_";
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::string make_pair_id(std::string_view a_id, std::string_view b_id) {
    return escape_pair_id_component(a_id) + "__" + escape_pair_id_component(b_id);
}

RequirementPair make_requirement_pair(Requirement a, Requirement b) {
    if (a.id == b.id) {
        throw Error(ErrorCode::InvalidInput, "a requirement cannot be paired with itself: " + a.id);
    }
    std::string id = make_pair_id(a.id, b.id);
    return RequirementPair{std::move(a), std::move(b), std::move(id)};
}

Corpus::Corpus(std::string system_id, std::vector<Requirement> requirements,
               std::optional<std::string> srs_text, std::map<std::string, std::string> metadata)
    : system_id_(std::move(system_id)),
      requirements_(std::move(requirements)),
      srs_text_(std::move(srs_text)),
      metadata_(std::move(metadata)) {
    for (std::size_t i = 0; i < requirements_.size(); ++i) {
        const auto& r = requirements_[i];
        if (trim(r.text).empty()) {
            throw Error(ErrorCode::EmptyText, "requirement '" + r.id + "' has empty text");
        }
        if (!index_.emplace(r.id, i).second) {
            throw Error(ErrorCode::DuplicateId, "requirement id '" + r.id + "' appears more than once");
        }
    }
}

const Requirement* Corpus::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &requirements_[it->second];
}

std::optional<std::size_t> Corpus::index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

Corpus Corpus::with_srs(std::string srs) const {
    Corpus copy = *this;
    copy.srs_text_ = std::move(srs);
    return copy;
}

std::vector<RequirementPair> generate_pairs(const Corpus& corpus) {
    const auto& reqs = corpus.requirements();
    std::vector<RequirementPair> pairs;
    if (reqs.size() < 2) return pairs;
    pairs.reserve(reqs.size() * (reqs.size() - 1) / 2);
    for (std::size_t i = 0; i < reqs.size(); ++i) {
        for (std::size_t j = i + 1; j < reqs.size(); ++j) {
            pairs.push_back(make_requirement_pair(reqs[i], reqs[j]));
        }
    }
    return pairs;
}

}  // namespace reqdep

namespace reqdep {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c >= 0x80) {
            current.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

}  // namespace reqdep
