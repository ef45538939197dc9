#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "reqdep/core.hpp"
#include "reqdep/ingest.hpp"

namespace fuzz {

struct ResponseCase {
    reqdep::DependencyLabel label;
    std::string rationale;
    double confidence;
    std::string text;
};

inline std::string pick(std::mt19937_64& rng, const std::vector<std::string>& options) {
    return options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
}

inline bool coin(std::mt19937_64& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

/// A rationale line: words and inner punctuation, never blank, never ending in a marker.
inline std::string rationale_line(std::mt19937_64& rng) {
    static const std::vector<std::string> words = {
        "both",   "requirements", "refer",   "to",    "the",    "brake", "signal", "so", "one", "needs",
        "other",  "A",            "B",       "(ACC)", "\"gap\"", "50ms", "x,y",   "it's", "note:", "e.g.",
        "R1->R2", "\xc3\xa9t\xc3\xa9",      "100%",  "a*b",   "#3",    "[see]", "ok;"};
    std::string line;
    const int n = std::uniform_int_distribution<int>(1, 12)(rng);
    for (int i = 0; i < n; ++i) {
        if (i) line += ' ';
        line += pick(rng, words);
    }
    while (!line.empty() && (line.back() == '*' || line.back() == '#')) line.pop_back();
    while (!line.empty() && (line.front() == '*' || line.front() == '#')) line.erase(line.begin());
    if (line.empty() || line.back() == ' ') line += "end";
    return line;
}

inline std::string label_spelling(std::mt19937_64& rng, reqdep::DependencyLabel label) {
    std::string s = coin(rng) ? std::string(reqdep::label_display_name(label)) : std::string(reqdep::label_name(label));
    const int style = std::uniform_int_distribution<int>(0, 4)(rng);
    if (style == 1) {
        for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    } else if (style == 2) {
        for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (style == 3) {
        s = "[" + s + "]";
    } else if (style == 4) {
        s = "**" + s + "**";
    }
    return s;
}

inline std::string field_line(std::mt19937_64& rng, const std::string& name, const std::string& value,
                              bool multiline = false) {
    std::string key = name;
    if (coin(rng, 0.3)) {
        for (auto& c : key) c = c == '_' ? ' ' : c;
    }
    if (coin(rng, 0.2)) {
        for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    int style = std::uniform_int_distribution<int>(0, 4)(rng);
    // A closing marker would land on the last continuation line.
    if (multiline && style == 1) style = 0;
    switch (style) {
        case 1: return "**" + key + ": " + value + "**";
        case 2: return "**" + key + ":** " + value;
        case 3: return "### " + key + ": " + value;
        case 4: return "  " + key + ":   " + value + "  ";
        default: return key + ": " + value;
    }
}

/// Noise lines that never open an answer field.
inline std::string noise_line(std::mt19937_64& rng) {
    return pick(rng, {"", "Sure, here is my analysis.", "Let me think about both requirements.",
                      "---", "Note that the context mentions the bus: CAN.", "   ",
                      "The answer follows the required format.", "#Analysis", "* bullet point"});
}

inline ResponseCase make_case(std::mt19937_64& rng) {
    ResponseCase c;
    c.label = reqdep::kGroundTruthLabels[std::uniform_int_distribution<std::size_t>(0, 7)(rng)];
    const int lines = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int i = 0; i < lines; ++i) {
        if (i) c.rationale += '\n';
        c.rationale += rationale_line(rng);
    }
    c.confidence = std::uniform_int_distribution<int>(0, 20)(rng) / 4.0;
    std::string conf = reqdep::ingest::format_double(c.confidence);
    if (coin(rng, 0.1) && c.confidence == std::floor(c.confidence)) conf += ".0";
    if (coin(rng, 0.2)) conf = "[" + conf + "]";

    // The rationale's continuation lines must follow it directly.
    std::vector<std::string> blocks = {field_line(rng, "Dependency_Status", label_spelling(rng, c.label)),
                                       field_line(rng, "Rationale", c.rationale, lines > 1),
                                       field_line(rng, "Confidence Score", conf)};
    if (coin(rng, 0.3)) std::shuffle(blocks.begin(), blocks.end(), rng);
    std::string text;
    const int pre = std::uniform_int_distribution<int>(0, 3)(rng);
    for (int i = 0; i < pre; ++i) text += noise_line(rng) + "\n";
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        text += blocks[i] + (coin(rng, 0.1) ? "\r\n" : "\n");
    }
    if (blocks.back().find("ationale") == std::string::npos && coin(rng, 0.3)) text += "\nI hope this helps.";
    c.text = text;
    return c;
}

}  // namespace fuzz
