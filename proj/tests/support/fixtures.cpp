#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include "reqdep/ingest.hpp"

namespace fixtures {

using namespace reqdep;

namespace {

const std::vector<std::string>& vocabulary() {
    static const std::vector<std::string> words = {
        "brake",   "torque",  "sensor",   "signal",  "driver",  "vehicle", "speed",   "lane",    "camera",
        "radar",   "steering", "warning", "display", "engine",  "battery", "charge",  "door",    "window",
        "mirror",  "parking", "distance", "object",  "detect",  "activate", "disable", "request", "status",
        "fault",   "mode",    "threshold", "limit",  "control", "monitor", "message", "timeout", "cycle",
        "shall",   "system",  "when",     "within",  "the",     "and",     "after",   "before",  "value"};
    return words;
}

}  // namespace

TempDir::TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("reqdep-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::string random_words(std::mt19937_64& rng, std::size_t min_words, std::size_t max_words) {
    const auto& words = vocabulary();
    std::uniform_int_distribution<std::size_t> len(min_words, max_words);
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
    std::string out;
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += words[pick(rng)];
    }
    return out;
}

Corpus random_corpus(std::size_t n, std::uint64_t seed, const std::string& system_id) {
    std::mt19937_64 rng(seed);
    std::vector<Requirement> reqs;
    std::set<std::string> seen;
    while (reqs.size() < n) {
        auto text = random_words(rng, 4, 12);
        if (!seen.insert(text).second) continue;
        reqs.push_back({"R" + std::to_string(reqs.size() + 1), system_id, std::move(text)});
    }
    return Corpus(system_id, std::move(reqs));
}

Corpus numbered_corpus(std::size_t n, const std::string& system_id) {
    std::vector<Requirement> reqs;
    for (std::size_t i = 1; i <= n; ++i) {
        reqs.push_back({"R" + std::to_string(i), system_id, "requirement number " + std::to_string(i)});
    }
    return Corpus(system_id, std::move(reqs));
}

std::vector<AnnotatedPair> random_annotations(const Corpus& corpus, std::size_t count, std::uint64_t seed) {
    auto pairs = generate_pairs(corpus);
    std::mt19937_64 rng(seed);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    if (count < pairs.size()) pairs.resize(count);
    std::uniform_int_distribution<std::size_t> pick(0, kGroundTruthLabels.size() - 1);
    std::vector<AnnotatedPair> out;
    for (auto& p : pairs) out.push_back({std::move(p), kGroundTruthLabels[pick(rng)], std::nullopt});
    return out;
}

void write_dataset(const fs::path& dir, const Corpus& corpus, const std::vector<AnnotatedPair>& annotations,
                   const std::optional<std::string>& srs) {
    fs::create_directories(dir);
    ingest::save_requirements(dir / "requirements.csv", corpus);
    ingest::save_annotations(dir / "annotations.csv", annotations);
    if (srs) ingest::write_text_file(dir / "srs.txt", *srs);
}

void write_duplicate_pair_dataset(const fs::path& dir) {
    // Each label owns a distinct word pair so texts never coincide across labels.
    const std::vector<std::pair<std::string, std::string>> topics = {
        {"brake pedal pressure", "hydraulic brake circuit"},   {"lane camera frame", "lane marking detection"},
        {"battery charge level", "charging port lock"},        {"door lock actuator", "door ajar switch"},
        {"radar object list", "radar blockage flag"},          {"steering wheel angle", "steering torque overlay"},
        {"parking distance beep", "ultrasonic parking sensor"}, {"wiper rain sensor", "windshield wiper motor"}};
    std::vector<Requirement> reqs;
    std::vector<std::pair<std::size_t, std::size_t>> index_pairs;
    for (std::size_t t = 0; t < topics.size(); ++t) {
        const std::string a = "The system shall monitor the " + topics[t].first + ".";
        const std::string b = "The system shall report the " + topics[t].second + ".";
        for (int copy = 0; copy < 2; ++copy) {
            const std::size_t base = reqs.size();
            const std::string suffix = std::to_string(t) + "_" + std::to_string(copy);
            reqs.push_back({"A" + suffix, "DUP", a});
            reqs.push_back({"B" + suffix, "DUP", b});
            index_pairs.emplace_back(base, base + 1);
        }
    }
    Corpus corpus("DUP", reqs);
    std::vector<AnnotatedPair> annotations;
    for (std::size_t i = 0; i < index_pairs.size(); ++i) {
        const auto& r = corpus.requirements();
        annotations.push_back({make_requirement_pair(r[index_pairs[i].first], r[index_pairs[i].second]),
                               kGroundTruthLabels[i / 2], std::nullopt});
    }
    write_dataset(dir, corpus, annotations,
                  std::string("The DUP system monitors chassis and body signals.\nEach signal is reported on the bus.\n"));
}

void write_separable_dataset(const fs::path& dir, std::uint64_t seed, const std::string& system_id) {
    // Topic words are synthetic and disjoint; one shared filler word gives every
    // document a little common mass.
    std::mt19937_64 rng(seed);
    constexpr std::size_t kTopics = 10, kPerTopic = 4, kTopicWords = 8;
    std::vector<Requirement> reqs;
    for (std::size_t t = 0; t < kTopics; ++t) {
        std::vector<std::string> words;
        for (std::size_t w = 0; w < kTopicWords; ++w) words.push_back("t" + std::to_string(t) + "w" + std::to_string(w));
        for (std::size_t r = 0; r < kPerTopic; ++r) {
            std::shuffle(words.begin(), words.end(), rng);
            std::string text = "shall";
            for (std::size_t w = 0; w < 5; ++w) text += " " + words[w];
            reqs.push_back({"S" + std::to_string(t) + "_" + std::to_string(r), system_id, text});
        }
    }
    Corpus corpus(system_id, reqs);
    std::vector<AnnotatedPair> annotations;
    std::vector<RequirementPair> cross;
    for (auto& p : generate_pairs(corpus)) {
        const bool same = p.a.id.substr(0, p.a.id.find('_')) == p.b.id.substr(0, p.b.id.find('_'));
        if (same) {
            annotations.push_back({p, DependencyLabel::Requires, std::nullopt});
        } else {
            cross.push_back(std::move(p));
        }
    }
    std::shuffle(cross.begin(), cross.end(), rng);
    cross.resize(120);
    for (auto& p : cross) annotations.push_back({std::move(p), DependencyLabel::NoDependency, std::nullopt});
    write_dataset(dir, corpus, annotations);
}

void write_demo_dataset(const fs::path& dir, std::uint64_t seed, const std::string& system_id) {
    auto corpus = random_corpus(24, seed, system_id);
    // Every label gets at least three pairs so each shows up on both sides of a split.
    auto pairs = generate_pairs(corpus);
    std::mt19937_64 rng(seed * 31 + 1);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    std::vector<AnnotatedPair> annotations;
    std::size_t next = 0;
    for (auto label : kGroundTruthLabels) {
        const std::size_t n = label == DependencyLabel::NoDependency ? 20 : 3 + (label_index(label) % 3);
        for (std::size_t i = 0; i < n; ++i) annotations.push_back({pairs[next++], label, std::nullopt});
    }
    std::ostringstream srs;
    srs << "1 Introduction\nThe " << system_id << " function supports the driver during low speed manoeuvres.\n";
    for (int s = 0; s < 12; ++s) srs << "Section " << s << ": " << random_words(rng, 20, 40) << ".\n";
    write_dataset(dir, corpus, annotations, srs.str());
}

std::string read_file(const fs::path& path) { return ingest::read_text_file(path); }

prompt::PromptContext golden_prompt_context() {
    auto req = [](const char* id, const char* text) { return Requirement{id, "ACC", text}; };
    prompt::PromptContext ctx;
    ctx.domain_name = "automotive domain";
    ctx.system_name = "ACC";
    ctx.pair = make_requirement_pair(req("R1", "The ACC shall keep the set time gap to the preceding vehicle."),
                                     req("R2", "The radar shall report the distance to the preceding vehicle every 50 ms."));
    for (auto label : kGroundTruthLabels) ctx.examples.by_label[label];
    ctx.examples.by_label[DependencyLabel::Requires] = {
        {{make_requirement_pair(req("R7", "The ACC shall brake when the gap falls below 1 s."),
                                req("R8", "The brake controller shall accept deceleration requests from the ACC.")),
          DependencyLabel::Requires, std::nullopt},
         0.91},
        {{make_requirement_pair(req("R3", "The ACC shall be available above 30 km/h."),
                                req("R9", "The vehicle speed signal shall be provided on the chassis bus.")),
          DependencyLabel::Requires, std::nullopt},
         0.74}};
    ctx.examples.by_label[DependencyLabel::NoDependency] = {
        {{make_requirement_pair(req("R4", "The driver shall be able to switch the ACC off."),
                                req("R5", "The headlights shall turn on automatically at dusk.")),
          DependencyLabel::NoDependency, std::nullopt},
         0.42}};
    ctx.context_chunks = {
        {4, "The Adaptive Cruise Control keeps a driver-selected speed and time gap.", 1200, 1271, std::nullopt},
        {0, "Requirements:\nR1: The ACC shall keep the set time gap to the preceding vehicle.", 0, 80, std::nullopt}};
    return ctx;
}

}  // namespace fixtures
