#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "reqdep/core.hpp"
#include "reqdep/prompt.hpp"

namespace fixtures {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "t");
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

std::string random_words(std::mt19937_64& rng, std::size_t min_words, std::size_t max_words);

/// n requirements R1..Rn with random, pairwise distinct texts.
reqdep::Corpus random_corpus(std::size_t n, std::uint64_t seed, const std::string& system_id = "SYS");

/// Corpus of n requirements whose text is "requirement number i".
reqdep::Corpus numbered_corpus(std::size_t n, const std::string& system_id = "SYS");

/// Labels drawn uniformly from the eight ground-truth labels for `count` distinct pairs.
std::vector<reqdep::AnnotatedPair> random_annotations(const reqdep::Corpus& corpus, std::size_t count,
                                                    std::uint64_t seed);

void write_dataset(const fs::path& dir, const reqdep::Corpus& corpus,
                   const std::vector<reqdep::AnnotatedPair>& annotations,
                   const std::optional<std::string>& srs = std::nullopt);

/// Two annotated pairs per ground-truth label, the second an exact text duplicate
/// of the first under fresh requirement ids. 32 requirements, 16 pairs.
void write_duplicate_pair_dataset(const fs::path& dir);

/// Ten topics with disjoint vocabularies, four requirements each. Same-topic
/// pairs are Requires, a sample of cross-topic pairs NoDependency.
void write_separable_dataset(const fs::path& dir, std::uint64_t seed = 11, const std::string& system_id = "SEP");

/// A small mixed dataset with an SRS, used by the CLI and determinism tests.
void write_demo_dataset(const fs::path& dir, std::uint64_t seed = 3, const std::string& system_id = "DEMO");

std::string read_file(const fs::path& path);

/// Fixed context behind the frozen prompt golden file: two examples for
/// Requires, one for No_dependency, two context chunks.
reqdep::prompt::PromptContext golden_prompt_context();

inline fs::path golden_path(const std::string& name) { return fs::path(REQDEP_GOLDEN_DIR) / name; }

}  // namespace fixtures
