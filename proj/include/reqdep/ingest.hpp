#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "reqdep/core.hpp"
#include "reqdep/prediction.hpp"

namespace reqdep::ingest {

enum class FileFormat { RequirementsCsv, AnnotationsCsv, PredictionsCsv, SrsText };

struct DatasetFile {
    std::filesystem::path path;
    FileFormat format;
};

std::string read_text_file(const std::filesystem::path& path);
/// Creates parent directories; content is written byte-for-byte.
void write_text_file(const std::filesystem::path& path, std::string_view content);

/// Header `id,system_id,text`; corpus order is file order.
Corpus load_requirements(const std::filesystem::path& path);
void save_requirements(const std::filesystem::path& path, const Corpus& corpus);

/// Header `req_a_id,req_b_id,label` (optional `annotator` column). Each pair is
/// re-ordered so `a` is the requirement that comes first in the corpus.
std::vector<AnnotatedPair> load_annotations(const std::filesystem::path& path, const Corpus& corpus);
void save_annotations(const std::filesystem::path& path, const std::vector<AnnotatedPair>& pairs);

/// Plain UTF-8 text with CRLF normalized to LF.
std::string load_srs(const std::filesystem::path& path);

inline const std::vector<std::string> kPredictionColumns = {
    "pair_id", "req_a_id", "req_b_id", "label", "confidence", "rationale", "model_id", "config_hash"};

void save_predictions(const std::filesystem::path& path, const std::vector<Prediction>& predictions);
std::vector<Prediction> load_predictions(const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text, std::string_view what);

}  // namespace reqdep::ingest
