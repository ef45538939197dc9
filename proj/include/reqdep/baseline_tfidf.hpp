#pragma once

#include <Eigen/Dense>

#include <map>
#include <span>
#include <string>
#include <vector>

#include "reqdep/core.hpp"

namespace reqdep::baseline {

struct TfidfModel {
    std::vector<std::string> vocabulary;  // sorted
    std::vector<double> idf;              // ln((1 + N)/(1 + df)) + 1
    std::size_t doc_count = 0;

    /// Raw counts × idf, L2-normalized; out-of-vocabulary tokens are ignored.
    Eigen::VectorXd transform(const std::string& text) const;
};

struct LsaModel {
    std::size_t rank = 0;            // effective rank (<= requested)
    std::size_t requested_rank = 0;
    Eigen::MatrixXd projection;      // rank x |V|, orthonormal rows
    std::vector<double> explained_variance;  // eigenvalue share per component

    Eigen::VectorXd project(const Eigen::VectorXd& tfidf) const { return projection * tfidf; }
};

struct FittedBaseline {
    TfidfModel tfidf;
    LsaModel lsa;
    Eigen::MatrixXd document_matrix;  // N x |V| TF-IDF rows, for diagnostics
    std::map<std::string, Eigen::VectorXd> projected;  // text -> LSA vector
};

struct BaselineConfig {
    std::size_t lsa_rank = 100;
    double threshold = 0.5;
    std::string tokenizer = "lowercase-alnum";
};

TfidfModel fit_tfidf(std::span<const std::string> documents);
Eigen::MatrixXd tfidf_matrix(const TfidfModel& model, std::span<const std::string> documents);

/// Truncated decomposition of the N x |V| matrix through the eigenpairs of its
/// N x N Gram matrix. Throws RankTooLarge when rank > min(|V|, N).
LsaModel fit_lsa(const Eigen::MatrixXd& matrix, std::size_t rank);

/// Throws InvalidInput (< 2 documents), EmptyVocabulary, RankTooLarge.
FittedBaseline fit(std::span<const std::string> documents, std::size_t rank);

/// Cosine of the two projected vectors; nullopt when either is (numerically) zero.
std::optional<double> pair_cosine(const FittedBaseline& model, const RequirementPair& pair);

/// Requires when cosine >= threshold, else NoDependency (also for out-of-vocabulary pairs).
DependencyLabel classify_pair(const FittedBaseline& model, const RequirementPair& pair, double threshold);

struct TuningGrid {
    std::vector<std::size_t> ranks = {25, 50, 100, 200};
    std::vector<double> thresholds;  // default 0.10, 0.15, ..., 0.90

    static TuningGrid defaults();
};

struct TuningResult {
    BaselineConfig config;
    double macro_f1 = 0.0;
    std::size_t evaluated_points = 0;
};

/// Argmax macro-F1 over the grid; ties go to the smaller rank, then the smaller
/// threshold. Ranks that exceed what the corpus supports are skipped. Throws
/// DegenerateValidation when the validation pairs carry fewer than two
/// classes, InvalidConfig when no grid point is usable.
TuningResult tune(std::span<const std::string> corpus_texts, std::span<const AnnotatedPair> validation,
                  const TuningGrid& grid);

/// Documents for fitting: every requirement text of the corpus, corpus order.
std::vector<std::string> corpus_documents(const Corpus& corpus);

}  // namespace reqdep::baseline
