#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "reqdep/core.hpp"
#include "reqdep/prediction.hpp"

namespace reqdep::eval {

/// Rows are ground truth over the eight annotatable labels; columns are
/// predictions over all nine labels (Unparsed is a valid predicted column).
class ConfusionMatrix {
public:
    static constexpr std::size_t kRows = kGroundTruthLabels.size();
    static constexpr std::size_t kCols = kAllLabels.size();

    void add(DependencyLabel truth, DependencyLabel predicted);
    std::uint64_t count(DependencyLabel truth, DependencyLabel predicted) const;
    std::uint64_t support(DependencyLabel truth) const;
    std::uint64_t predicted_count(DependencyLabel predicted) const;
    std::uint64_t total() const { return total_; }
    std::uint64_t trace() const;

private:
    std::array<std::array<std::uint64_t, kCols>, kRows> counts_{};
    std::uint64_t total_ = 0;
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support = 0;
};

struct MacroMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct EvaluationReport {
    ConfusionMatrix confusion;
    double accuracy = 0.0;
    std::map<DependencyLabel, ClassMetrics> per_class;  // evaluated classes only
    MacroMetrics macro;
    std::vector<DependencyLabel> evaluated_classes;
    std::vector<DependencyLabel> excluded_zero_support_classes;
    std::uint64_t unparsed = 0;
};

/// Report from aligned (truth, prediction) label pairs.
EvaluationReport compute_report(std::span<const std::pair<DependencyLabel, DependencyLabel>> outcomes);

/// Matches predictions to ground truth by pair_id; throws PairSetMismatch unless
/// both sides cover exactly the same pair ids (each once).
EvaluationReport compute_report(std::span<const AnnotatedPair> ground_truth, std::span<const Prediction> predictions);

/// Per-class rows (class,precision,recall,f1,support) plus macro and accuracy rows;
/// a non-empty config_hash adds a trailing column carrying it on every row.
std::string report_csv(const EvaluationReport& report, std::string_view config_hash = {});
/// Human-readable table; zero-support classes print N/A.
std::string report_table(const EvaluationReport& report, const std::string& title);

/// κ = (p_o − p_e)/(1 − p_e); 1 when both are 1. Throws LengthMismatch / InvalidInput (empty).
double cohens_kappa(std::span<const DependencyLabel> a, std::span<const DependencyLabel> b);

struct Split {
    std::vector<AnnotatedPair> pool;
    std::vector<AnnotatedPair> test;
};

/// Per class: test count = round((1 − ratio)·support), at least 1 when support ≥ 2.
/// Members are drawn by a seeded Fisher–Yates shuffle over the class sorted by
/// pair_id, so the result does not depend on input order. Both halves keep input order.
Split stratified_split(std::span<const AnnotatedPair> pairs, double ratio, std::uint64_t seed);

}  // namespace reqdep::eval
