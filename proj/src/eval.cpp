#include "reqdep/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "reqdep/error.hpp"
#include "reqdep/ingest.hpp"

namespace reqdep::eval {

void ConfusionMatrix::add(DependencyLabel truth, DependencyLabel predicted) {
    if (truth == DependencyLabel::Unparsed) {
        throw Error(ErrorCode::InvalidInput, "Unparsed cannot be a ground-truth label");
    }
    ++counts_[label_index(truth)][label_index(predicted)];
    ++total_;
}

std::uint64_t ConfusionMatrix::count(DependencyLabel truth, DependencyLabel predicted) const {
    if (truth == DependencyLabel::Unparsed) return 0;
    return counts_[label_index(truth)][label_index(predicted)];
}

std::uint64_t ConfusionMatrix::support(DependencyLabel truth) const {
    if (truth == DependencyLabel::Unparsed) return 0;
    std::uint64_t s = 0;
    for (auto c : counts_[label_index(truth)]) s += c;
    return s;
}

std::uint64_t ConfusionMatrix::predicted_count(DependencyLabel predicted) const {
    std::uint64_t s = 0;
    for (const auto& row : counts_) s += row[label_index(predicted)];
    return s;
}

std::uint64_t ConfusionMatrix::trace() const {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < kRows; ++i) t += counts_[i][i];
    return t;
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

EvaluationReport compute_report(std::span<const std::pair<DependencyLabel, DependencyLabel>> outcomes) {
    EvaluationReport report;
    for (const auto& [truth, predicted] : outcomes) report.confusion.add(truth, predicted);
    const auto& m = report.confusion;

    report.accuracy = ratio(m.trace(), m.total());
    report.unparsed = m.predicted_count(DependencyLabel::Unparsed);
    for (auto label : kGroundTruthLabels) {
        const auto support = m.support(label);
        if (support == 0) {
            report.excluded_zero_support_classes.push_back(label);
            continue;
        }
        report.evaluated_classes.push_back(label);
        const auto tp = m.count(label, label);
        ClassMetrics cm;
        cm.support = support;
        cm.precision = ratio(tp, m.predicted_count(label));
        cm.recall = ratio(tp, support);
        cm.f1 = (cm.precision + cm.recall) == 0.0 ? 0.0
                                                  : 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall);
        report.per_class[label] = cm;
    }
    if (!report.evaluated_classes.empty()) {
        const double n = static_cast<double>(report.evaluated_classes.size());
        for (const auto& [label, cm] : report.per_class) {
            report.macro.precision += cm.precision / n;
            report.macro.recall += cm.recall / n;
            report.macro.f1 += cm.f1 / n;
        }
    }
    return report;
}

EvaluationReport compute_report(std::span<const AnnotatedPair> ground_truth, std::span<const Prediction> predictions) {
    std::unordered_map<std::string, DependencyLabel> truth;
    for (const auto& gt : ground_truth) {
        if (!truth.emplace(gt.pair.pair_id, gt.label).second) {
            throw Error(ErrorCode::PairSetMismatch, "ground truth lists pair '" + gt.pair.pair_id + "' twice");
        }
    }
    std::set<std::string> seen;
    std::vector<std::pair<DependencyLabel, DependencyLabel>> outcomes;
    outcomes.reserve(predictions.size());
    for (const auto& p : predictions) {
        auto it = truth.find(p.pair_id);
        if (it == truth.end()) {
            throw Error(ErrorCode::PairSetMismatch, "prediction for '" + p.pair_id + "' has no ground truth");
        }
        if (!seen.insert(p.pair_id).second) {
            throw Error(ErrorCode::PairSetMismatch, "pair '" + p.pair_id + "' predicted twice");
        }
        outcomes.emplace_back(it->second, p.label);
    }
    if (seen.size() != truth.size()) {
        for (const auto& gt : ground_truth) {
            if (!seen.contains(gt.pair.pair_id)) {
                throw Error(ErrorCode::PairSetMismatch, "no prediction for ground-truth pair '" + gt.pair.pair_id + "'");
            }
        }
    }
    return compute_report(outcomes);
}

std::string report_csv(const EvaluationReport& report, std::string_view config_hash) {
    std::ostringstream out;
    const auto f = [](double v) { return ingest::format_double(v); };
    const std::string tail = config_hash.empty() ? "\n" : "," + std::string(config_hash) + "\n";
    out << "class,precision,recall,f1,support" << (config_hash.empty() ? "\n" : ",config_hash\n");
    for (auto label : kGroundTruthLabels) {
        auto it = report.per_class.find(label);
        if (it == report.per_class.end()) {
            out << label_name(label) << ",NA,NA,NA,0" << tail;
        } else {
            const auto& c = it->second;
            out << label_name(label) << ',' << f(c.precision) << ',' << f(c.recall) << ',' << f(c.f1) << ','
                << c.support << tail;
        }
    }
    out << "macro," << f(report.macro.precision) << ',' << f(report.macro.recall) << ',' << f(report.macro.f1) << ','
        << report.confusion.total() << tail;
    out << "accuracy," << f(report.accuracy) << ",,," << report.confusion.total() << tail;
    return out.str();
}

std::string report_table(const EvaluationReport& report, const std::string& title) {
    std::ostringstream out;
    out << title << '\n';
    out << std::left << std::setw(14) << "Class" << std::right << std::setw(10) << "P" << std::setw(10) << "R"
        << std::setw(10) << "F1" << std::setw(10) << "Support" << '\n';
    out << std::fixed << std::setprecision(2);
    for (auto label : kGroundTruthLabels) {
        out << std::left << std::setw(14) << label_name(label) << std::right;
        auto it = report.per_class.find(label);
        if (it == report.per_class.end()) {
            out << std::setw(10) << "N/A" << std::setw(10) << "N/A" << std::setw(10) << "N/A" << std::setw(10) << 0;
        } else {
            out << std::setw(10) << it->second.precision << std::setw(10) << it->second.recall << std::setw(10)
                << it->second.f1 << std::setw(10) << it->second.support;
        }
        out << '\n';
    }
    out << std::left << std::setw(14) << "Macro avg" << std::right << std::setw(10) << report.macro.precision
        << std::setw(10) << report.macro.recall << std::setw(10) << report.macro.f1 << std::setw(10)
        << report.confusion.total() << '\n';
    out << std::left << std::setw(14) << "Accuracy" << std::right << std::setw(10) << report.accuracy << '\n';
    if (report.unparsed > 0) out << "Unparsed predictions: " << report.unparsed << '\n';
    return out.str();
}

double cohens_kappa(std::span<const DependencyLabel> a, std::span<const DependencyLabel> b) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::LengthMismatch, "label sequences of length " + std::to_string(a.size()) + " and " +
                                                   std::to_string(b.size()));
    }
    if (a.empty()) throw Error(ErrorCode::InvalidInput, "kappa of empty label sequences");
    std::array<double, kAllLabels.size()> ma{}, mb{};
    double agree = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma[label_index(a[i])] += 1.0;
        mb[label_index(b[i])] += 1.0;
        if (a[i] == b[i]) agree += 1.0;
    }
    const double n = static_cast<double>(a.size());
    const double p_o = agree / n;
    double p_e = 0.0;
    for (std::size_t k = 0; k < ma.size(); ++k) p_e += (ma[k] / n) * (mb[k] / n);
    if (p_e >= 1.0) return p_o >= 1.0 ? 1.0 : 0.0;
    return (p_o - p_e) / (1.0 - p_e);
}

Split stratified_split(std::span<const AnnotatedPair> pairs, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::InvalidConfig, "split ratio must be in (0, 1)");

    std::set<std::string> test_ids;
    for (auto label : kGroundTruthLabels) {
        std::vector<const AnnotatedPair*> members;
        for (const auto& p : pairs) {
            if (p.label == label) members.push_back(&p);
        }
        if (members.empty()) continue;
        std::sort(members.begin(), members.end(),
                  [](const auto* x, const auto* y) { return x->pair.pair_id < y->pair.pair_id; });

        const std::size_t support = members.size();
        auto n_test = static_cast<std::size_t>(std::llround((1.0 - ratio) * static_cast<double>(support)));
        if (support >= 2) n_test = std::max<std::size_t>(n_test, 1);
        n_test = std::min(n_test, support);

        // std::shuffle / uniform_int_distribution are implementation-defined; the
        // engine is not, so draw bounded integers by rejection from it directly.
        std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ull * (label_index(label) + 1)));
        const auto bounded = [&rng](std::uint64_t bound) {
            const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                        std::numeric_limits<std::uint64_t>::max() % bound;
            std::uint64_t x;
            do { x = rng(); } while (x >= limit);
            return x % bound;
        };
        for (std::size_t i = support - 1; i > 0; --i) std::swap(members[i], members[bounded(i + 1)]);
        for (std::size_t i = 0; i < n_test; ++i) test_ids.insert(members[i]->pair.pair_id);
    }

    Split split;
    for (const auto& p : pairs) {
        (test_ids.contains(p.pair.pair_id) ? split.test : split.pool).push_back(p);
    }
    return split;
}

}  // namespace reqdep::eval
