#include "reqdep/baseline_tfidf.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>
#include <unordered_map>

#include "reqdep/error.hpp"
#include "reqdep/eval.hpp"

namespace reqdep::baseline {

TfidfModel fit_tfidf(std::span<const std::string> documents) {
    std::map<std::string, std::size_t> df;
    for (const auto& doc : documents) {
        const auto tokens = tokenize(doc);
        for (const auto& t : std::set<std::string>(tokens.begin(), tokens.end())) ++df[t];
    }
    TfidfModel model;
    model.doc_count = documents.size();
    const double n = static_cast<double>(documents.size());
    for (const auto& [term, count] : df) {
        model.vocabulary.push_back(term);
        model.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
    }
    return model;
}

Eigen::VectorXd TfidfModel::transform(const std::string& text) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vocabulary.size()));
    for (const auto& t : tokenize(text)) {
        auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), t);
        if (it != vocabulary.end() && *it == t) {
            const auto i = static_cast<std::size_t>(it - vocabulary.begin());
            v[static_cast<Eigen::Index>(i)] += idf[i];
        }
    }
    const double norm = v.norm();
    if (norm > 0.0) v /= norm;
    return v;
}

Eigen::MatrixXd tfidf_matrix(const TfidfModel& model, std::span<const std::string> documents) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(documents.size()), static_cast<Eigen::Index>(model.vocabulary.size()));
    for (std::size_t i = 0; i < documents.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = model.transform(documents[i]);
    return m;
}

LsaModel fit_lsa(const Eigen::MatrixXd& matrix, std::size_t rank) {
    const auto n_docs = static_cast<std::size_t>(matrix.rows());
    const auto n_terms = static_cast<std::size_t>(matrix.cols());
    if (rank == 0 || rank > std::min(n_docs, n_terms)) {
        throw Error(ErrorCode::RankTooLarge, "LSA rank " + std::to_string(rank) + " outside [1, " +
                                                 std::to_string(std::min(n_docs, n_terms)) + "]");
    }
    const Eigen::MatrixXd gram = matrix * matrix.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::InvalidInput, "Gram eigen-decomposition failed");

    // Eigenvalues ascend; walk from the largest.
    const Eigen::VectorXd& values = solver.eigenvalues();
    const double total = std::max(values.sum(), 0.0);
    const double tol = std::max(values.maxCoeff(), 0.0) * 1e-18;

    LsaModel lsa;
    lsa.requested_rank = rank;
    std::vector<Eigen::VectorXd> rows;
    for (Eigen::Index k = values.size() - 1; k >= 0 && rows.size() < rank; --k) {
        const double lambda = values[k];
        if (lambda <= tol) break;
        // Right singular vector v = Xᵀu / σ.
        Eigen::VectorXd v = matrix.transpose() * solver.eigenvectors().col(k) / std::sqrt(lambda);
        // Two Gram-Schmidt passes keep the rows orthonormal even for tiny σ.
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& r : rows) v -= r.dot(v) * r;
        }
        if (v.norm() < 1e-6) break;
        v.normalize();
        rows.push_back(std::move(v));
        lsa.explained_variance.push_back(total > 0.0 ? lambda / total : 0.0);
    }
    lsa.rank = rows.size();
    lsa.projection.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_terms));
    for (std::size_t i = 0; i < rows.size(); ++i) lsa.projection.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    return lsa;
}

FittedBaseline fit(std::span<const std::string> documents, std::size_t rank) {
    if (documents.size() < 2) throw Error(ErrorCode::InvalidInput, "TF-IDF/LSA needs at least 2 documents");
    FittedBaseline fb;
    fb.tfidf = fit_tfidf(documents);
    if (fb.tfidf.vocabulary.empty()) throw Error(ErrorCode::EmptyVocabulary, "documents contain no tokens");
    fb.document_matrix = tfidf_matrix(fb.tfidf, documents);
    fb.lsa = fit_lsa(fb.document_matrix, rank);
    for (std::size_t i = 0; i < documents.size(); ++i) {
        fb.projected.emplace(documents[i], fb.lsa.project(fb.document_matrix.row(static_cast<Eigen::Index>(i)).transpose()));
    }
    return fb;
}

namespace {

Eigen::VectorXd projected_vector(const FittedBaseline& model, const std::string& text) {
    auto it = model.projected.find(text);
    if (it != model.projected.end()) return it->second;
    return model.lsa.project(model.tfidf.transform(text));
}

}  // namespace

std::optional<double> pair_cosine(const FittedBaseline& model, const RequirementPair& pair) {
    const Eigen::VectorXd a = projected_vector(model, pair.a.text);
    const Eigen::VectorXd b = projected_vector(model, pair.b.text);
    const double na = a.norm(), nb = b.norm();
    if (na < 1e-12 || nb < 1e-12) return std::nullopt;
    return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

DependencyLabel classify_pair(const FittedBaseline& model, const RequirementPair& pair, double threshold) {
    const auto cosine = pair_cosine(model, pair);
    if (!cosine) {
        std::cerr << "warning: OutOfVocabularyPair " << pair.pair_id << " projects to zero; labeled NoDependency\n";
        return DependencyLabel::NoDependency;
    }
    return *cosine >= threshold ? DependencyLabel::Requires : DependencyLabel::NoDependency;
}

TuningGrid TuningGrid::defaults() {
    TuningGrid g;
    for (int i = 0; i <= 16; ++i) g.thresholds.push_back(0.10 + 0.05 * i);
    return g;
}

TuningResult tune(std::span<const std::string> corpus_texts, std::span<const AnnotatedPair> validation,
                  const TuningGrid& grid) {
    std::set<DependencyLabel> classes;
    for (const auto& v : validation) classes.insert(v.label);
    if (classes.size() < 2) {
        throw Error(ErrorCode::DegenerateValidation, "validation pairs must contain at least two classes");
    }
    auto ranks = grid.ranks;
    auto thresholds = grid.thresholds;
    std::sort(ranks.begin(), ranks.end());
    std::sort(thresholds.begin(), thresholds.end());

    const auto tfidf = fit_tfidf(corpus_texts);
    const std::size_t max_rank = std::min(corpus_texts.size(), tfidf.vocabulary.size());

    TuningResult best;
    bool have_best = false;
    for (auto rank : ranks) {
        if (rank == 0 || rank > max_rank) continue;
        const auto model = fit(corpus_texts, rank);
        std::vector<std::optional<double>> cosines;
        cosines.reserve(validation.size());
        for (const auto& v : validation) cosines.push_back(pair_cosine(model, v.pair));
        for (double tau : thresholds) {
            std::vector<std::pair<DependencyLabel, DependencyLabel>> outcomes;
            outcomes.reserve(validation.size());
            for (std::size_t i = 0; i < validation.size(); ++i) {
                const bool dep = cosines[i] && *cosines[i] >= tau;
                outcomes.emplace_back(validation[i].label, dep ? DependencyLabel::Requires : DependencyLabel::NoDependency);
            }
            const double f1 = eval::compute_report(outcomes).macro.f1;
            ++best.evaluated_points;
            if (!have_best || f1 > best.macro_f1) {
                best.macro_f1 = f1;
                best.config.lsa_rank = rank;
                best.config.threshold = tau;
                have_best = true;
            }
        }
    }
    if (!have_best) throw Error(ErrorCode::InvalidConfig, "no usable (rank, threshold) point in the tuning grid");
    return best;
}

std::vector<std::string> corpus_documents(const Corpus& corpus) {
    std::vector<std::string> docs;
    docs.reserve(corpus.size());
    for (const auto& r : corpus.requirements()) docs.push_back(r.text);
    return docs;
}

}  // namespace reqdep::baseline
