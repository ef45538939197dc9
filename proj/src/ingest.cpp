#include "reqdep/ingest.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "reqdep/csv.hpp"
#include "reqdep/error.hpp"

namespace reqdep::ingest {

namespace fs = std::filesystem;

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw Error(ErrorCode::IoError, "failed reading '" + path.string() + "'");
    return buffer.str();
}

void write_text_file(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

Corpus load_requirements(const fs::path& path) {
    const auto table = csv::read_table(path, {"id", "system_id", "text"});
    std::vector<Requirement> reqs;
    std::set<std::string, std::less<>> seen;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const std::string row = path.string() + " row " + std::to_string(table.row_number(i));
        Requirement r{std::string(trim(table.get(i, "id"))), std::string(trim(table.get(i, "system_id"))),
                      table.get(i, "text")};
        if (r.id.empty()) throw Error(ErrorCode::MalformedRow, row + ": empty id");
        if (trim(r.text).empty()) throw Error(ErrorCode::EmptyText, row + ": requirement '" + r.id + "' has empty text");
        if (!seen.insert(r.id).second) throw Error(ErrorCode::DuplicateId, row + ": duplicate id '" + r.id + "'");
        reqs.push_back(std::move(r));
    }
    std::string system = reqs.empty() ? std::string() : reqs.front().system_id;
    return Corpus(std::move(system), std::move(reqs), std::nullopt, {{"source", path.string()}});
}

void save_requirements(const fs::path& path, const Corpus& corpus) {
    std::vector<csv::Row> rows;
    for (const auto& r : corpus.requirements()) rows.push_back({r.id, r.system_id, r.text});
    csv::write_table(path, {"id", "system_id", "text"}, rows);
}

std::vector<AnnotatedPair> load_annotations(const fs::path& path, const Corpus& corpus) {
    const auto table = csv::read_table(path, {"req_a_id", "req_b_id", "label"});
    const bool has_tag = table.has_column("annotator");
    std::vector<AnnotatedPair> out;
    std::set<std::string, std::less<>> seen;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const std::string row = path.string() + " row " + std::to_string(table.row_number(i));
        const auto a_id = trim(table.get(i, "req_a_id"));
        const auto b_id = trim(table.get(i, "req_b_id"));
        const auto a_index = corpus.index_of(a_id);
        const auto b_index = corpus.index_of(b_id);
        if (!a_index) throw Error(ErrorCode::UnknownRequirementId, row + ": unknown requirement '" + std::string(a_id) + "'");
        if (!b_index) throw Error(ErrorCode::UnknownRequirementId, row + ": unknown requirement '" + std::string(b_id) + "'");
        if (*a_index == *b_index) throw Error(ErrorCode::MalformedRow, row + ": requirement paired with itself");

        DependencyLabel label;
        try {
            label = canonical_label(table.get(i, "label"));
        } catch (const Error& e) {
            throw Error(ErrorCode::UnknownLabel, row + ": " + e.what());
        }
        if (label == DependencyLabel::Unparsed) {
            throw Error(ErrorCode::UnknownLabel, row + ": Unparsed is not a ground-truth label");
        }

        const auto& reqs = corpus.requirements();
        const auto lo = std::min(*a_index, *b_index);
        const auto hi = std::max(*a_index, *b_index);
        AnnotatedPair ap{make_requirement_pair(reqs[lo], reqs[hi]), label, std::nullopt};
        if (!seen.insert(ap.pair.pair_id).second) {
            throw Error(ErrorCode::DuplicatePair, row + ": pair (" + std::string(a_id) + ", " + std::string(b_id) +
                                                      ") annotated more than once");
        }
        if (has_tag && !table.get(i, "annotator").empty()) ap.annotator_tag = table.get(i, "annotator");
        out.push_back(std::move(ap));
    }
    return out;
}

void save_annotations(const fs::path& path, const std::vector<AnnotatedPair>& pairs) {
    std::vector<csv::Row> rows;
    for (const auto& p : pairs) {
        rows.push_back({p.pair.a.id, p.pair.b.id, std::string(label_name(p.label))});
    }
    csv::write_table(path, {"req_a_id", "req_b_id", "label"}, rows);
}

std::string load_srs(const fs::path& path) {
    const std::string raw = read_text_file(path);
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] == '\r' && i + 1 < raw.size() && raw[i + 1] == '\n') continue;
        out.push_back(raw[i]);
    }
    return out;
}

std::string format_double(double value) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, result.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
    const auto t = trim(text);
    double value = 0.0;
    const auto result = std::from_chars(t.data(), t.data() + t.size(), value);
    if (result.ec != std::errc() || result.ptr != t.data() + t.size()) {
        throw Error(ErrorCode::MalformedRow, std::string(what) + ": '" + std::string(text) + "' is not a number");
    }
    return value;
}

void save_predictions(const fs::path& path, const std::vector<Prediction>& predictions) {
    std::vector<csv::Row> rows;
    rows.reserve(predictions.size());
    for (const auto& p : predictions) {
        rows.push_back({p.pair_id, p.req_a_id, p.req_b_id, std::string(label_name(p.label)),
                        format_double(p.confidence), p.rationale, p.model_id, p.config_hash});
    }
    csv::write_table(path, kPredictionColumns, rows);
}

std::vector<Prediction> load_predictions(const fs::path& path) {
    const auto table = csv::read_table(path, kPredictionColumns);
    std::vector<Prediction> out;
    out.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        const std::string row = path.string() + " row " + std::to_string(table.row_number(i));
        Prediction p;
        p.pair_id = table.get(i, "pair_id");
        p.req_a_id = table.get(i, "req_a_id");
        p.req_b_id = table.get(i, "req_b_id");
        try {
            p.label = canonical_label(table.get(i, "label"));
        } catch (const Error& e) {
            throw Error(ErrorCode::MalformedRow, row + ": " + e.what());
        }
        p.confidence = parse_double(table.get(i, "confidence"), row + " confidence");
        p.rationale = table.get(i, "rationale");
        p.model_id = table.get(i, "model_id");
        p.config_hash = table.get(i, "config_hash");
        if (p.pair_id.empty()) throw Error(ErrorCode::MalformedRow, row + ": empty pair_id");
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace reqdep::ingest
