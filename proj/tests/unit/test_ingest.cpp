#include <doctest.h>

#include <functional>
#include <random>

#include "fixtures.hpp"
#include "reqdep/csv.hpp"
#include "reqdep/error.hpp"
#include "reqdep/ingest.hpp"

using namespace reqdep;
using fixtures::TempDir;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidInput;
}

std::string message_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

std::string random_field(std::mt19937_64& rng) {
    static const std::string pieces[] = {"a", "b", ",", "\"", "\n", " ", "x y", "\xc3\xa9", "''", "\r\n", "0.5"};
    std::string s;
    const int n = std::uniform_int_distribution<int>(0, 8)(rng);
    for (int i = 0; i < n; ++i) s += pieces[std::uniform_int_distribution<std::size_t>(0, std::size(pieces) - 1)(rng)];
    return s;
}

}  // namespace

TEST_CASE("requirements load in file order") {
    TempDir dir("ingest");
    ingest::write_text_file(dir / "r.csv", "id,system_id,text\nR1,S,first\nR2,S,\"second, quoted\"\nR3,S,third\n");
    const auto corpus = ingest::load_requirements(dir / "r.csv");
    REQUIRE(corpus.size() == 3);
    CHECK(corpus.requirements()[0].id == "R1");
    CHECK(corpus.requirements()[1].text == "second, quoted");
    CHECK(corpus.system_id() == "S");
}

TEST_CASE("requirement loading errors name the row") {
    TempDir dir("ingest");
    ingest::write_text_file(dir / "dup.csv", "id,system_id,text\nR1,S,a\nR1,S,b\n");
    CHECK(code_of([&] { ingest::load_requirements(dir / "dup.csv"); }) == ErrorCode::DuplicateId);
    CHECK(message_of([&] { ingest::load_requirements(dir / "dup.csv"); }).find("row 3") != std::string::npos);

    ingest::write_text_file(dir / "empty.csv", "id,system_id,text\nR1,S,  \n");
    CHECK(code_of([&] { ingest::load_requirements(dir / "empty.csv"); }) == ErrorCode::EmptyText);

    ingest::write_text_file(dir / "cols.csv", "id,text\nR1,a\n");
    CHECK(code_of([&] { ingest::load_requirements(dir / "cols.csv"); }) == ErrorCode::MissingColumn);

    CHECK(code_of([&] { ingest::load_requirements(dir / "missing.csv"); }) == ErrorCode::IoError);
}

TEST_CASE("40 requirements give 780 pairs after a save/load cycle") {
    TempDir dir("ingest");
    ingest::save_requirements(dir / "r.csv", fixtures::random_corpus(40, 1));
    CHECK(generate_pairs(ingest::load_requirements(dir / "r.csv")).size() == 780);
}

TEST_CASE("annotations resolve ids and reject duplicates in either order") {
    TempDir dir("ingest");
    const auto corpus = fixtures::numbered_corpus(4);
    ingest::write_text_file(dir / "a.csv", "req_a_id,req_b_id,label\nR1,R2,Requires\nR4,R3,is similar\n");
    const auto ann = ingest::load_annotations(dir / "a.csv", corpus);
    REQUIRE(ann.size() == 2);
    CHECK(ann[0].pair.a.id == "R1");
    CHECK(ann[0].pair.b.id == "R2");
    CHECK(ann[0].label == DependencyLabel::Requires);
    // Stored with the lower corpus index first.
    CHECK(ann[1].pair.a.id == "R3");
    CHECK(ann[1].label == DependencyLabel::IsSimilar);

    ingest::write_text_file(dir / "d.csv", "req_a_id,req_b_id,label\nR1,R2,Requires\nR2,R1,Details\n");
    CHECK(code_of([&] { ingest::load_annotations(dir / "d.csv", corpus); }) == ErrorCode::DuplicatePair);
    ingest::write_text_file(dir / "u.csv", "req_a_id,req_b_id,label\nR1,R9,Requires\n");
    CHECK(code_of([&] { ingest::load_annotations(dir / "u.csv", corpus); }) == ErrorCode::UnknownRequirementId);
    ingest::write_text_file(dir / "l.csv", "req_a_id,req_b_id,label\nR1,R2,depends_on\n");
    CHECK(code_of([&] { ingest::load_annotations(dir / "l.csv", corpus); }) == ErrorCode::UnknownLabel);
    ingest::write_text_file(dir / "x.csv", "req_a_id,req_b_id,label\nR1,R2,Unparsed\n");
    CHECK(code_of([&] { ingest::load_annotations(dir / "x.csv", corpus); }) == ErrorCode::UnknownLabel);
}

TEST_CASE("annotation class counts survive a round trip") {
    TempDir dir("ingest");
    const auto corpus = fixtures::random_corpus(40, 2);
    const auto ann = fixtures::random_annotations(corpus, 413, 3);
    ingest::save_annotations(dir / "a.csv", ann);
    const auto back = ingest::load_annotations(dir / "a.csv", corpus);
    REQUIRE(back.size() == 413);
    for (std::size_t i = 0; i < ann.size(); ++i) {
        CHECK(back[i].pair.pair_id == ann[i].pair.pair_id);
        CHECK(back[i].label == ann[i].label);
    }
}

TEST_CASE("srs text keeps newlines and normalizes CRLF") {
    TempDir dir("ingest");
    const std::string kb(1024, 'x');
    ingest::write_text_file(dir / "a.txt", kb);
    CHECK(ingest::load_srs(dir / "a.txt").size() == 1024);
    ingest::write_text_file(dir / "e.txt", "");
    CHECK(ingest::load_srs(dir / "e.txt").empty());
    ingest::write_text_file(dir / "c.txt", "line one\r\nline two\r\n\r\nend");
    CHECK(ingest::load_srs(dir / "c.txt") == "line one\nline two\n\nend");
    CHECK(code_of([&] { ingest::load_srs(dir / "none.txt"); }) == ErrorCode::IoError);
}

TEST_CASE("prediction files round-trip every field") {
    TempDir dir("ingest");
    std::vector<Prediction> preds;
    for (int i = 0; i < 10; ++i) {
        Prediction p;
        p.req_a_id = "R" + std::to_string(i);
        p.req_b_id = "R" + std::to_string(i + 1);
        p.pair_id = make_pair_id(p.req_a_id, p.req_b_id);
        p.label = kAllLabels[i % kAllLabels.size()];
        p.rationale = "because, \"quoted\" reasons\nand a second line " + std::to_string(i);
        p.confidence = p.label == DependencyLabel::Unparsed ? kUnparsedConfidence : 0.1 * i + 1.0 / 3.0;
        p.model_id = "m";
        p.config_hash = "abc";
        preds.push_back(p);
    }
    ingest::save_predictions(dir / "p.csv", preds);
    const auto back = ingest::load_predictions(dir / "p.csv");
    REQUIRE(back.size() == preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        CHECK(back[i].pair_id == preds[i].pair_id);
        CHECK(back[i].req_a_id == preds[i].req_a_id);
        CHECK(back[i].req_b_id == preds[i].req_b_id);
        CHECK(back[i].label == preds[i].label);
        CHECK(back[i].rationale == preds[i].rationale);
        CHECK(back[i].confidence == preds[i].confidence);
        CHECK(back[i].model_id == preds[i].model_id);
        CHECK(back[i].config_hash == preds[i].config_hash);
    }
}

TEST_CASE("prediction file without a confidence column is rejected") {
    TempDir dir("ingest");
    ingest::write_text_file(dir / "p.csv", "pair_id,req_a_id,req_b_id,label,rationale,model_id,config_hash\n"
                                           "R1__R2,R1,R2,Requires,x,m,h\n");
    CHECK(code_of([&] { ingest::load_predictions(dir / "p.csv"); }) == ErrorCode::MissingColumn);
    ingest::write_text_file(dir / "q.csv", "pair_id,req_a_id,req_b_id,label,confidence,rationale,model_id,config_hash\n"
                                           "R1__R2,R1,R2,Requires,x\n");
    CHECK(code_of([&] { ingest::load_predictions(dir / "q.csv"); }) == ErrorCode::MalformedRow);
}

TEST_CASE("randomized csv fields round-trip") {
    std::mt19937_64 rng(21);
    TempDir dir("ingest");
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<csv::Row> rows;
        const int n = std::uniform_int_distribution<int>(1, 6)(rng);
        for (int r = 0; r < n; ++r) rows.push_back({random_field(rng), "k" + std::to_string(r), random_field(rng)});
        csv::write_table(dir / "t.csv", {"a", "b", "c"}, rows);
        const auto parsed = csv::parse(fixtures::read_file(dir / "t.csv"));
        REQUIRE(parsed.size() == rows.size() + 1);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            // CRLF inside a field is normalized to LF on load, like everywhere else.
            auto expect = rows[r];
            for (auto& field : expect) {
                std::string out;
                for (std::size_t i = 0; i < field.size(); ++i) {
                    if (field[i] == '\r' && i + 1 < field.size() && field[i + 1] == '\n') continue;
                    out += field[i];
                }
                field = out;
            }
            CHECK(parsed[r + 1] == expect);
        }
    }
}

TEST_CASE("randomized prediction rationales round-trip") {
    std::mt19937_64 rng(22);
    TempDir dir("ingest");
    std::vector<Prediction> preds;
    for (int i = 0; i < 100; ++i) {
        Prediction p;
        p.pair_id = "p" + std::to_string(i);
        p.req_a_id = "a";
        p.req_b_id = "b";
        p.label = kAllLabels[std::uniform_int_distribution<std::size_t>(0, kAllLabels.size() - 1)(rng)];
        std::string r = random_field(rng);
        std::erase(r, '\r');
        p.rationale = r;
        p.confidence = std::uniform_real_distribution<double>(0.0, 5.0)(rng);
        preds.push_back(p);
    }
    ingest::save_predictions(dir / "p.csv", preds);
    const auto back = ingest::load_predictions(dir / "p.csv");
    REQUIRE(back.size() == preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        CHECK(back[i].rationale == preds[i].rationale);
        CHECK(back[i].confidence == preds[i].confidence);
        CHECK(back[i].label == preds[i].label);
    }
}

TEST_CASE("unterminated quotes are malformed") {
    CHECK_THROWS_AS(csv::parse("a,b\n\"open,x\n"), Error);
}
