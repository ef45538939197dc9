#include <doctest.h>

#include <cmath>
#include <random>

#include "fake_server.hpp"
#include "fixtures.hpp"
#include "reqdep/embedding.hpp"
#include "reqdep/error.hpp"
#include "reqdep/hashing.hpp"
#include "reqdep/vendor_json.hpp"

using namespace reqdep;
using namespace reqdep::embedding;

namespace {

EmbeddingVector vec(std::vector<double> v, std::string model = "m") { return {std::move(v), std::move(model)}; }

/// Server-side vector for a text: 4 numbers derived from its hash.
std::vector<double> server_vector(const std::string& text) {
    const auto h = hash64(text);
    return {double(h & 0xff), double((h >> 8) & 0xff), double((h >> 16) & 0xff) + 1.0, 0.5};
}

void embedding_handler(const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    nlohmann::json data = nlohmann::json::array();
    const auto& input = body.at("input");
    // Reply in reverse order with explicit indices.
    for (std::size_t i = input.size(); i-- > 0;) {
        data.push_back({{"index", i}, {"embedding", server_vector(input[i].get<std::string>())}});
    }
    res.set_content(nlohmann::json{{"data", data}, {"model", body.at("model")}}.dump(), "application/json");
}

EmbeddingProviderConfig remote_config(const std::string& url) {
    EmbeddingProviderConfig c;
    c.provider_kind = ProviderKind::Remote;
    c.endpoint = url;
    c.model_id = "remote-model";
    c.initial_backoff = std::chrono::milliseconds(1);
    return c;
}

}  // namespace

TEST_CASE("stub vectors are deterministic, unit length and 16-dimensional") {
    StubEmbeddingProvider stub("all-mpnet-base-v2");
    const auto a = stub.embed_one("The brake shall engage.");
    const auto b = stub.embed_one("The brake shall engage.");
    CHECK(a == b);
    CHECK(a.dimension() == kStubDimension);
    double n = 0;
    for (double v : a.values) n += v * v;
    CHECK(std::sqrt(n) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a.model_id == "all-mpnet-base-v2");
    CHECK(StubEmbeddingProvider("bge-m3").embed_one("The brake shall engage.").values != a.values);
    // Token-free text still gets a vector.
    CHECK(stub.embed_one("!!!").dimension() == kStubDimension);
}

TEST_CASE("embed_batch preserves order") {
    StubEmbeddingProvider stub("m");
    const std::vector<std::string> ab = {"alpha", "beta"}, ba = {"beta", "alpha"};
    const auto x = embed_batch(ab, stub, nullptr, 64);
    const auto y = embed_batch(ba, stub, nullptr, 64);
    CHECK(x[0] == y[1]);
    CHECK(x[1] == y[0]);
    const std::vector<std::string> bad = {"ok", "  "};
    CHECK_THROWS_AS(embed_batch(bad, stub, nullptr, 64), Error);
}

TEST_CASE("cache is transparent and persists") {
    fixtures::TempDir dir("embed");
    StubEmbeddingProvider stub("m");
    std::vector<std::string> texts;
    std::mt19937_64 rng(4);
    for (int i = 0; i < 50; ++i) texts.push_back(fixtures::random_words(rng, 2, 8));
    const auto plain = embed_batch(texts, stub, nullptr, 7);
    {
        EmbeddingCache cache(dir / "cache.jsonl");
        CHECK(embed_batch(texts, stub, &cache, 7) == plain);
        CHECK(embed_batch(texts, stub, &cache, 7) == plain);
    }
    EmbeddingCache reloaded(dir / "cache.jsonl");
    CHECK(reloaded.size() > 0);
    CHECK(embed_batch(texts, stub, &reloaded, 3) == plain);
}

TEST_CASE("cache rejects a vector of another dimension for the same model") {
    EmbeddingCache cache;
    cache.store("m", "a", vec({1, 0}));
    CHECK_THROWS_AS(cache.store("m", "b", vec({1, 0, 0})), Error);
    cache.store("other", "b", vec({1, 0, 0}));
    CHECK(cache.lookup("other", "b").has_value());
}

TEST_CASE("cosine similarity") {
    CHECK(cosine_similarity(vec({1, 2}), vec({1, 2})) == doctest::Approx(1.0));
    CHECK(cosine_similarity(vec({1, 0}), vec({0, 1})) == doctest::Approx(0.0));
    CHECK(std::abs(cosine_similarity(vec({1, 2, 3}), vec({4, 5, 6})) - 32.0 / (std::sqrt(14.0) * std::sqrt(77.0))) < 1e-12);
    CHECK(std::abs(cosine_similarity(vec({1, 2, 3}), vec({4, 5, 6})) - 0.974631846) < 1e-9);
    CHECK_THROWS_AS(cosine_similarity(vec({0, 0}), vec({1, 0})), Error);
    CHECK_THROWS_AS(cosine_similarity(vec({1, 0}), vec({1, 0, 0})), Error);
    CHECK_THROWS_AS(cosine_similarity(vec({1, 0}), vec({1, 0}, "other")), Error);
}

TEST_CASE("euclidean similarity") {
    CHECK(euclidean_similarity(vec({1, 2}), vec({1, 2})) == 1.0);
    CHECK(std::abs(euclidean_similarity(vec({0, 0}), vec({3, 4})) - 1.0 / 6.0) < 1e-15);
    CHECK_THROWS_AS(euclidean_similarity(vec({1}), vec({1, 2})), Error);
}

TEST_CASE("similarity properties on random vectors") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    for (int t = 0; t < 500; ++t) {
        std::vector<double> u(9), v(9), w(9);
        for (auto* x : {&u, &v, &w}) {
            for (auto& e : *x) e = g(rng) * 10;
        }
        const double c = cosine_similarity(vec(u), vec(v));
        CHECK(std::abs(c) <= 1.0 + 1e-12);
        CHECK(c == cosine_similarity(vec(v), vec(u)));
        // 1/(1+d) orders candidates exactly as -d does.
        const double du = euclidean_distance(vec(w), vec(u)), dv = euclidean_distance(vec(w), vec(v));
        const double su = euclidean_similarity(vec(w), vec(u)), sv = euclidean_similarity(vec(w), vec(v));
        CHECK((du < dv) == (su > sv));
        CHECK(su > 0.0);
        CHECK(su <= 1.0);
    }
}

TEST_CASE("remote provider batches requests") {
    fixtures::FakeServer server("/v1/embeddings", embedding_handler);
    auto config = remote_config(server.url("/v1/embeddings"));
    std::vector<std::string> texts;
    for (int i = 0; i < 1000; ++i) texts.push_back("requirement text " + std::to_string(i));

    RemoteEmbeddingProvider remote(config);
    const auto batched = embed_batch(texts, remote, nullptr, 64);
    CHECK(server.requests() == 16);
    REQUIRE(batched.size() == 1000);

    // Oracle: one request per text.
    for (std::size_t i = 0; i < texts.size(); i += 97) {
        const auto single = remote.embed(std::span(&texts[i], 1));
        CHECK(single[0] == batched[i]);
        CHECK(batched[i].values == server_vector(texts[i]));
    }
}

TEST_CASE("remote provider retries server errors, then gives up") {
    std::atomic<int> calls{0};
    fixtures::FakeServer flaky("/e", [&](const httplib::Request& req, httplib::Response& res) {
        if (calls++ == 0) {
            res.status = 503;
            return;
        }
        embedding_handler(req, res);
    });
    RemoteEmbeddingProvider remote(remote_config(flaky.url("/e")));
    const std::vector<std::string> one = {"x"};
    CHECK(remote.embed(one)[0].values == server_vector("x"));
    CHECK(flaky.requests() == 2);

    fixtures::FakeServer down("/e", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
    RemoteEmbeddingProvider broken(remote_config(down.url("/e")));
    try {
        broken.embed(one);
        FAIL("expected ProviderUnavailable");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ProviderUnavailable);
    }
    CHECK(down.requests() == 3);

    fixtures::FakeServer reject("/e", [](const httplib::Request&, httplib::Response& res) { res.status = 400; });
    RemoteEmbeddingProvider rejected(remote_config(reject.url("/e")));
    CHECK_THROWS_AS(rejected.embed(one), Error);
    CHECK(reject.requests() == 1);
}

TEST_CASE("remote provider sends the api key") {
    std::string auth;
    fixtures::FakeServer server("/e", [&](const httplib::Request& req, httplib::Response& res) {
        auth = req.get_header_value("Authorization");
        embedding_handler(req, res);
    });
    auto config = remote_config(server.url("/e"));
    config.api_key = "secret";
    RemoteEmbeddingProvider remote(config);
    const std::vector<std::string> one = {"x"};
    remote.embed(one);
    CHECK(auth == "Bearer secret");
}

TEST_CASE("provider config validation") {
    EmbeddingProviderConfig c;
    c.provider_kind = ProviderKind::Remote;
    CHECK_THROWS_AS(c.validate(), Error);
    c.endpoint = "http://localhost:1/e";
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c.batch_size = 1;
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("embedding store keys by text") {
    StubEmbeddingProvider stub("m");
    EmbeddingStore store("m");
    const std::vector<std::string> texts = {"a b", "c d", "a b"};
    store.add(texts, stub, nullptr, 2);
    CHECK(store.size() == 2);
    CHECK(store.at("a b") == stub.embed_one("a b"));
    CHECK_THROWS(store.at("zzz"));
}
