#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "httplib.h"
#include "nlohmann/json.hpp"
#include "stylo/embeddings.hpp"
#include "stylo/error.hpp"
#include "stylo/features.hpp"
#include "support/fixtures.hpp"

using namespace stylo;

TEST_CASE("builtin vectors are deterministic and unit length") {
    const HashedLemmaProvider p;
    const std::vector<std::string> texts = {"The model improves recall.", "The model improves recall."};
    const auto a = p.embed(texts);
    const auto b = p.embed(texts);
    REQUIRE(a.size() == 2);
    CHECK(a[0].values == a[1].values);
    CHECK(a[0].values == b[0].values);
    CHECK(a[0].dim() == 1024);
    CHECK(a[0].provider_id == "builtin_tf");
    for (const auto& d : fixtures::mini_corpus().documents) {
        const auto v = p.embed_one(d.abstract);
        double norm = 0;
        for (double x : v.values) {
            CHECK(std::isfinite(x));
            norm += x * x;
        }
        CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("disjoint lemma sets without bucket collisions are orthogonal") {
    const HashedLemmaProvider p;
    const std::vector<std::string> left = {"cat", "sat", "mat"};
    const std::vector<std::string> right = {"dog", "ran", "park"};
    for (const auto& l : left) {
        for (const auto& r : right) REQUIRE(p.bucket(l).first != p.bucket(r).first);
    }
    CHECK(cosine(p.embed_one("cat sat mat"), p.embed_one("dog ran park")) == 0.0);
}

TEST_CASE("blank text gives a flagged zero vector") {
    const HashedLemmaProvider p;
    const auto v = p.embed_one("   ");
    CHECK(v.empty_input);
    CHECK(v.dim() == 1024);
    for (double x : v.values) CHECK(x == 0.0);
}

TEST_CASE("cosine examples and properties") {
    const std::vector<double> v = {0.3, -1.2, 2.0};
    CHECK(cosine(v, v) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cosine(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
    CHECK(cosine(std::vector<double>{1, 1, 0}, std::vector<double>{1, 0, 0}) == doctest::Approx(0.7071).epsilon(1e-4));
    CHECK(cosine(std::vector<double>{0, 0}, std::vector<double>{1, 0}) == 0.0);
    CHECK_THROWS_AS(cosine(std::vector<double>{1, 0}, std::vector<double>{1, 0, 0}), ValidationError);

    const std::vector<double> u = {0.5, 2.0, -1.0};
    CHECK(cosine(u, v) == cosine(v, u));
    const std::vector<double> scaled = {3.5 * 0.5, 3.5 * 2.0, 3.5 * -1.0};
    CHECK(cosine(scaled, v) == doctest::Approx(cosine(u, v)).epsilon(1e-9));
}

TEST_CASE("provider configuration") {
    CHECK(parse_provider("builtin").kind == ProviderKind::builtin_tf);
    const auto r = parse_provider("remote:http://127.0.0.1:9/x");
    CHECK(r.kind == ProviderKind::remote);
    CHECK(r.endpoint == "http://127.0.0.1:9/x");
    CHECK_THROWS_AS(parse_provider("sbert"), ValidationError);
    ProviderConfig c;
    c.hash_dim = 32;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c.hash_dim = 64;
    c.timeout_ms = 0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c.timeout_ms = 10;
    c.retries = -1;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    CHECK(ProviderConfig{}.provenance() == "builtin_tf:1024");
}

namespace {

/// In-process stand-in for the embedding service.
struct MockServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> calls{0};
    std::atomic<int> fail_first{0};  // answer 503 this many times
    std::atomic<int> status{200};
    std::atomic<bool> ragged{false};
    std::atomic<bool> hang{false};
    std::string last_auth;
    std::string last_model;

    MockServer() {
        server.Post("/v1/embed", [this](const httplib::Request& req, httplib::Response& res) {
            const int n = ++calls;
            last_auth = req.get_header_value("Authorization");
            if (hang) std::this_thread::sleep_for(std::chrono::milliseconds(400));
            if (n <= fail_first) {
                res.status = 503;
                return;
            }
            if (status != 200) {
                res.status = status;
                res.set_content("bad", "text/plain");
                return;
            }
            const auto body = nlohmann::json::parse(req.body);
            last_model = body["model"].get<std::string>();
            nlohmann::json vectors = nlohmann::json::array();
            std::size_t i = 0;
            for (const auto& t : body["texts"]) {
                const auto len = static_cast<double>(t.get<std::string>().size());
                std::vector<double> v = {len, 1.0, 0.5};
                if (ragged && i == 1) v.push_back(2.0);
                vectors.push_back(v);
                ++i;
            }
            res.set_content(nlohmann::json{{"dim", 3}, {"vectors", vectors}}.dump(), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~MockServer() {
        server.stop();
        thread.join();
    }

    ProviderConfig config(int retries = 2, int timeout_ms = 2000) const {
        ProviderConfig c;
        c.kind = ProviderKind::remote;
        c.endpoint = "http://127.0.0.1:" + std::to_string(port);
        c.retries = retries;
        c.timeout_ms = timeout_ms;
        return c;
    }
};

}  // namespace

TEST_CASE("remote provider passes vectors through") {
    MockServer mock;
    const std::vector<std::string> texts = {"abc", "", "hello"};
    const auto v = embed(texts, mock.config());
    REQUIRE(v.size() == 3);
    CHECK(v[0].provider_id == "remote");
    CHECK(v[0].values == std::vector<double>{3.0, 1.0, 0.5});
    CHECK(v[1].empty_input);
    CHECK(v[1].values == std::vector<double>{0, 0, 0});
    CHECK(v[2].values[0] == 5.0);
    CHECK(mock.last_model == "allenai/scibert_scivocab_uncased");
    CHECK(mock.calls == 1);
}

TEST_CASE("remote provider retries server errors") {
    MockServer mock;
    mock.fail_first = 2;
    const std::vector<std::string> texts = {"abc"};
    CHECK(embed(texts, mock.config(2)).size() == 1);
    CHECK(mock.calls == 3);

    MockServer exhausted;
    exhausted.fail_first = 10;
    CHECK_THROWS_AS(embed(texts, exhausted.config(1)), ProviderError);
    CHECK(exhausted.calls == 2);
}

TEST_CASE("remote provider does not retry client errors") {
    MockServer mock;
    mock.status = 400;
    const std::vector<std::string> texts = {"abc"};
    CHECK_THROWS_AS(embed(texts, mock.config(3)), ProviderError);
    CHECK(mock.calls == 1);
}

TEST_CASE("remote provider rejects ragged batches") {
    MockServer mock;
    mock.ragged = true;
    const std::vector<std::string> texts = {"a", "b"};
    CHECK_THROWS_WITH_AS(embed(texts, mock.config()), doctest::Contains("dimension mismatch"), ProviderError);
}

TEST_CASE("remote provider times out after retries") {
    MockServer mock;
    mock.hang = true;
    const std::vector<std::string> texts = {"a"};
    CHECK_THROWS_WITH_AS(embed(texts, mock.config(1, 100)), doctest::Contains("giving up after 2"), ProviderError);
}

TEST_CASE("remote provider sends the credential from the environment") {
    MockServer mock;
    ::setenv("STYLO_EMBEDDING_API_KEY", "s3cret", 1);
    const std::vector<std::string> texts = {"a"};
    embed(texts, mock.config());
    ::unsetenv("STYLO_EMBEDDING_API_KEY");
    CHECK(mock.last_auth == "Bearer s3cret");
}

TEST_CASE("provider failure during extraction names every document") {
    MockServer mock;
    mock.status = 400;
    RemoteProvider provider(mock.config(0));
    FeatureExtractor extractor(fixtures::lexicons(), provider);
    Corpus c;
    for (int i = 0; i < 3; ++i) {
        Document d;
        d.id = "doc" + std::to_string(i);
        d.title = "T";
        d.abstract = "One sentence. Two sentences.";
        d.label = i % 2 ? Label::generated : Label::human;
        c.documents.push_back(d);
    }
    const auto ids = FeatureRegistry::instance().ids();
    try {
        extract_matrix(c, ids, extractor, Execution::serial);
        FAIL("expected a failure");
    } catch (const RuntimeFailure& e) {
        const std::string what = e.what();
        CHECK(what.find("doc0") != std::string::npos);
        CHECK(what.find("doc1") != std::string::npos);
        CHECK(what.find("doc2") != std::string::npos);
    }
}
