#include "stylo/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "stylo/textproc.hpp"

namespace stylo {

namespace {

bool is_blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

}  // namespace

void ProviderConfig::validate() const {
    if (timeout_ms <= 0) throw ValidationError("embedding timeout must be positive");
    if (retries < 0) throw ValidationError("embedding retry count must be non-negative");
    if (kind == ProviderKind::builtin_tf && hash_dim < 64) {
        throw ValidationError("embedding hash dimension must be at least 64");
    }
    if (kind == ProviderKind::remote && endpoint.empty()) {
        throw ValidationError("remote embedding provider needs an endpoint");
    }
}

std::string ProviderConfig::provenance() const {
    if (kind == ProviderKind::builtin_tf) return "builtin_tf:" + std::to_string(hash_dim);
    return "remote:" + endpoint + ":" + model;
}

ProviderConfig parse_provider(std::string_view spec) {
    ProviderConfig config;
    if (spec == "builtin" || spec == "builtin_tf") return config;
    if (spec.rfind("remote:", 0) == 0) {
        config.kind = ProviderKind::remote;
        config.endpoint = std::string(spec.substr(7));
        config.validate();
        return config;
    }
    throw ValidationError("unknown embedding provider '" + std::string(spec) + "' (expected builtin or remote:URL)");
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw ValidationError("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                              std::to_string(v.size()) + ")");
    }
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) return 0.0;
    // sqrt(nu * nv) keeps the expression symmetric in (u, v)
    const double c = dot / std::sqrt(nu * nv);
    return std::clamp(c, -1.0, 1.0);
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) { return cosine(u.values, v.values); }

// ---- builtin ---------------------------------------------------------------

HashedLemmaProvider::HashedLemmaProvider(std::size_t dim) : dim_(dim) {
    if (dim_ < 64) throw ValidationError("embedding hash dimension must be at least 64");
}

std::string HashedLemmaProvider::provenance() const { return "builtin_tf:" + std::to_string(dim_); }

std::pair<std::size_t, int> HashedLemmaProvider::bucket(std::string_view lemma) const {
    const std::uint64_t h = fnv1a64(lemma);
    return {static_cast<std::size_t>(h % dim_), (h >> 63) != 0 ? -1 : 1};
}

EmbeddingVector HashedLemmaProvider::embed_one(std::string_view text) const {
    EmbeddingVector v;
    v.provider_id = id();
    v.values.assign(dim_, 0.0);
    if (is_blank(text)) {
        v.empty_input = true;
        return v;
    }
    for (const Token& t : tokenize(text)) {
        if (!t.is_word()) continue;
        const auto [index, sign] = bucket(t.lemma);
        v.values[index] += sign;
    }
    double norm = 0.0;
    for (double x : v.values) norm += x * x;
    if (norm == 0.0) {
        v.empty_input = true;
        return v;
    }
    norm = std::sqrt(norm);
    for (double& x : v.values) x /= norm;
    return v;
}

std::vector<EmbeddingVector> HashedLemmaProvider::embed(std::span<const std::string> texts) const {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
}

// ---- remote ----------------------------------------------------------------

RemoteProvider::RemoteProvider(ProviderConfig config) : config_(std::move(config)) {
    config_.kind = ProviderKind::remote;
    config_.validate();
    const std::string& url = config_.endpoint;
    const auto scheme_end = url.find("://");
    const auto host_begin = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    const auto path_begin = url.find('/', host_begin);
    if (path_begin == std::string::npos) {
        scheme_host_port_ = url;
    } else {
        scheme_host_port_ = url.substr(0, path_begin);
        path_prefix_ = url.substr(path_begin);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }
    if (scheme_end == std::string::npos) scheme_host_port_ = "http://" + scheme_host_port_;
    if (const char* key = std::getenv("STYLO_EMBEDDING_API_KEY"); key != nullptr) api_key_ = key;
}

std::string RemoteProvider::provenance() const { return config_.provenance(); }

std::vector<EmbeddingVector> RemoteProvider::embed(std::span<const std::string> texts) const {
    std::vector<EmbeddingVector> out(texts.size());
    std::vector<std::size_t> sent;
    nlohmann::json body{{"model", config_.model}, {"texts", nlohmann::json::array()}};
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (is_blank(texts[i])) continue;
        sent.push_back(i);
        body["texts"].push_back(texts[i]);
    }
    if (sent.empty()) {
        throw ProviderError("remote embedding: no non-empty texts in batch");
    }

    httplib::Client client(scheme_host_port_);
    const auto seconds = config_.timeout_ms / 1000;
    const auto micros = (config_.timeout_ms % 1000) * 1000;
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    const std::string payload = body.dump();
    const std::string path = path_prefix_ + "/v1/embed";
    std::string last_error;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
        auto res = client.Post(path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "server returned " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw ProviderError("remote embedding: request rejected with status " + std::to_string(res->status) +
                                ": " + res->body);
        }
        nlohmann::json reply;
        try {
            reply = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::parse_error& e) {
            throw ProviderError(std::string("remote embedding: malformed response (") + e.what() + ")");
        }
        if (!reply.contains("dim") || !reply.contains("vectors") || !reply["vectors"].is_array()) {
            throw ProviderError("remote embedding: response lacks dim/vectors");
        }
        const auto dim = reply["dim"].get<std::size_t>();
        const auto& vectors = reply["vectors"];
        if (vectors.size() != sent.size()) {
            throw ProviderError("remote embedding: expected " + std::to_string(sent.size()) + " vectors, got " +
                                std::to_string(vectors.size()));
        }
        for (std::size_t k = 0; k < sent.size(); ++k) {
            EmbeddingVector v;
            v.provider_id = id();
            v.values = vectors[k].get<std::vector<double>>();
            if (v.values.size() != dim) {
                throw ProviderError("remote embedding: dimension mismatch in batch (expected " +
                                    std::to_string(dim) + ", got " + std::to_string(v.values.size()) + ")");
            }
            for (double x : v.values) {
                if (!std::isfinite(x)) throw ProviderError("remote embedding: non-finite value in response");
            }
            out[sent[k]] = std::move(v);
        }
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (!out[i].values.empty()) continue;
            out[i].provider_id = id();
            out[i].values.assign(dim, 0.0);
            out[i].empty_input = true;
        }
        return out;
    }
    throw ProviderError("remote embedding: giving up after " + std::to_string(config_.retries + 1) +
                        " attempts (" + last_error + ")");
}

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderConfig& config) {
    config.validate();
    if (config.kind == ProviderKind::builtin_tf) return std::make_unique<HashedLemmaProvider>(config.hash_dim);
    return std::make_unique<RemoteProvider>(config);
}

std::vector<EmbeddingVector> embed(std::span<const std::string> texts, const ProviderConfig& config) {
    if (texts.empty()) throw ValidationError("embed: no texts given");
    return make_provider(config)->embed(texts);
}

}  // namespace stylo
