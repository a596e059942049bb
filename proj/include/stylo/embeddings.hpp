#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stylo/error.hpp"

namespace stylo {

struct EmbeddingVector {
    std::vector<double> values;
    std::string provider_id;
    bool empty_input = false;  // zero vector produced for blank text

    std::size_t dim() const { return values.size(); }
};

enum class ProviderKind { builtin_tf, remote };

struct ProviderConfig {
    ProviderKind kind = ProviderKind::builtin_tf;
    std::string endpoint;           // http://host:port[/prefix], remote only
    std::string model = "allenai/scibert_scivocab_uncased";
    int timeout_ms = 30000;
    int retries = 2;
    std::size_t hash_dim = 1024;    // builtin only

    void validate() const;
    /// Provenance string recorded in reports, e.g. "builtin_tf:1024".
    std::string provenance() const;
};

/// Parses "builtin" or "remote:URL".
ProviderConfig parse_provider(std::string_view spec);

class ProviderError : public RuntimeFailure {
public:
    using RuntimeFailure::RuntimeFailure;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    /// One vector per input, order preserved. Blank texts get a zero vector
    /// with `empty_input` set.
    virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const = 0;
    virtual std::string id() const = 0;
    virtual std::string provenance() const = 0;
};

/// Lemma term frequencies hashed into `dim` buckets with signed FNV-1a
/// hashing, then L2-normalized.
class HashedLemmaProvider final : public EmbeddingProvider {
public:
    explicit HashedLemmaProvider(std::size_t dim = 1024);

    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override;
    std::string id() const override { return "builtin_tf"; }
    std::string provenance() const override;

    EmbeddingVector embed_one(std::string_view text) const;
    std::size_t dim() const { return dim_; }

    /// Bucket index and sign (+1/-1) for a lemma.
    std::pair<std::size_t, int> bucket(std::string_view lemma) const;

private:
    std::size_t dim_;
};

/// Client for a transformer-embedding service:
///   POST {endpoint}/v1/embed  {"model": ..., "texts": [...]}
///   200 -> {"dim": n, "vectors": [[...], ...]}
/// 5xx and transport failures are retried; 4xx is not. If the environment
/// variable STYLO_EMBEDDING_API_KEY is set it is sent as a bearer token.
class RemoteProvider final : public EmbeddingProvider {
public:
    explicit RemoteProvider(ProviderConfig config);

    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override;
    std::string id() const override { return "remote"; }
    std::string provenance() const override;

private:
    ProviderConfig config_;
    std::string scheme_host_port_;
    std::string path_prefix_;
    std::string api_key_;
};

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderConfig& config);

std::vector<EmbeddingVector> embed(std::span<const std::string> texts, const ProviderConfig& config);

std::uint64_t fnv1a64(std::string_view data);

/// dot(u,v) / (|u||v|), clamped to [-1, 1]; 0 when either norm is zero.
double cosine(std::span<const double> u, std::span<const double> v);
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

}  // namespace stylo
