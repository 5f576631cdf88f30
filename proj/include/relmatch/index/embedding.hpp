#pragma once

#include "relmatch/core/entity.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace relmatch::index {

struct EmbeddingVector {
    std::vector<float> values;

    std::size_t dimension() const { return values.size(); }
    bool all_finite() const;

    bool operator==(const EmbeddingVector&) const = default;
};

/// Euclidean distance (square root applied).
double euclidean_distance(const EmbeddingVector& a, const EmbeddingVector& b);
/// Squared Euclidean distance; ranking-equivalent and cheaper.
double euclidean_distance_sq(const EmbeddingVector& a, const EmbeddingVector& b);

/// Text of a record for embedding: `"name1: value1; name2: value2"` in schema
/// order. Deterministic; values kept verbatim.
std::string serialize_entity(const core::EntityRecord& record);
/// Checked variant: throws DimensionMismatch-style logic error if the record's
/// attribute names do not equal `schema`.
std::string serialize_entity(const core::EntityRecord& record,
                             const std::vector<std::string>& schema);

/// Text -> vector backend. Implementations must be safe for concurrent calls.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    /// Stable identifier recorded in index manifests; two indexes are only
    /// comparable when built by providers with equal ids.
    virtual std::string id() const = 0;

    /// Vector width, or 0 when not yet known (remote providers before the
    /// first call).
    virtual std::size_t dimension() const = 0;

    /// Throws ProviderUnavailable on transport failure, DimensionMismatch when
    /// the backend returns an unexpected width.
    virtual EmbeddingVector embed(const std::string& text) = 0;
};

/// Network-free provider: expands a seeded hash of the text into `dimension`
/// pseudo-random coordinates in [-1, 1]. Identical text always yields an
/// identical vector, on any platform.
class DeterministicLocalProvider : public EmbeddingProvider {
public:
    DeterministicLocalProvider(std::size_t dimension, std::uint64_t seed);

    std::string id() const override;
    std::size_t dimension() const override { return dimension_; }
    EmbeddingVector embed(const std::string& text) override;

private:
    std::size_t dimension_;
    std::uint64_t seed_;
};

/// Memoizes embed() by (provider id, text hash) so repeated texts hit the
/// inner provider once. Thread-safe.
class CachingProvider : public EmbeddingProvider {
public:
    explicit CachingProvider(std::shared_ptr<EmbeddingProvider> inner);

    std::string id() const override { return inner_->id(); }
    std::size_t dimension() const override { return inner_->dimension(); }
    EmbeddingVector embed(const std::string& text) override;

private:
    std::shared_ptr<EmbeddingProvider> inner_;
    std::mutex mutex_;
    std::unordered_map<std::string, EmbeddingVector> cache_;
};

/// Counts calls reaching the inner provider; used to observe caching and
/// short-circuit behavior.
class CountingProvider : public EmbeddingProvider {
public:
    explicit CountingProvider(std::shared_ptr<EmbeddingProvider> inner) : inner_(std::move(inner)) {}

    std::string id() const override { return inner_->id(); }
    std::size_t dimension() const override { return inner_->dimension(); }
    EmbeddingVector embed(const std::string& text) override {
        ++calls_;
        return inner_->embed(text);
    }

    std::size_t calls() const { return calls_.load(); }

private:
    std::shared_ptr<EmbeddingProvider> inner_;
    std::atomic<std::size_t> calls_{0};
};

struct RemoteProviderConfig {
    std::string endpoint;   // e.g. "https://api.openai.com"
    std::string model;      // e.g. "text-embedding-ada-002"
    std::string api_key;    // from RELMATCH_API_KEY
    int attempts = 3;
    int initial_backoff_ms = 1000;
};

/// HTTP embedding provider speaking the common `/v1/embeddings` shape.
/// Retries transport failures with exponential backoff, then throws
/// ProviderUnavailable.
class RemoteEmbeddingProvider : public EmbeddingProvider {
public:
    explicit RemoteEmbeddingProvider(RemoteProviderConfig config);

    std::string id() const override;
    std::size_t dimension() const override { return dimension_.load(); }
    EmbeddingVector embed(const std::string& text) override;

private:
    RemoteProviderConfig config_;
    std::atomic<std::size_t> dimension_{0}; // fixed by the first response
};

} // namespace relmatch::index
