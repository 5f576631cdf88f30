#include "relmatch/index/embedding.hpp"

#include "relmatch/errors.hpp"
#include "relmatch/net/http.hpp"
#include "relmatch/util/hash.hpp"
#include "relmatch/util/rng.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <thread>

namespace relmatch::index {

bool EmbeddingVector::all_finite() const {
    for (float v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double euclidean_distance_sq(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dimension() != b.dimension()) {
        throw DimensionMismatch("distance between vectors of dimension " +
                                std::to_string(a.dimension()) + " and " +
                                std::to_string(b.dimension()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        double d = static_cast<double>(a.values[i]) - static_cast<double>(b.values[i]);
        sum += d * d;
    }
    return sum;
}

double euclidean_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
    return std::sqrt(euclidean_distance_sq(a, b));
}

std::string serialize_entity(const core::EntityRecord& record) {
    std::string out;
    for (std::size_t i = 0; i < record.attributes.size(); ++i) {
        if (i > 0) out += "; ";
        out += record.attributes[i].first;
        out += ": ";
        out += record.attributes[i].second;
    }
    return out;
}

std::string serialize_entity(const core::EntityRecord& record,
                             const std::vector<std::string>& schema) {
    if (record.attributes.size() != schema.size()) {
        throw Error("record '" + record.id + "' does not conform to schema: " +
                    std::to_string(record.attributes.size()) + " attributes vs " +
                    std::to_string(schema.size()) + " schema columns");
    }
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (record.attributes[i].first != schema[i]) {
            throw Error("record '" + record.id + "' attribute '" +
                        record.attributes[i].first + "' does not match schema column '" +
                        schema[i] + "'");
        }
    }
    return serialize_entity(record);
}

DeterministicLocalProvider::DeterministicLocalProvider(std::size_t dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
    if (dimension_ == 0) {
        throw DimensionMismatch("local provider dimension must be positive");
    }
}

std::string DeterministicLocalProvider::id() const {
    return "local-det:dim=" + std::to_string(dimension_) + ":seed=" + std::to_string(seed_);
}

EmbeddingVector DeterministicLocalProvider::embed(const std::string& text) {
    util::Rng rng(util::mix_seed(util::fnv1a64(text), seed_));
    EmbeddingVector v;
    v.values.reserve(dimension_);
    for (std::size_t i = 0; i < dimension_; ++i) {
        v.values.push_back(static_cast<float>(rng.symmetric()));
    }
    return v;
}

CachingProvider::CachingProvider(std::shared_ptr<EmbeddingProvider> inner)
    : inner_(std::move(inner)) {}

EmbeddingVector CachingProvider::embed(const std::string& text) {
    const std::string key = util::sha256_hex(inner_->id() + '\0' + text);
    {
        std::lock_guard lock(mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    EmbeddingVector v = inner_->embed(text);
    std::lock_guard lock(mutex_);
    cache_.emplace(key, v);
    return v;
}

RemoteEmbeddingProvider::RemoteEmbeddingProvider(RemoteProviderConfig config)
    : config_(std::move(config)) {}

std::string RemoteEmbeddingProvider::id() const {
    return "remote:" + config_.model;
}

EmbeddingVector RemoteEmbeddingProvider::embed(const std::string& text) {
    nlohmann::json body;
    body["model"] = config_.model;
    body["input"] = text;

    net::HttpResponse resp;
    std::string last_error;
    int backoff_ms = config_.initial_backoff_ms;
    for (int attempt = 0;; ++attempt) {
        try {
            resp = net::post_json(config_.endpoint, "/v1/embeddings", config_.api_key,
                                  body.dump());
            break;
        } catch (const net::TransportError& e) {
            last_error = e.what();
            if (attempt + 1 >= config_.attempts) {
                throw ProviderUnavailable("embedding provider unreachable after " +
                                          std::to_string(config_.attempts) +
                                          " attempts: " + last_error);
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
    }
    if (resp.status < 200 || resp.status >= 300) {
        throw ProviderUnavailable("embedding provider returned HTTP " +
                                  std::to_string(resp.status) + ": " + resp.body);
    }

    EmbeddingVector v;
    try {
        auto doc = nlohmann::json::parse(resp.body);
        for (const auto& x : doc.at("data").at(0).at("embedding")) {
            v.values.push_back(x.get<float>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw ProviderUnavailable(std::string("embedding response malformed: ") + e.what());
    }

    std::size_t expected = dimension_.load();
    if (expected == 0) {
        dimension_.store(v.dimension());
    } else if (v.dimension() != expected) {
        throw DimensionMismatch("embedding provider returned dimension " +
                                std::to_string(v.dimension()) + ", expected " +
                                std::to_string(expected));
    }
    if (!v.all_finite()) {
        throw DimensionMismatch("embedding provider returned non-finite values");
    }
    return v;
}

} // namespace relmatch::index
