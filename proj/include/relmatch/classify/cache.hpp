#pragma once

#include "relmatch/core/verdict.hpp"

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace relmatch::classify {

/// Complete cache key for one classification call: prompts are
/// byte-deterministic, so hashing (prompt, model_hint) identifies the call.
std::string cache_key(const std::string& prompt, const std::string& model_hint);

struct CachedVerdicts {
    std::vector<core::RelationVerdict> verdicts; // provenance rewritten on hit
};

/// Verdict store keyed by cache_key(). Reads may be concurrent; writes are
/// serialized per key by the implementations below.
class VerdictCache {
public:
    virtual ~VerdictCache() = default;

    virtual std::optional<CachedVerdicts> lookup(const std::string& key) = 0;
    virtual void store(const std::string& key, const CachedVerdicts& entry) = 0;
    /// Persists an unparseable raw reply for offline inspection.
    virtual void store_failure(const std::string& key, const std::string& raw_text) = 0;
};

class MemoryCache : public VerdictCache {
public:
    std::optional<CachedVerdicts> lookup(const std::string& key) override;
    void store(const std::string& key, const CachedVerdicts& entry) override;
    void store_failure(const std::string& key, const std::string& raw_text) override;

    std::size_t size() const;
    const std::unordered_map<std::string, std::string>& failures() const { return failures_; }

private:
    mutable std::mutex mutex_;
    std::unordered_map<std::string, CachedVerdicts> entries_;
    std::unordered_map<std::string, std::string> failures_;
};

/// Content-addressed directory cache: one `<key>.json` file per entry,
/// `<key>.failed.txt` for persisted parse failures. Survives restarts.
class FileCache : public VerdictCache {
public:
    explicit FileCache(std::filesystem::path dir);

    std::optional<CachedVerdicts> lookup(const std::string& key) override;
    void store(const std::string& key, const CachedVerdicts& entry) override;
    void store_failure(const std::string& key, const std::string& raw_text) override;

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::mutex mutex_;
};

} // namespace relmatch::classify
