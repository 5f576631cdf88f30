#include "relmatch/classify/cache.hpp"

#include "relmatch/errors.hpp"
#include "relmatch/util/fs.hpp"
#include "relmatch/util/hash.hpp"

#include <json.hpp>

namespace relmatch::classify {

using nlohmann::ordered_json;

std::string cache_key(const std::string& prompt, const std::string& model_hint) {
    return util::sha256_hex(prompt + '\0' + model_hint);
}

std::optional<CachedVerdicts> MemoryCache::lookup(const std::string& key) {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void MemoryCache::store(const std::string& key, const CachedVerdicts& entry) {
    std::lock_guard lock(mutex_);
    entries_[key] = entry;
}

void MemoryCache::store_failure(const std::string& key, const std::string& raw_text) {
    std::lock_guard lock(mutex_);
    failures_[key] = raw_text;
}

std::size_t MemoryCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

FileCache::FileCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) {
        throw IoFailure("cannot create cache directory " + dir_.string() + ": " +
                        ec.message());
    }
}

std::optional<CachedVerdicts> FileCache::lookup(const std::string& key) {
    const auto path = dir_ / (key + ".json");
    std::string text;
    try {
        text = util::read_file(path);
    } catch (const IoFailure&) {
        return std::nullopt;
    }

    // A corrupt cache file is treated as a miss and overwritten on store.
    try {
        auto doc = nlohmann::json::parse(text);
        CachedVerdicts entry;
        for (const auto& item : doc.at("verdicts")) {
            core::RelationVerdict v;
            v.relation_id = item.at("relation_id").get<std::string>();
            v.source_id = item.at("source_id").get<std::string>();
            v.target_id = item.at("target_id").get<std::string>();
            v.decision = item.at("decision").get<bool>();
            v.rationale = item.at("rationale").get<std::string>();
            v.provenance = core::Provenance::cache();
            entry.verdicts.push_back(std::move(v));
        }
        return entry;
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
}

void FileCache::store(const std::string& key, const CachedVerdicts& entry) {
    ordered_json doc;
    doc["key"] = key;
    doc["verdicts"] = ordered_json::array();
    for (const auto& v : entry.verdicts) {
        ordered_json item;
        item["relation_id"] = v.relation_id;
        item["source_id"] = v.source_id;
        item["target_id"] = v.target_id;
        item["decision"] = v.decision;
        item["rationale"] = v.rationale;
        doc["verdicts"].push_back(std::move(item));
    }
    std::lock_guard lock(mutex_);
    util::write_file_atomic(dir_ / (key + ".json"), doc.dump(2) + "\n");
}

void FileCache::store_failure(const std::string& key, const std::string& raw_text) {
    std::lock_guard lock(mutex_);
    util::write_file_atomic(dir_ / (key + ".failed.txt"), raw_text);
}

} // namespace relmatch::classify
