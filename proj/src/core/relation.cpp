#include "relmatch/core/relation.hpp"

#include "relmatch/errors.hpp"
#include "relmatch/util/fs.hpp"

#include <json.hpp>

#include <algorithm>
#include <unordered_set>

namespace relmatch::core {

using nlohmann::ordered_json;

std::string to_string(Multiplicity m) {
    return m == Multiplicity::single ? "single" : "many";
}

Multiplicity multiplicity_from_string(const std::string& s) {
    if (s == "single") return Multiplicity::single;
    if (s == "many") return Multiplicity::many;
    throw MalformedCatalog("unknown multiplicity '" + s + "'");
}

const RelationSpec* RelationCatalog::find(std::string_view id) const {
    for (const auto& r : relations) {
        if (r.id == id) return &r;
    }
    return nullptr;
}

std::vector<const RelationSpec*> RelationCatalog::by_priority() const {
    std::vector<const RelationSpec*> out;
    out.reserve(relations.size());
    for (const auto& r : relations) out.push_back(&r);
    std::sort(out.begin(), out.end(), [](const RelationSpec* a, const RelationSpec* b) {
        return a->priority_rank < b->priority_rank;
    });
    return out;
}

void validate_catalog(const RelationCatalog& catalog) {
    std::unordered_set<std::string> ids;
    for (const auto& rel : catalog.relations) {
        const std::string label = rel.id.empty() ? rel.display_name : rel.id;
        if (rel.id.empty()) {
            throw InvalidCatalog("relation '" + label + "' has an empty id");
        }
        if (rel.description.empty()) {
            throw InvalidCatalog("relation '" + label + "' has an empty description");
        }
        if (rel.examples.empty()) {
            throw InvalidCatalog("relation '" + label + "' has no examples");
        }
        if (rel.priority_rank < 1) {
            throw InvalidCatalog("relation '" + label + "' has priority_rank " +
                                 std::to_string(rel.priority_rank) + " (must be >= 1)");
        }
        if (!ids.insert(rel.id).second) {
            throw InvalidCatalog("duplicate relation id '" + rel.id + "'");
        }
    }
    // Ranks must be a permutation of 1..N.
    std::vector<int> ranks;
    for (const auto& rel : catalog.relations) ranks.push_back(rel.priority_rank);
    std::sort(ranks.begin(), ranks.end());
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        if (ranks[i] != static_cast<int>(i) + 1) {
            std::string offender;
            for (const auto& rel : catalog.relations) {
                if (rel.priority_rank == ranks[i]) offender = rel.id;
            }
            throw InvalidCatalog("priority ranks are not contiguous from 1: rank " +
                                 std::to_string(ranks[i]) + " (relation '" + offender +
                                 "') breaks the sequence");
        }
    }
}

RelationCatalog parse_catalog(const std::string& json_text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedCatalog(std::string("catalog is not valid JSON: ") + e.what());
    }

    RelationCatalog catalog;
    try {
        if (!doc.is_object() || !doc.contains("relations") || !doc["relations"].is_array()) {
            throw MalformedCatalog("catalog must be an object with a 'relations' array");
        }
        for (const auto& item : doc["relations"]) {
            RelationSpec rel;
            rel.id = item.at("id").get<std::string>();
            rel.display_name = item.at("display_name").get<std::string>();
            rel.description = item.at("description").get<std::string>();
            rel.priority_rank = item.at("priority_rank").get<int>();
            rel.multiplicity = multiplicity_from_string(item.at("multiplicity").get<std::string>());
            for (const auto& ex : item.at("examples")) {
                RelationExample example;
                example.source_text = ex.at("source_text").get<std::string>();
                example.target_text = ex.at("target_text").get<std::string>();
                example.explanation = ex.at("explanation").get<std::string>();
                rel.examples.push_back(std::move(example));
            }
            catalog.relations.push_back(std::move(rel));
        }
    } catch (const nlohmann::json::exception& e) {
        throw MalformedCatalog(std::string("catalog shape error: ") + e.what());
    }

    validate_catalog(catalog);
    return catalog;
}

RelationCatalog load_catalog(const std::filesystem::path& path) {
    return parse_catalog(util::read_file(path));
}

std::string catalog_to_json(const RelationCatalog& catalog) {
    ordered_json doc;
    doc["relations"] = ordered_json::array();
    for (const auto& rel : catalog.relations) {
        ordered_json item;
        item["id"] = rel.id;
        item["display_name"] = rel.display_name;
        item["description"] = rel.description;
        item["priority_rank"] = rel.priority_rank;
        item["multiplicity"] = to_string(rel.multiplicity);
        item["examples"] = ordered_json::array();
        for (const auto& ex : rel.examples) {
            ordered_json e;
            e["source_text"] = ex.source_text;
            e["target_text"] = ex.target_text;
            e["explanation"] = ex.explanation;
            item["examples"].push_back(std::move(e));
        }
        doc["relations"].push_back(std::move(item));
    }
    return doc.dump(2) + "\n";
}

void save_catalog(const RelationCatalog& catalog, const std::filesystem::path& path) {
    util::write_file_atomic(path, catalog_to_json(catalog));
}

} // namespace relmatch::core
