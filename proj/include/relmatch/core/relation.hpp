#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace relmatch::core {

enum class Multiplicity { single, many };

std::string to_string(Multiplicity m);
Multiplicity multiplicity_from_string(const std::string& s);

/// Worked example attached to a relation definition, used as few-shot context
/// in classification prompts.
struct RelationExample {
    std::string source_text;
    std::string target_text;
    std::string explanation;

    bool operator==(const RelationExample&) const = default;
};

struct RelationSpec {
    std::string id;
    std::string display_name;
    std::string description;
    std::vector<RelationExample> examples;
    int priority_rank = 0; // 1 = tried first by the cascade
    Multiplicity multiplicity = Multiplicity::single;

    bool operator==(const RelationSpec&) const = default;
};

/// The analyst-defined relation set, ordered as loaded. Ranks are unique,
/// contiguous and start at 1.
struct RelationCatalog {
    std::vector<RelationSpec> relations;

    const RelationSpec* find(std::string_view id) const;

    /// Relations sorted by ascending priority_rank.
    std::vector<const RelationSpec*> by_priority() const;

    bool operator==(const RelationCatalog&) const = default;
};

/// Throws InvalidCatalog (naming the offending relation) when any invariant
/// fails: empty id/description, missing examples, duplicate ids, or ranks
/// that are not a permutation of 1..N.
void validate_catalog(const RelationCatalog& catalog);

/// Loads and validates a catalog from a JSON document with a top-level
/// `relations` array. Throws MalformedCatalog on syntax or shape problems,
/// InvalidCatalog on invariant violations.
RelationCatalog load_catalog(const std::filesystem::path& path);
RelationCatalog parse_catalog(const std::string& json_text);

/// Serializes a catalog back to JSON. load(save(x)) is structurally equal to x.
std::string catalog_to_json(const RelationCatalog& catalog);
void save_catalog(const RelationCatalog& catalog, const std::filesystem::path& path);

} // namespace relmatch::core
