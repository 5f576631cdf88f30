#pragma once

#include "relmatch/core/entity.hpp"
#include "relmatch/core/relation.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace relmatch::harness {

// Relation ids of the bundled catalog, in priority order.
inline constexpr std::string_view kExactId = "exactly-the-same";
inline constexpr std::string_view kGeneralId = "general-without-details";
inline constexpr std::string_view kAdditionalId = "additional-details";
inline constexpr std::string_view kWrongId = "wrong-details";
inline constexpr std::string_view kComponentId = "component";

/// The five-relation catalog used by the synthetic benchmark and the bundled
/// fixtures. Priority ranks follow the order above; component is one-to-many.
core::RelationCatalog builtin_esg_catalog();

struct SlotSpec {
    std::string name;
    std::vector<std::string> values; // mutually exclusive

    bool operator==(const SlotSpec&) const = default;
};

/// Word material for one concept family. Every surface word must be unique
/// within the vocabulary so a rendered phrase identifies its node and details
/// unambiguously.
struct FamilySpec {
    std::string name;
    std::vector<std::vector<std::string>> nouns; // synonym groups, first form is primary
    std::vector<std::string> qualifiers;         // build subtype labels, e.g. "city" + "car"
    std::vector<SlotSpec> slots;
    std::vector<std::string> parts; // part nouns, rendered "<owner> <part>"

    bool operator==(const FamilySpec&) const = default;
};

using Vocabulary = std::vector<FamilySpec>;

/// The vocabulary compiled into the library (same content as the bundled
/// data/surface_forms.json).
Vocabulary builtin_vocabulary();

/// Parses a vocabulary JSON document: top-level `families` array with
/// name/nouns/qualifiers/slots/parts. Throws MalformedVocabulary on shape
/// errors or on surface words that appear twice.
Vocabulary parse_vocabulary(const std::string& json_text);
Vocabulary load_vocabulary(const std::filesystem::path& path);

/// A node of the concept forest. Part nodes hang off an owner node through a
/// parts edge instead of a parent edge; they never have children or details.
struct TaxonomyNode {
    std::string key;    // unique path key, e.g. "vehicle/car/city car"
    std::string family;
    std::size_t depth = 0; // 0 = family root
    std::string parent; // empty for roots and part nodes
    std::vector<std::string> synonyms; // alternative surface phrases
    std::vector<std::string> path;     // keys root..self (owner path for parts)
    bool is_part = false;
    std::string owner; // owning node key, set for parts
    std::vector<std::string> part_keys; // parts edges out of this node
};

struct Taxonomy {
    std::vector<TaxonomyNode> nodes; // stable generation order
    std::map<std::string, std::size_t> by_key;
    // Flattened coordinate books for the mock embedder: stable global order.
    std::vector<std::pair<std::string, SlotSpec>> slots; // (family, slot)

    const TaxonomyNode& node(const std::string& key) const; // throws UnknownNode
    bool contains(const std::string& key) const { return by_key.count(key) != 0; }

    /// True when `ancestor` appears strictly above `key` on its parent path.
    bool is_proper_ancestor(const std::string& ancestor, const std::string& key) const;
};

/// Semantic identity of one generated record.
struct EntityMeta {
    std::string node_key;
    std::map<std::string, std::string> details; // slot name -> value, empty for parts

    bool operator==(const EntityMeta&) const = default;
};

struct Triple {
    std::string relation_id;
    std::string source_id;
    std::string target_id;

    auto operator<=>(const Triple&) const = default;
};

struct GroundTruth {
    std::set<Triple> triples;

    bool contains(std::string_view relation_id, std::string_view source_id,
                  std::string_view target_id) const;
    std::size_t count_for(std::string_view relation_id) const;
};

std::string truth_to_json(const GroundTruth& truth);
GroundTruth parse_truth(const std::string& json_text);
GroundTruth load_truth(const std::filesystem::path& path);
void save_truth(const GroundTruth& truth, const std::filesystem::path& path);

struct GenParams {
    std::uint64_t seed = 42;
    std::size_t tree_depth = 3; // levels per family including the root, >= 2
    std::size_t branching = 3;  // children created under each expandable node
    std::size_t targets_count = 500;
    std::size_t sources_count = 50;
    double synonym_rate = 0.5; // chance a rendering picks a non-primary synonym
    double detail_rate = 0.5;  // chance each slot of an instance is filled
};

/// Throws InvalidParams unless counts are positive, depth >= 2, rates are in
/// [0, 1], and targets_count leaves room for the guaranteed seed entities.
void validate_params(const GenParams& params);

struct SyntheticCorpus {
    Taxonomy taxonomy;
    core::EntityTable sources; // schema: name, category
    core::EntityTable targets;
    GroundTruth truth;
    std::map<std::string, EntityMeta> meta; // record id -> meta, both tables
};

/// Builds the concept forest from the vocabulary, instantiates source and
/// target records, and derives ground truth:
///   exactly-the-same     same node, identical details
///   general-without-details  bare target on a proper ancestor node, or a bare
///                            target on the same node when the source has details
///   additional-details   same node, target fills a slot the source left empty
///   wrong-details        same node, a shared slot holds conflicting values
///   component            target instantiates a part owned by the source's
///                        node or one of its ancestors
/// A fixed block of seed targets guarantees every relation occurs and that at
/// least one (source, target) pair carries two relations at once.
/// Deterministic for fixed (vocabulary, params).
SyntheticCorpus generate_taxonomy(const Vocabulary& vocabulary, const GenParams& params);

/// Independent re-check of a corpus: re-derives the relation rules pair by
/// pair against the forest and compares with corpus.truth exactly; also
/// verifies id uniqueness, meta coverage, unambiguous rendered text, and the
/// presence of a two-relation overlap pair. Throws InvalidParams naming the
/// first violation.
void validate_corpus(const SyntheticCorpus& corpus);

} // namespace relmatch::harness
