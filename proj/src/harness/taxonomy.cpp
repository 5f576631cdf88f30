#include "relmatch/harness/taxonomy.hpp"

#include "relmatch/errors.hpp"
#include "relmatch/util/fs.hpp"
#include "relmatch/util/hash.hpp"
#include "relmatch/util/rng.hpp"

#include <relmatch/harness/surface_forms_data.hpp>

#include <json.hpp>

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace relmatch::harness {

using nlohmann::json;
using nlohmann::ordered_json;

core::RelationCatalog builtin_esg_catalog() {
    core::RelationCatalog catalog;
    catalog.relations = {
        core::RelationSpec{
            std::string(kExactId),
            "Exactly the same",
            "The output entity refers to exactly the same object as the input entity; "
            "only the surface form may differ, for example a synonym or a reordering.",
            {{"small car", "small automobile",
              "\"small automobile\" is a synonym of \"small car\", so both refer to the "
              "same entity."}},
            1,
            core::Multiplicity::single,
        },
        core::RelationSpec{
            std::string(kGeneralId),
            "General without additional details",
            "The output entity is a more general concept that covers the input entity "
            "and does not state any detail beyond that concept.",
            {{"small car", "car",
              "\"car\" is a general concept covering \"small car\" and adds no detail "
              "of its own."}},
            2,
            core::Multiplicity::single,
        },
        core::RelationSpec{
            std::string(kAdditionalId),
            "Additional details",
            "The output entity refers to the same concept as the input entity but "
            "adds an assumption or feature the input entity does not state.",
            {{"small car", "electric car",
              "\"electric car\" adds the assumption of an electric drive, which the "
              "input entity does not state."}},
            3,
            core::Multiplicity::single,
        },
        core::RelationSpec{
            std::string(kWrongId),
            "Wrong details",
            "The output entity refers to the same concept as the input entity but "
            "states a detail that contradicts the input entity.",
            {{"small car", "big car",
              "\"big car\" contradicts the detail \"small\" stated by the input "
              "entity."}},
            4,
            core::Multiplicity::single,
        },
        core::RelationSpec{
            std::string(kComponentId),
            "Component",
            "The output entity is a component or part of the input entity rather "
            "than the entity itself.",
            {{"small car", "engine",
              "an \"engine\" is a component of a car, not the car itself."}},
            5,
            core::Multiplicity::many,
        },
    };
    core::validate_catalog(catalog);
    return catalog;
}

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) {
        throw MalformedVocabulary(message);
    }
}

void check_unique_word(std::unordered_set<std::string>& seen, const std::string& word,
                       const std::string& where) {
    require(!word.empty(), "vocabulary: empty word in " + where);
    require(word.find(' ') == std::string::npos,
            "vocabulary: multi-word entry '" + word + "' in " + where);
    require(seen.insert(word).second,
            "vocabulary: surface word '" + word + "' appears twice (" + where + ")");
}

void validate_vocabulary(const Vocabulary& vocabulary) {
    require(!vocabulary.empty(), "vocabulary: no families");
    std::unordered_set<std::string> words;
    std::unordered_set<std::string> family_names;
    for (const auto& family : vocabulary) {
        require(family_names.insert(family.name).second,
                "vocabulary: duplicate family '" + family.name + "'");
        check_unique_word(words, family.name, "family names");
        require(!family.nouns.empty(), "vocabulary: family '" + family.name + "' has no nouns");
        for (const auto& group : family.nouns) {
            require(group.size() >= 2, "vocabulary: family '" + family.name +
                                           "' has a noun group without a synonym");
            for (const auto& noun : group) {
                check_unique_word(words, noun, "nouns of '" + family.name + "'");
            }
        }
        for (const auto& qualifier : family.qualifiers) {
            check_unique_word(words, qualifier, "qualifiers of '" + family.name + "'");
        }
        require(family.slots.size() >= 2,
                "vocabulary: family '" + family.name + "' needs at least two detail slots");
        std::unordered_set<std::string> slot_names;
        for (const auto& slot : family.slots) {
            require(!slot.name.empty(), "vocabulary: unnamed slot in '" + family.name + "'");
            require(slot_names.insert(slot.name).second,
                    "vocabulary: duplicate slot '" + slot.name + "' in '" + family.name + "'");
            require(slot.values.size() >= 2, "vocabulary: slot '" + slot.name +
                                                 "' needs at least two values");
            for (const auto& value : slot.values) {
                check_unique_word(words, value, "values of slot '" + slot.name + "'");
            }
        }
        require(!family.parts.empty(), "vocabulary: family '" + family.name + "' has no parts");
        for (const auto& part : family.parts) {
            check_unique_word(words, part, "parts of '" + family.name + "'");
        }
    }
}

} // namespace

Vocabulary parse_vocabulary(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw MalformedVocabulary(std::string("vocabulary: invalid JSON: ") + e.what());
    }
    Vocabulary vocabulary;
    try {
        for (const auto& f : doc.at("families")) {
            FamilySpec family;
            family.name = f.at("name").get<std::string>();
            for (const auto& group : f.at("nouns")) {
                family.nouns.push_back(group.get<std::vector<std::string>>());
            }
            family.qualifiers = f.at("qualifiers").get<std::vector<std::string>>();
            for (const auto& s : f.at("slots")) {
                family.slots.push_back(SlotSpec{s.at("name").get<std::string>(),
                                                s.at("values").get<std::vector<std::string>>()});
            }
            family.parts = f.at("parts").get<std::vector<std::string>>();
            vocabulary.push_back(std::move(family));
        }
    } catch (const json::exception& e) {
        throw MalformedVocabulary(std::string("vocabulary: unexpected shape: ") + e.what());
    }
    validate_vocabulary(vocabulary);
    return vocabulary;
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
    return parse_vocabulary(util::read_file(path));
}

Vocabulary builtin_vocabulary() {
    static const Vocabulary vocabulary = parse_vocabulary(std::string(kSurfaceFormsJson));
    return vocabulary;
}

const TaxonomyNode& Taxonomy::node(const std::string& key) const {
    auto it = by_key.find(key);
    if (it == by_key.end()) {
        throw UnknownNode("taxonomy node '" + key + "' does not exist");
    }
    return nodes[it->second];
}

bool Taxonomy::is_proper_ancestor(const std::string& ancestor, const std::string& key) const {
    const TaxonomyNode& n = node(key);
    for (std::size_t i = 0; i + 1 < n.path.size(); ++i) {
        if (n.path[i] == ancestor) {
            return true;
        }
    }
    return false;
}

bool GroundTruth::contains(std::string_view relation_id, std::string_view source_id,
                           std::string_view target_id) const {
    return triples.count(Triple{std::string(relation_id), std::string(source_id),
                                std::string(target_id)}) != 0;
}

std::size_t GroundTruth::count_for(std::string_view relation_id) const {
    return static_cast<std::size_t>(
        std::count_if(triples.begin(), triples.end(),
                      [&](const Triple& t) { return t.relation_id == relation_id; }));
}

std::string truth_to_json(const GroundTruth& truth) {
    ordered_json doc;
    doc["triples"] = ordered_json::array();
    for (const auto& triple : truth.triples) {
        doc["triples"].push_back(ordered_json{{"relation_id", triple.relation_id},
                                              {"source_id", triple.source_id},
                                              {"target_id", triple.target_id}});
    }
    return doc.dump(2) + "\n";
}

GroundTruth parse_truth(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw MalformedCatalog(std::string("ground truth: invalid JSON: ") + e.what());
    }
    GroundTruth truth;
    try {
        for (const auto& t : doc.at("triples")) {
            truth.triples.insert(Triple{t.at("relation_id").get<std::string>(),
                                        t.at("source_id").get<std::string>(),
                                        t.at("target_id").get<std::string>()});
        }
    } catch (const json::exception& e) {
        throw MalformedCatalog(std::string("ground truth: unexpected shape: ") + e.what());
    }
    return truth;
}

GroundTruth load_truth(const std::filesystem::path& path) {
    return parse_truth(util::read_file(path));
}

void save_truth(const GroundTruth& truth, const std::filesystem::path& path) {
    util::write_file_atomic(path, truth_to_json(truth));
}

void validate_params(const GenParams& params) {
    if (params.tree_depth < 2) {
        throw InvalidParams("tree_depth must be at least 2, got " +
                            std::to_string(params.tree_depth));
    }
    if (params.branching < 1) {
        throw InvalidParams("branching must be positive");
    }
    if (params.sources_count < 1) {
        throw InvalidParams("sources_count must be positive");
    }
    if (params.targets_count < 8) {
        throw InvalidParams("targets_count must be at least 8 to hold the guaranteed "
                            "seed entities, got " +
                            std::to_string(params.targets_count));
    }
    if (params.synonym_rate < 0.0 || params.synonym_rate > 1.0 || params.detail_rate < 0.0 ||
        params.detail_rate > 1.0) {
        throw InvalidParams("synonym_rate and detail_rate must lie in [0, 1]");
    }
}

namespace {

Taxonomy build_forest(const Vocabulary& vocabulary, const GenParams& params) {
    Taxonomy tax;
    auto add_node = [&tax](TaxonomyNode node) -> std::size_t {
        tax.by_key.emplace(node.key, tax.nodes.size());
        tax.nodes.push_back(std::move(node));
        return tax.nodes.size() - 1;
    };

    for (const auto& family : vocabulary) {
        TaxonomyNode root;
        root.key = family.name;
        root.family = family.name;
        root.depth = 0;
        root.synonyms = {family.name};
        root.path = {root.key};
        const std::size_t root_index = add_node(root);

        // Depth 1: one subtype per noun group, bounded by the branching factor.
        std::vector<std::size_t> level;
        const std::size_t noun_count = std::min(params.branching, family.nouns.size());
        for (std::size_t n = 0; n < noun_count; ++n) {
            TaxonomyNode node;
            node.family = family.name;
            node.depth = 1;
            node.parent = tax.nodes[root_index].key;
            node.synonyms = family.nouns[n];
            node.key = family.name + "/" + node.synonyms.front();
            node.path = {family.name, node.key};
            const std::size_t owner_index = add_node(node);
            level.push_back(owner_index);
            const std::string owner_key = tax.nodes[owner_index].key;

            // Parts edges live on depth-1 nodes; part instances inherit from
            // there to every subtype below.
            for (const auto& part : family.parts) {
                TaxonomyNode part_node;
                part_node.family = family.name;
                part_node.depth = 2;
                part_node.is_part = true;
                part_node.owner = owner_key;
                part_node.key = owner_key + "#" + part;
                for (const auto& owner_synonym : tax.nodes[owner_index].synonyms) {
                    part_node.synonyms.push_back(owner_synonym + " " + part);
                }
                part_node.path = tax.nodes[owner_index].path;
                const std::string part_key = part_node.key;
                add_node(std::move(part_node));
                tax.nodes[owner_index].part_keys.push_back(part_key);
            }
        }

        // Deeper levels: qualifier prefixes on the parent's surface forms.
        for (std::size_t depth = 2; depth < params.tree_depth; ++depth) {
            std::vector<std::size_t> next_level;
            const std::size_t child_count =
                std::min(params.branching, family.qualifiers.size());
            for (std::size_t p = 0; p < level.size(); ++p) {
                const std::string parent_key = tax.nodes[level[p]].key;
                for (std::size_t c = 0; c < child_count; ++c) {
                    const std::string& qualifier =
                        family.qualifiers[(p + c) % family.qualifiers.size()];
                    const TaxonomyNode& parent = tax.nodes[tax.by_key[parent_key]];
                    TaxonomyNode node;
                    node.family = family.name;
                    node.depth = depth;
                    node.parent = parent.key;
                    for (const auto& parent_synonym : parent.synonyms) {
                        node.synonyms.push_back(qualifier + " " + parent_synonym);
                    }
                    node.key = parent.key + "/" + node.synonyms.front();
                    node.path = parent.path;
                    node.path.push_back(node.key);
                    next_level.push_back(add_node(node));
                }
            }
            level = std::move(next_level);
        }
    }

    for (const auto& family : vocabulary) {
        for (const auto& slot : family.slots) {
            tax.slots.emplace_back(family.name, slot);
        }
    }
    return tax;
}

std::string render_instance(const Taxonomy& tax, const TaxonomyNode& node,
                            const std::map<std::string, std::string>& details,
                            std::size_t synonym_index) {
    std::string out;
    for (const auto& [family, slot] : tax.slots) {
        if (family != node.family) {
            continue;
        }
        auto it = details.find(slot.name);
        if (it != details.end()) {
            out += it->second;
            out += ' ';
        }
    }
    out += node.synonyms[synonym_index % node.synonyms.size()];
    return out;
}

/// The generation rules, shared across all (source, target) pairs.
std::vector<std::string> relations_for(const Taxonomy& tax, const EntityMeta& source,
                                       const EntityMeta& target) {
    const TaxonomyNode& sn = tax.node(source.node_key);
    const TaxonomyNode& tn = tax.node(target.node_key);
    std::vector<std::string> out;
    if (sn.is_part) {
        return out;
    }
    if (tn.is_part) {
        if (tn.owner == sn.key || tax.is_proper_ancestor(tn.owner, sn.key)) {
            out.emplace_back(kComponentId);
        }
        return out;
    }
    if (sn.key == tn.key) {
        if (target.details == source.details) {
            out.emplace_back(kExactId);
        }
        if (target.details.empty() && !source.details.empty()) {
            out.emplace_back(kGeneralId);
        }
        bool extra = false;
        bool conflict = false;
        for (const auto& [slot, value] : target.details) {
            auto it = source.details.find(slot);
            if (it == source.details.end()) {
                extra = true;
            } else if (it->second != value) {
                conflict = true;
            }
        }
        if (extra) {
            out.emplace_back(kAdditionalId);
        }
        if (conflict) {
            out.emplace_back(kWrongId);
        }
    } else if (target.details.empty() && tax.is_proper_ancestor(tn.key, sn.key)) {
        out.emplace_back(kGeneralId);
    }
    return out;
}

struct InstancePools {
    std::vector<std::string> source_nodes; // non-part, depth >= 1
    std::vector<std::string> target_nodes; // non-part, any depth
    std::vector<std::string> part_nodes;
};

InstancePools collect_pools(const Taxonomy& tax) {
    InstancePools pools;
    for (const auto& node : tax.nodes) {
        if (node.is_part) {
            pools.part_nodes.push_back(node.key);
        } else {
            pools.target_nodes.push_back(node.key);
            if (node.depth >= 1) {
                pools.source_nodes.push_back(node.key);
            }
        }
    }
    return pools;
}

std::map<std::string, std::string> random_details(const Taxonomy& tax,
                                                  const std::string& family,
                                                  double detail_rate, util::Rng& rng) {
    std::map<std::string, std::string> details;
    for (const auto& [slot_family, slot] : tax.slots) {
        if (slot_family != family) {
            continue;
        }
        if (rng.chance(detail_rate)) {
            details[slot.name] = slot.values[rng.below(slot.values.size())];
        }
    }
    return details;
}

std::size_t random_synonym(const TaxonomyNode& node, double synonym_rate, util::Rng& rng) {
    if (node.synonyms.size() < 2 || !rng.chance(synonym_rate)) {
        return 0;
    }
    return 1 + rng.below(node.synonyms.size() - 1);
}

} // namespace

SyntheticCorpus generate_taxonomy(const Vocabulary& vocabulary, const GenParams& params) {
    validate_params(params);
    validate_vocabulary(vocabulary);

    SyntheticCorpus corpus;
    corpus.taxonomy = build_forest(vocabulary, params);
    const Taxonomy& tax = corpus.taxonomy;
    const InstancePools pools = collect_pools(tax);
    util::Rng rng(util::mix_seed(params.seed, util::fnv1a64("taxonomy-corpus")));

    corpus.sources.name = "sources";
    corpus.sources.schema = {"name", "category"};
    corpus.targets.name = "targets";
    corpus.targets.schema = {"name", "category"};

    auto add_record = [&](core::EntityTable& table, const std::string& id,
                          const std::string& node_key,
                          std::map<std::string, std::string> details,
                          std::size_t synonym_index) {
        const TaxonomyNode& node = tax.node(node_key);
        core::EntityRecord record;
        record.id = id;
        record.attributes = {{"name", render_instance(tax, node, details, synonym_index)},
                             {"category", node.family}};
        table.records.push_back(std::move(record));
        corpus.meta.emplace(id, EntityMeta{node_key, std::move(details)});
    };

    // Seed block: one source and seven targets on the first family's first
    // subtype pin down every relation plus a two-relation overlap pair.
    const FamilySpec& family0 = vocabulary.front();
    const std::string anchor = family0.name + "/" + family0.nouns.front().front();
    const TaxonomyNode& anchor_node = tax.node(anchor);
    const SlotSpec& slot_a = family0.slots[0];
    const SlotSpec& slot_b = family0.slots[1];
    const std::string& a0 = slot_a.values[0];
    const std::string& a1 = slot_a.values[1];
    const std::string& b0 = slot_b.values[0];

    add_record(corpus.sources, "s1", anchor, {{slot_a.name, a0}}, 0);
    // t1 both adds a detail and contradicts one: the overlap pair.
    add_record(corpus.targets, "t1", anchor, {{slot_a.name, a1}, {slot_b.name, b0}}, 0);
    add_record(corpus.targets, "t2", anchor, {{slot_a.name, a0}}, 1);
    add_record(corpus.targets, "t3", anchor, {}, 0);
    add_record(corpus.targets, "t4", anchor_node.parent, {}, 0);
    add_record(corpus.targets, "t5", anchor, {{slot_a.name, a0}, {slot_b.name, b0}}, 0);
    add_record(corpus.targets, "t6", anchor, {{slot_a.name, a1}}, 0);
    add_record(corpus.targets, "t7", anchor_node.part_keys.front(), {}, 0);

    for (std::size_t i = corpus.sources.records.size(); i < params.sources_count; ++i) {
        const std::string& node_key = rng.pick(pools.source_nodes);
        const TaxonomyNode& node = tax.node(node_key);
        auto details = random_details(tax, node.family, params.detail_rate, rng);
        add_record(corpus.sources, "s" + std::to_string(i + 1), node_key, std::move(details),
                   random_synonym(node, params.synonym_rate, rng));
    }

    constexpr double kPartRate = 0.12;
    for (std::size_t i = corpus.targets.records.size(); i < params.targets_count; ++i) {
        const std::string id = "t" + std::to_string(i + 1);
        if (!pools.part_nodes.empty() && rng.chance(kPartRate)) {
            const std::string& node_key = rng.pick(pools.part_nodes);
            const TaxonomyNode& node = tax.node(node_key);
            add_record(corpus.targets, id, node_key, {},
                       random_synonym(node, params.synonym_rate, rng));
        } else {
            const std::string& node_key = rng.pick(pools.target_nodes);
            const TaxonomyNode& node = tax.node(node_key);
            auto details = random_details(tax, node.family, params.detail_rate, rng);
            add_record(corpus.targets, id, node_key, std::move(details),
                       random_synonym(node, params.synonym_rate, rng));
        }
    }

    for (const auto& source : corpus.sources.records) {
        const EntityMeta& sm = corpus.meta.at(source.id);
        for (const auto& target : corpus.targets.records) {
            const EntityMeta& tm = corpus.meta.at(target.id);
            for (const auto& relation_id : relations_for(tax, sm, tm)) {
                corpus.truth.triples.insert(Triple{relation_id, source.id, target.id});
            }
        }
    }
    return corpus;
}

namespace {

void corpus_check(bool ok, const std::string& message) {
    if (!ok) {
        throw InvalidParams("corpus validation: " + message);
    }
}

/// Walks the parent chain explicitly; deliberately not is_proper_ancestor so
/// the validator does not share code with the generator.
bool chain_has_ancestor(const Taxonomy& tax, const std::string& key,
                        const std::string& candidate) {
    std::string current = tax.node(key).parent;
    while (!current.empty()) {
        if (current == candidate) {
            return true;
        }
        current = tax.node(current).parent;
    }
    return false;
}

std::set<std::string> expected_relations(const Taxonomy& tax, const EntityMeta& sm,
                                         const EntityMeta& tm) {
    std::set<std::string> expected;
    const TaxonomyNode& sn = tax.node(sm.node_key);
    const TaxonomyNode& tn = tax.node(tm.node_key);
    if (sn.is_part) {
        return expected;
    }

    if (tn.is_part) {
        const bool owner_on_chain =
            tn.owner == sn.key || chain_has_ancestor(tax, sn.key, tn.owner);
        if (owner_on_chain) {
            expected.insert(std::string(kComponentId));
        }
        return expected;
    }

    const bool same_node = sn.key == tn.key;
    if (same_node && sm.details == tm.details) {
        expected.insert(std::string(kExactId));
    }
    const bool target_bare = tm.details.empty();
    if (target_bare &&
        ((same_node && !sm.details.empty()) || chain_has_ancestor(tax, sn.key, tn.key))) {
        expected.insert(std::string(kGeneralId));
    }
    if (same_node) {
        for (const auto& [slot, value] : tm.details) {
            auto it = sm.details.find(slot);
            if (it == sm.details.end()) {
                expected.insert(std::string(kAdditionalId));
            } else if (it->second != value) {
                expected.insert(std::string(kWrongId));
            }
        }
    }
    return expected;
}

} // namespace

void validate_corpus(const SyntheticCorpus& corpus) {
    const Taxonomy& tax = corpus.taxonomy;

    std::unordered_set<std::string> ids;
    std::unordered_map<std::string, EntityMeta> text_meta;
    for (const core::EntityTable* table : {&corpus.sources, &corpus.targets}) {
        for (const auto& record : table->records) {
            corpus_check(ids.insert(record.id).second, "duplicate id '" + record.id + "'");
            auto it = corpus.meta.find(record.id);
            corpus_check(it != corpus.meta.end(), "record '" + record.id + "' has no meta");
            corpus_check(tax.contains(it->second.node_key),
                         "record '" + record.id + "' references unknown node");
            const std::string* name = record.attribute("name");
            corpus_check(name != nullptr && !name->empty(),
                         "record '" + record.id + "' has no name");
            auto [existing, inserted] = text_meta.emplace(*name, it->second);
            corpus_check(inserted || existing->second == it->second,
                         "rendered text '" + *name + "' is ambiguous");
        }
    }

    std::set<Triple> expected;
    for (const auto& source : corpus.sources.records) {
        const EntityMeta& sm = corpus.meta.at(source.id);
        for (const auto& target : corpus.targets.records) {
            const EntityMeta& tm = corpus.meta.at(target.id);
            for (const auto& relation_id : expected_relations(tax, sm, tm)) {
                expected.insert(Triple{relation_id, source.id, target.id});
            }
        }
    }
    corpus_check(expected == corpus.truth.triples,
                 "ground truth disagrees with the rule re-check");

    for (const auto& relation_id :
         {kExactId, kGeneralId, kAdditionalId, kWrongId, kComponentId}) {
        corpus_check(corpus.truth.count_for(relation_id) > 0,
                     "relation '" + std::string(relation_id) + "' never occurs");
    }

    std::map<std::pair<std::string, std::string>, std::size_t> per_pair;
    bool overlap = false;
    for (const auto& triple : corpus.truth.triples) {
        if (++per_pair[{triple.source_id, triple.target_id}] >= 2) {
            overlap = true;
        }
    }
    corpus_check(overlap, "no (source, target) pair carries two relations");
}

} // namespace relmatch::harness
