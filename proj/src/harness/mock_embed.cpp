#include "relmatch/harness/mock_embed.hpp"

#include "relmatch/errors.hpp"
#include "relmatch/util/hash.hpp"
#include "relmatch/util/rng.hpp"

#include <algorithm>
#include <limits>

namespace relmatch::harness {

EmbeddingLayout make_layout(const Taxonomy& taxonomy) {
    EmbeddingLayout layout;
    std::size_t next = 0;
    for (const auto& node : taxonomy.nodes) {
        if (node.depth == 0) {
            layout.family_axis.emplace(node.key, next++);
        } else if (node.is_part) {
            layout.part_axis.emplace(node.key, next++);
        } else {
            layout.node_axis.emplace(node.key, next++);
        }
    }
    for (const auto& [family, slot] : taxonomy.slots) {
        layout.slot_axis.emplace(family + ":" + slot.name, next++);
    }
    layout.dimension = next;
    return layout;
}

index::EmbeddingVector mock_embed(const EntityMeta& meta, const std::string& rendered_text,
                                  const Taxonomy& taxonomy, const EmbeddingLayout& layout,
                                  std::uint64_t seed) {
    const TaxonomyNode& node = taxonomy.node(meta.node_key);
    std::vector<double> coords(layout.dimension, 0.0);

    coords[layout.family_axis.at(node.family)] = 1.0;
    for (const auto& path_key : node.path) {
        auto it = layout.node_axis.find(path_key);
        if (it != layout.node_axis.end()) {
            coords[it->second] = 1.0;
        }
    }
    if (node.is_part) {
        coords[layout.part_axis.at(node.key)] = 0.8;
    }
    for (const auto& [slot_family, slot] : taxonomy.slots) {
        if (slot_family != node.family) {
            continue;
        }
        auto it = meta.details.find(slot.name);
        if (it == meta.details.end()) {
            continue;
        }
        const auto pos = std::find(slot.values.begin(), slot.values.end(), it->second);
        if (pos == slot.values.end()) {
            throw UnknownNode("detail value '" + it->second + "' is not in slot '" + slot.name +
                              "'");
        }
        const auto ordinal = static_cast<double>(pos - slot.values.begin());
        coords[layout.slot_axis.at(slot_family + ":" + slot.name)] = (ordinal + 1.0) * 0.2;
    }

    util::Rng rng(util::mix_seed(util::fnv1a64(rendered_text), seed));
    index::EmbeddingVector vector;
    vector.values.reserve(coords.size());
    for (const double base : coords) {
        vector.values.push_back(static_cast<float>(base + rng.symmetric() * 0.02));
    }
    return vector;
}

index::EmbeddingVector mock_embed(const EntityMeta& meta, const std::string& rendered_text,
                                  const Taxonomy& taxonomy, std::uint64_t seed) {
    return mock_embed(meta, rendered_text, taxonomy, make_layout(taxonomy), seed);
}

MockCorpusProvider::MockCorpusProvider(const SyntheticCorpus& corpus, std::uint64_t seed)
    : seed_(seed) {
    const EmbeddingLayout layout = make_layout(corpus.taxonomy);
    dimension_ = layout.dimension;
    for (const core::EntityTable* table : {&corpus.sources, &corpus.targets}) {
        for (const auto& record : table->records) {
            by_text_.emplace(index::serialize_entity(record),
                             mock_embed(corpus.meta.at(record.id),
                                        index::serialize_entity(record), corpus.taxonomy,
                                        layout, seed_));
        }
    }
}

std::string MockCorpusProvider::id() const {
    return "mock-taxonomy:seed=" + std::to_string(seed_) +
           ":dim=" + std::to_string(dimension_);
}

index::EmbeddingVector MockCorpusProvider::embed(const std::string& text) {
    auto it = by_text_.find(text);
    if (it == by_text_.end()) {
        throw UnknownNode("text is not part of the generated corpus: " + text);
    }
    return it->second;
}

namespace {

struct Chain {
    std::vector<std::string> keys; // root path, plus own key for parts
    std::string node_key;
    bool is_part = false;
};

bool prefixes(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.size() > b.size()) {
        return false;
    }
    return std::equal(a.begin(), a.end(), b.begin());
}

} // namespace

SeparationReport measure_separation(const SyntheticCorpus& corpus, std::uint64_t seed) {
    const EmbeddingLayout layout = make_layout(corpus.taxonomy);
    std::vector<Chain> chains;
    std::vector<index::EmbeddingVector> vectors;
    for (const core::EntityTable* table : {&corpus.sources, &corpus.targets}) {
        for (const auto& record : table->records) {
            const EntityMeta& meta = corpus.meta.at(record.id);
            const TaxonomyNode& node = corpus.taxonomy.node(meta.node_key);
            Chain chain;
            chain.keys = node.path;
            if (node.is_part) {
                chain.keys.push_back(node.key);
            }
            chain.node_key = node.key;
            chain.is_part = node.is_part;
            chains.push_back(std::move(chain));
            vectors.push_back(mock_embed(meta, index::serialize_entity(record),
                                         corpus.taxonomy, layout, seed));
        }
    }

    SeparationReport report;
    report.min_cross_subtree = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        for (std::size_t j = i + 1; j < vectors.size(); ++j) {
            const double distance = index::euclidean_distance(vectors[i], vectors[j]);
            const bool same_node =
                !chains[i].is_part && !chains[j].is_part &&
                chains[i].node_key == chains[j].node_key;
            if (same_node) {
                report.max_intra_node = std::max(report.max_intra_node, distance);
                ++report.intra_pairs;
            } else if (!prefixes(chains[i].keys, chains[j].keys) &&
                       !prefixes(chains[j].keys, chains[i].keys)) {
                report.min_cross_subtree = std::min(report.min_cross_subtree, distance);
                ++report.cross_pairs;
            }
        }
    }
    if (report.cross_pairs == 0) {
        report.min_cross_subtree = 0.0;
    }
    return report;
}

} // namespace relmatch::harness
