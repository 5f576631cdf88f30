#pragma once

#include "relmatch/harness/taxonomy.hpp"
#include "relmatch/index/embedding.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace relmatch::harness {

/// Coordinate assignment for one taxonomy: one axis per family, per non-root
/// node, per part node and per detail slot. Stable for a fixed taxonomy.
struct EmbeddingLayout {
    std::map<std::string, std::size_t> family_axis;
    std::map<std::string, std::size_t> node_axis; // non-part nodes, depth >= 1
    std::map<std::string, std::size_t> part_axis;
    std::map<std::string, std::size_t> slot_axis; // "<family>:<slot>"
    std::size_t dimension = 0;
};

EmbeddingLayout make_layout(const Taxonomy& taxonomy);

/// Structure-aware embedding of one generated entity: 1.0 on the family axis
/// and on every node of the entity's root path, 0.8 on the part axis for part
/// instances, (value ordinal + 1) * 0.2 per filled detail slot, plus per-text
/// noise of at most 0.02 per coordinate seeded by the rendered text. Entities
/// of one node land strictly closer together than any pair from unrelated
/// subtrees; the margin is asserted by measure_separation, not assumed.
/// Throws UnknownNode when the entity's node is not in the taxonomy.
index::EmbeddingVector mock_embed(const EntityMeta& meta, const std::string& rendered_text,
                                  const Taxonomy& taxonomy, const EmbeddingLayout& layout,
                                  std::uint64_t seed);
index::EmbeddingVector mock_embed(const EntityMeta& meta, const std::string& rendered_text,
                                  const Taxonomy& taxonomy, std::uint64_t seed);

/// Text-keyed provider over a generated corpus: every record's serialized
/// form is embedded up front; embed() is a pure lookup. Unknown text throws
/// UnknownNode.
class MockCorpusProvider : public index::EmbeddingProvider {
public:
    MockCorpusProvider(const SyntheticCorpus& corpus, std::uint64_t seed);

    std::string id() const override;
    std::size_t dimension() const override { return dimension_; }
    index::EmbeddingVector embed(const std::string& text) override;

private:
    std::uint64_t seed_;
    std::size_t dimension_ = 0;
    std::map<std::string, index::EmbeddingVector> by_text_;
};

/// Measured closeness guarantee over a corpus: the largest distance between
/// two instances of one node versus the smallest distance between entities
/// whose subtrees are unrelated (neither chain prefixes the other).
struct SeparationReport {
    double max_intra_node = 0.0;
    double min_cross_subtree = 0.0;
    std::size_t intra_pairs = 0;
    std::size_t cross_pairs = 0;

    bool ok() const { return intra_pairs > 0 && cross_pairs > 0 && max_intra_node < min_cross_subtree; }
};

SeparationReport measure_separation(const SyntheticCorpus& corpus, std::uint64_t seed);

} // namespace relmatch::harness
