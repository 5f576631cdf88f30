#pragma once

#include "relmatch/index/embedding.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace relmatch::index {

/// One page of the candidate ranking for a probe, ascending by distance with
/// ties broken by ascending entity id. Distances are Euclidean (square root
/// applied).
struct CandidateBatch {
    std::size_t batch_index = 0;
    std::vector<std::pair<std::string, double>> candidates;

    bool operator==(const CandidateBatch&) const = default;
};

/// Exact nearest-neighbor index over the target table: a linear scan with a
/// total, deterministic ordering. Immutable once built.
class VectorIndex {
public:
    using Entry = std::pair<std::string, EmbeddingVector>;

    /// Throws EmptyInput, DimensionMismatch or DuplicateId.
    static VectorIndex build(std::vector<Entry> entries);

    std::size_t dimension() const { return dimension_; }
    std::size_t size() const { return entries_.size(); }
    const std::vector<Entry>& entries() const { return entries_; }

    /// Entries ranked [offset, offset+k) of the full distance ordering; fewer
    /// than k when the index is exhausted. Throws DimensionMismatch when the
    /// probe width differs.
    CandidateBatch query_topk(const EmbeddingVector& probe, std::size_t k,
                              std::size_t offset = 0) const;

    bool operator==(const VectorIndex&) const = default;

private:
    VectorIndex() = default;

    std::size_t dimension_ = 0;
    std::vector<Entry> entries_;
};

/// Binary persistence. Layout: magic "RELMIDX1"; u32 LE dimension; u32 LE
/// entry count; per entry u16 LE id length, id bytes, dimension f32 LE values.
void save_index(const VectorIndex& index, const std::filesystem::path& path);
/// Throws IoFailure when unreadable, CorruptIndex on bad magic, truncation,
/// trailing bytes, duplicate ids or non-finite values.
VectorIndex load_index(const std::filesystem::path& path);

} // namespace relmatch::index
