#pragma once

#include "relmatch/classify/backend.hpp"
#include "relmatch/classify/cache.hpp"
#include "relmatch/classify/parse.hpp"
#include "relmatch/classify/policy.hpp"
#include "relmatch/classify/prompt.hpp"
#include "relmatch/core/entity.hpp"
#include "relmatch/core/relation.hpp"
#include "relmatch/index/vector_index.hpp"

#include <functional>
#include <map>
#include <memory>
#include <vector>

namespace relmatch::classify {

/// Shared classification environment: backend handle, optional verdict cache
/// and the transport retry schedule.
struct ClassifyEnv {
    ChatBackend* backend = nullptr;
    VerdictCache* cache = nullptr; // may be null: no caching
    RetryPolicy retry;
};

/// Runs one prompt through the cache and backend. On a cache hit the stored
/// verdicts return with provenance=cache and the backend is not called. On a
/// miss the backend is called once (with transport retries), the reply is
/// parsed and stored. An unparseable reply is persisted via the cache's
/// failure store and rethrown as ParseError.
std::vector<core::RelationVerdict> classify_batch(const ClassificationRequest& request,
                                                  const ClassifyEnv& env);

/// Lazily pages the candidate ranking for one probe. Batches are fetched at
/// most once and shared by all relations matched against this source.
class PagedRetriever {
public:
    PagedRetriever(const index::VectorIndex& index, index::EmbeddingVector probe,
                   std::size_t k);

    /// Batch n (offset n*k). Empty when past the end of the index.
    const index::CandidateBatch& batch(std::size_t n);

    /// True when batch n is the last page the index can fill.
    bool exhausted_after(std::size_t n) const;

    std::size_t k() const { return k_; }
    std::size_t batches_fetched() const { return fetched_.size(); }

    /// Every (id, distance) pair fetched so far, in ranking order.
    std::vector<std::pair<std::string, double>> retrieved() const;

private:
    const index::VectorIndex& index_;
    index::EmbeddingVector probe_;
    std::size_t k_;
    std::vector<index::CandidateBatch> fetched_;
};

struct RelationMatchStats {
    std::size_t batches_fetched = 0;
    std::size_t candidates_examined = 0;
    bool failed = false;
    std::string failure; // diagnostic when failed
};

struct RelationMatchResult {
    std::vector<core::RelationVerdict> verdicts;
    RelationMatchStats stats;
};

/// The adaptive retrieval loop for one (source, relation): classify batch 0,
/// then keep fetching while the confirmed fraction of the last batch is at
/// least policy.continuation_threshold, the index is not exhausted, and fewer
/// than policy.max_batches batches were fetched. A failed batch ends the loop
/// with partial results flagged in stats.
RelationMatchResult match_relation(const core::EntityRecord& source,
                                   const core::RelationSpec& relation,
                                   PagedRetriever& retriever,
                                   const core::EntityTable& targets,
                                   const RetrievalPolicy& policy,
                                   const ClassifyEnv& env);

/// Binary-match baseline over a fixed candidate list; verdicts carry
/// relation_id "match".
std::vector<core::RelationVerdict> naive_match(const core::EntityRecord& source,
                                               const std::vector<core::EntityRecord>& candidates,
                                               const ClassifyEnv& env);

struct SourceOutcome {
    std::string source_id;
    /// (target_id, distance) pairs in ranking order, union of fetched batches.
    std::vector<std::pair<std::string, double>> retrieved;
    /// Keyed by relation id.
    std::map<std::string, RelationMatchResult> by_relation;
};

struct RunOutcome {
    /// One outcome per source record, in source-table order.
    std::vector<SourceOutcome> sources;

    /// All verdicts in canonical order: source-table order, then relation
    /// priority rank, then retrieval rank.
    std::vector<core::RelationVerdict> all_verdicts(const core::RelationCatalog& catalog) const;

    std::size_t failed_pairs() const;
    std::size_t total_pairs() const;
};

/// Maps a source record to its probe vector (provider-backed or precomputed).
using ProbeFn = std::function<index::EmbeddingVector(const core::EntityRecord&)>;

/// Runs match_relation for every (source record, relation) pair. Candidate
/// batches are retrieved once per source and shared across relations. Pair
/// failures are recorded in stats; the run itself never aborts. `jobs` bounds
/// the number of source entities processed concurrently; output is canonical
/// regardless of schedule.
RunOutcome match_all(const core::EntityTable& sources, const core::EntityTable& targets,
                     const index::VectorIndex& target_index,
                     const core::RelationCatalog& catalog, const RetrievalPolicy& policy,
                     const ClassifyEnv& env, const ProbeFn& probe_fn,
                     std::size_t jobs = 1);

} // namespace relmatch::classify
