#pragma once

#include "relmatch/errors.hpp"

#include <string>

namespace relmatch::classify {

/// Adaptive retrieval knobs: fetch candidates in pages of `k`; keep fetching
/// while at least `continuation_threshold` of the last batch was confirmed
/// for the relation, up to `max_batches` pages.
struct RetrievalPolicy {
    std::size_t k = 10;
    double continuation_threshold = 0.30;
    std::size_t max_batches = 5;
};

inline void validate_policy(const RetrievalPolicy& policy) {
    if (policy.k < 1) {
        throw InvalidPolicy("k must be >= 1, got " + std::to_string(policy.k));
    }
    if (policy.continuation_threshold < 0.0 || policy.continuation_threshold > 1.0) {
        throw InvalidPolicy("continuation_threshold must be in [0, 1], got " +
                            std::to_string(policy.continuation_threshold));
    }
    if (policy.max_batches < 1) {
        throw InvalidPolicy("max_batches must be >= 1, got " +
                            std::to_string(policy.max_batches));
    }
}

} // namespace relmatch::classify
