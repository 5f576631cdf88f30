#pragma once

#include "relmatch/core/verdict.hpp"
#include "relmatch/harness/taxonomy.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace relmatch::harness {

/// Pair-level scores for one relation. Optionals left empty mean the value is
/// undefined for this run and is reported as "n/a".
struct RelationMetrics {
    std::size_t truth_pairs = 0;
    std::size_t predicted_pairs = 0;     // verdicts with decision = true
    std::size_t true_positives = 0;
    std::size_t examined_truth_pairs = 0; // truth pairs the classifier saw
    std::optional<double> precision;      // empty when nothing was predicted
    double recall = 0.0;
    std::optional<double> f1;             // empty when precision is
    std::optional<double> retrieval_bounded_recall; // empty w/o examined truth
};

struct MetricsReport {
    std::map<std::string, RelationMetrics> by_relation;
    std::size_t truth_triples = 0;
    std::size_t retrieved_truth_triples = 0;
    double retrieval_recall = 1.0; // over triples; 1.0 for empty truth
};

/// Scores one run. Precision/recall/F1 are computed over (source, target)
/// pairs per relation; a pair counts as examined when any verdict for it
/// exists, as predicted when a verdict confirms it. Retrieval-bounded recall
/// restricts the recall denominator to examined truth pairs. Retrieval recall
/// is the fraction of truth triples whose target appears in the retrieved set
/// of its source.
MetricsReport compute_metrics(const std::vector<core::RelationVerdict>& verdicts,
                              const GroundTruth& truth,
                              const std::map<std::string, std::set<std::string>>& retrieved_by_source);

nlohmann::ordered_json metrics_to_json(const MetricsReport& report);

} // namespace relmatch::harness
