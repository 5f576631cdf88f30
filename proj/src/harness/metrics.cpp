#include "relmatch/harness/metrics.hpp"

namespace relmatch::harness {

MetricsReport compute_metrics(const std::vector<core::RelationVerdict>& verdicts,
                              const GroundTruth& truth,
                              const std::map<std::string, std::set<std::string>>& retrieved_by_source) {
    using Pair = std::pair<std::string, std::string>; // (source, target)
    std::map<std::string, std::set<Pair>> truth_pairs;
    for (const auto& triple : truth.triples) {
        truth_pairs[triple.relation_id].insert({triple.source_id, triple.target_id});
    }
    std::map<std::string, std::set<Pair>> predicted;
    std::map<std::string, std::set<Pair>> examined;
    for (const auto& verdict : verdicts) {
        const Pair pair{verdict.source_id, verdict.target_id};
        examined[verdict.relation_id].insert(pair);
        if (verdict.decision) {
            predicted[verdict.relation_id].insert(pair);
        }
    }

    std::set<std::string> relation_ids;
    for (const auto& [id, pairs] : truth_pairs) {
        (void)pairs;
        relation_ids.insert(id);
    }
    for (const auto& [id, pairs] : examined) {
        (void)pairs;
        relation_ids.insert(id);
    }

    MetricsReport report;
    for (const auto& relation_id : relation_ids) {
        RelationMetrics m;
        const auto& truths = truth_pairs[relation_id];
        const auto& preds = predicted[relation_id];
        const auto& seen = examined[relation_id];
        m.truth_pairs = truths.size();
        m.predicted_pairs = preds.size();
        for (const auto& pair : preds) {
            if (truths.count(pair) != 0) {
                ++m.true_positives;
            }
        }
        for (const auto& pair : truths) {
            if (seen.count(pair) != 0) {
                ++m.examined_truth_pairs;
            }
        }
        if (m.predicted_pairs > 0) {
            m.precision = static_cast<double>(m.true_positives) /
                          static_cast<double>(m.predicted_pairs);
        }
        m.recall = m.truth_pairs == 0 ? 0.0
                                      : static_cast<double>(m.true_positives) /
                                            static_cast<double>(m.truth_pairs);
        if (m.precision) {
            const double denom = *m.precision + m.recall;
            m.f1 = denom == 0.0 ? 0.0 : 2.0 * *m.precision * m.recall / denom;
        }
        if (m.examined_truth_pairs > 0) {
            m.retrieval_bounded_recall = static_cast<double>(m.true_positives) /
                                         static_cast<double>(m.examined_truth_pairs);
        }
        report.by_relation.emplace(relation_id, m);
    }

    report.truth_triples = truth.triples.size();
    for (const auto& triple : truth.triples) {
        auto it = retrieved_by_source.find(triple.source_id);
        if (it != retrieved_by_source.end() && it->second.count(triple.target_id) != 0) {
            ++report.retrieved_truth_triples;
        }
    }
    report.retrieval_recall =
        report.truth_triples == 0
            ? 1.0
            : static_cast<double>(report.retrieved_truth_triples) /
                  static_cast<double>(report.truth_triples);
    return report;
}

namespace {

nlohmann::ordered_json number_or_na(const std::optional<double>& value) {
    if (value) {
        return *value;
    }
    return "n/a";
}

} // namespace

nlohmann::ordered_json metrics_to_json(const MetricsReport& report) {
    nlohmann::ordered_json doc;
    doc["relations"] = nlohmann::ordered_json::object();
    for (const auto& [relation_id, m] : report.by_relation) {
        doc["relations"][relation_id] = {
            {"truth_pairs", m.truth_pairs},
            {"predicted_pairs", m.predicted_pairs},
            {"true_positives", m.true_positives},
            {"examined_truth_pairs", m.examined_truth_pairs},
            {"precision", number_or_na(m.precision)},
            {"recall", m.recall},
            {"f1", number_or_na(m.f1)},
            {"retrieval_bounded_recall", number_or_na(m.retrieval_bounded_recall)},
        };
    }
    doc["retrieval"] = {
        {"truth_triples", report.truth_triples},
        {"retrieved_truth_triples", report.retrieved_truth_triples},
        {"recall", report.retrieval_recall},
    };
    return doc;
}

} // namespace relmatch::harness
