#include "relmatch/pipeline/report.hpp"

#include "relmatch/util/fs.hpp"

#include <algorithm>

namespace relmatch::pipeline {

using nlohmann::ordered_json;

MatchReport build_report(const RunConfigEcho& run, const classify::RunOutcome& outcome,
                         const std::vector<core::ResolvedMatch>& resolutions) {
    MatchReport report;
    report.run = run;
    report.entities.reserve(outcome.sources.size());
    for (std::size_t i = 0; i < outcome.sources.size(); ++i) {
        const classify::SourceOutcome& source = outcome.sources[i];
        EntityReport entity;
        entity.source_id = source.source_id;
        entity.resolution = resolutions.at(i);
        entity.retrieved = source.retrieved;
        for (const auto& [relation_id, result] : source.by_relation) {
            entity.verdicts_by_relation[relation_id] = result.verdicts;
            entity.stats_by_relation[relation_id] = result.stats;
        }
        report.entities.push_back(std::move(entity));
    }
    return report;
}

namespace {

ordered_json resolution_to_json(const core::ResolvedMatch& resolution) {
    ordered_json doc;
    doc["status"] = core::to_string(resolution.status);
    doc["relation_id"] =
        resolution.relation_id ? ordered_json(*resolution.relation_id) : ordered_json(nullptr);
    doc["target_ids"] = resolution.target_ids;
    doc["selection_reason"] = resolution.selection_reason;
    return doc;
}

ordered_json verdicts_to_json(const std::vector<core::RelationVerdict>& verdicts) {
    ordered_json rows = ordered_json::array();
    ordered_json rationales = ordered_json::array();
    std::string last_rationale;
    bool first = true;
    for (const auto& verdict : verdicts) {
        rows.push_back(ordered_json{{"target_id", verdict.target_id},
                                    {"decision", verdict.decision}});
        if (first || verdict.rationale != last_rationale) {
            rationales.push_back(verdict.rationale);
            last_rationale = verdict.rationale;
            first = false;
        }
    }
    return ordered_json{{"verdicts", rows}, {"rationales", rationales}};
}

} // namespace

ordered_json report_to_json(const MatchReport& report) {
    ordered_json doc;
    doc["run"] = {
        {"source_rows", report.run.source_rows},
        {"target_rows", report.run.target_rows},
        {"relations", report.run.relations},
        {"policy",
         {{"k", report.run.policy.k},
          {"continuation_threshold", report.run.policy.continuation_threshold},
          {"max_batches", report.run.policy.max_batches}}},
        {"backend", report.run.backend_id},
        {"index",
         {{"provider", report.run.provider_id},
          {"rows", report.run.index_rows},
          {"dimension", report.run.index_dimension}}},
    };
    doc["entities"] = ordered_json::array();
    for (const auto& entity : report.entities) {
        ordered_json e;
        e["source_id"] = entity.source_id;
        e["resolutions"] = resolution_to_json(entity.resolution);
        e["verdicts_by_relation"] = ordered_json::object();
        for (const auto& relation_id : report.run.relations) {
            auto it = entity.verdicts_by_relation.find(relation_id);
            if (it != entity.verdicts_by_relation.end()) {
                e["verdicts_by_relation"][relation_id] = verdicts_to_json(it->second);
            }
        }
        ordered_json retrieved = ordered_json::array();
        for (const auto& [target_id, distance] : entity.retrieved) {
            retrieved.push_back(ordered_json::array({target_id, distance}));
        }
        ordered_json stats;
        stats["retrieved"] = std::move(retrieved);
        stats["by_relation"] = ordered_json::object();
        ordered_json failed = ordered_json::array();
        for (const auto& relation_id : report.run.relations) {
            auto it = entity.stats_by_relation.find(relation_id);
            if (it == entity.stats_by_relation.end()) {
                continue;
            }
            const classify::RelationMatchStats& s = it->second;
            stats["by_relation"][relation_id] = {
                {"batches_fetched", s.batches_fetched},
                {"candidates_examined", s.candidates_examined},
                {"failed", s.failed},
            };
            if (s.failed) {
                failed.push_back(ordered_json{{"relation_id", relation_id},
                                              {"error", s.failure}});
            }
        }
        stats["failed_relations"] = std::move(failed);
        e["stats"] = std::move(stats);
        doc["entities"].push_back(std::move(e));
    }
    return doc;
}

std::string report_to_text(const MatchReport& report) {
    std::size_t resolved = 0;
    std::size_t component_only = 0;
    std::size_t unresolved = 0;
    std::size_t failed = 0;
    for (const auto& entity : report.entities) {
        switch (entity.resolution.status) {
        case core::MatchStatus::resolved: ++resolved; break;
        case core::MatchStatus::component_only: ++component_only; break;
        case core::MatchStatus::unresolved: ++unresolved; break;
        }
        for (const auto& [relation_id, stats] : entity.stats_by_relation) {
            (void)relation_id;
            if (stats.failed) {
                ++failed;
            }
        }
    }

    std::string text;
    text += "relation match report\n";
    text += "sources: " + std::to_string(report.run.source_rows) +
            "  targets: " + std::to_string(report.run.target_rows) +
            "  backend: " + report.run.backend_id + "\n";
    text += "resolved: " + std::to_string(resolved) +
            "  component-only: " + std::to_string(component_only) +
            "  unresolved: " + std::to_string(unresolved) +
            "  failed pairs: " + std::to_string(failed) + "\n\n";
    for (const auto& entity : report.entities) {
        text += entity.source_id;
        switch (entity.resolution.status) {
        case core::MatchStatus::resolved:
        case core::MatchStatus::component_only: {
            text += " -> ";
            for (std::size_t i = 0; i < entity.resolution.target_ids.size(); ++i) {
                if (i > 0) {
                    text += ",";
                }
                text += entity.resolution.target_ids[i];
            }
            text += " [" + entity.resolution.relation_id.value_or("?") + "]";
            break;
        }
        case core::MatchStatus::unresolved:
            text += " unresolved";
            break;
        }
        text += "\n";
    }
    return text;
}

void write_report(const MatchReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    util::write_file_atomic(dir / "report.json", report_to_json(report).dump(2) + "\n");
    util::write_file_atomic(dir / "report.txt", report_to_text(report));
}

} // namespace relmatch::pipeline
