#pragma once

#include "relmatch/classify/matcher.hpp"
#include "relmatch/classify/policy.hpp"
#include "relmatch/core/relation.hpp"
#include "relmatch/core/verdict.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace relmatch::pipeline {

struct EntityReport {
    std::string source_id;
    core::ResolvedMatch resolution;
    std::map<std::string, std::vector<core::RelationVerdict>> verdicts_by_relation;
    std::map<std::string, classify::RelationMatchStats> stats_by_relation;
    std::vector<std::pair<std::string, double>> retrieved; // ranking order
};

/// Configuration echo placed at the top of every report so a report is
/// interpretable on its own. Holds no paths and no timing, keeping rerun
/// output byte-identical.
struct RunConfigEcho {
    std::size_t source_rows = 0;
    std::size_t target_rows = 0;
    std::vector<std::string> relations; // by priority rank
    classify::RetrievalPolicy policy;
    std::string backend_id;
    std::string provider_id;
    std::size_t index_rows = 0;
    std::size_t index_dimension = 0;
};

struct MatchReport {
    RunConfigEcho run;
    std::vector<EntityReport> entities; // source-table order
};

/// Assembles the report from a finished run. Verdicts inside one relation
/// keep retrieval order; relations are keyed by id.
MatchReport build_report(const RunConfigEcho& run, const classify::RunOutcome& outcome,
                         const std::vector<core::ResolvedMatch>& resolutions);

/// Canonical JSON form. Key order is fixed; verdict rationales are emitted
/// once per (relation, batch) rather than per candidate.
nlohmann::ordered_json report_to_json(const MatchReport& report);

/// One-line-per-source human summary.
std::string report_to_text(const MatchReport& report);

/// Writes report.json and report.txt into `dir` atomically.
void write_report(const MatchReport& report, const std::filesystem::path& dir);

} // namespace relmatch::pipeline
