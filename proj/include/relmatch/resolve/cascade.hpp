#pragma once

#include "relmatch/core/relation.hpp"
#include "relmatch/core/verdict.hpp"

#include <map>
#include <string>
#include <vector>

namespace relmatch::resolve {

/// Picks the winning targets inside one rank. A single-multiplicity relation
/// selects the nearest confirmed target, breaking distance ties by ascending
/// id, and throws MissingDistance when a confirmed target has no recorded
/// retrieval distance. A one-to-many relation keeps every confirmed target in
/// ascending id order.
std::vector<std::string> select_within_rank(const core::RelationSpec& relation,
                                            std::vector<std::string> confirmed,
                                            const std::map<std::string, double>& distances);

/// The relation-priority cascade for one source entity. Relations are walked
/// by ascending priority rank; the first rank with at least one confirmed
/// target decides the outcome. Single-multiplicity winners resolve to exactly
/// one target; one-to-many winners keep all confirmed targets with status
/// component_only. When no rank confirms anything the source is unresolved.
///
/// `verdicts` may span several sources; only rows matching source_id count.
/// Verdicts for relation ids outside the catalog are ignored.
core::ResolvedMatch resolve(const std::string& source_id,
                            const std::vector<core::RelationVerdict>& verdicts,
                            const std::map<std::string, double>& distances,
                            const core::RelationCatalog& catalog);

} // namespace relmatch::resolve
