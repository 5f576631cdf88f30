#include "relmatch/resolve/cascade.hpp"

#include "relmatch/errors.hpp"

#include <algorithm>
#include <set>

namespace relmatch::resolve {

std::vector<std::string> select_within_rank(const core::RelationSpec& relation,
                                            std::vector<std::string> confirmed,
                                            const std::map<std::string, double>& distances) {
    std::sort(confirmed.begin(), confirmed.end());
    confirmed.erase(std::unique(confirmed.begin(), confirmed.end()), confirmed.end());
    if (confirmed.empty()) {
        return confirmed;
    }
    if (relation.multiplicity == core::Multiplicity::many) {
        return confirmed;
    }

    const std::string* best = nullptr;
    double best_distance = 0.0;
    for (const auto& id : confirmed) {
        auto it = distances.find(id);
        if (it == distances.end()) {
            throw MissingDistance("no retrieval distance recorded for confirmed target '" + id +
                                  "' of relation '" + relation.id + "'");
        }
        // Ids are visited in ascending order, so strict < keeps the smallest
        // id among equal distances.
        if (best == nullptr || it->second < best_distance) {
            best = &id;
            best_distance = it->second;
        }
    }
    return {*best};
}

core::ResolvedMatch resolve(const std::string& source_id,
                            const std::vector<core::RelationVerdict>& verdicts,
                            const std::map<std::string, double>& distances,
                            const core::RelationCatalog& catalog) {
    core::validate_catalog(catalog);

    std::map<std::string, std::set<std::string>> confirmed_by_relation;
    for (const auto& verdict : verdicts) {
        if (verdict.source_id == source_id && verdict.decision) {
            confirmed_by_relation[verdict.relation_id].insert(verdict.target_id);
        }
    }

    core::ResolvedMatch match;
    match.source_id = source_id;
    for (const core::RelationSpec* relation : catalog.by_priority()) {
        auto it = confirmed_by_relation.find(relation->id);
        if (it == confirmed_by_relation.end() || it->second.empty()) {
            continue;
        }
        std::vector<std::string> confirmed(it->second.begin(), it->second.end());
        const std::size_t confirmed_count = confirmed.size();
        match.target_ids = select_within_rank(*relation, std::move(confirmed), distances);
        match.relation_id = relation->id;
        if (relation->multiplicity == core::Multiplicity::many) {
            match.status = core::MatchStatus::component_only;
            match.selection_reason =
                "relation '" + relation->id + "' (rank " +
                std::to_string(relation->priority_rank) + ") confirmed " +
                std::to_string(confirmed_count) +
                (confirmed_count == 1 ? " component target" : " component targets");
        } else {
            match.status = core::MatchStatus::resolved;
            match.selection_reason =
                "relation '" + relation->id + "' (rank " +
                std::to_string(relation->priority_rank) + ") confirmed " +
                std::to_string(confirmed_count) +
                (confirmed_count == 1 ? " target"
                                      : " targets; kept the nearest by retrieval distance");
        }
        return match;
    }

    match.status = core::MatchStatus::unresolved;
    match.selection_reason = "no relation confirmed any retrieved target";
    return match;
}

} // namespace relmatch::resolve
