#pragma once

#include <optional>
#include <string>
#include <vector>

namespace relmatch::core {

/// Where a classification answer came from.
struct Provenance {
    enum class Kind { remote_model, oracle, cache };

    Kind kind = Kind::oracle;
    std::string model_name; // set for remote_model

    static Provenance remote(std::string model) {
        return {Kind::remote_model, std::move(model)};
    }
    static Provenance oracle() { return {Kind::oracle, {}}; }
    static Provenance cache() { return {Kind::cache, {}}; }

    bool operator==(const Provenance&) const = default;
};

/// One evaluation of a (relation, source, target) triple. Relations are not
/// mutually exclusive: several verdicts with decision=true may exist for the
/// same (source, target) under different relations.
struct RelationVerdict {
    std::string relation_id;
    std::string source_id;
    std::string target_id;
    bool decision = false;
    std::string rationale;
    Provenance provenance;

    bool operator==(const RelationVerdict&) const = default;
};

enum class MatchStatus { resolved, component_only, unresolved };

std::string to_string(MatchStatus s);

/// Outcome of the relation-priority cascade for one source entity.
struct ResolvedMatch {
    std::string source_id;
    MatchStatus status = MatchStatus::unresolved;
    std::optional<std::string> relation_id;
    std::vector<std::string> target_ids; // exactly one unless the relation is one-to-many
    std::string selection_reason;

    bool operator==(const ResolvedMatch&) const = default;
};

} // namespace relmatch::core
