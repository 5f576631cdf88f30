#pragma once

#include "relmatch/core/entity.hpp"
#include "relmatch/core/relation.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace relmatch::classify {

/// Relation id used by the naive binary-match baseline.
inline constexpr std::string_view kNaiveRelationId = "match";

/// One classification unit of work: a rendered prompt plus the structured
/// fields needed to interpret the answer.
struct ClassificationRequest {
    std::string prompt;
    std::string source_id;
    std::string relation_id;
    std::vector<std::string> candidate_ids;
    std::string model_hint;

    bool operator==(const ClassificationRequest&) const = default;
};

/// The relation-classification prompt template. The output-format line at the
/// end is appended to the task template so answers carry a parseable block.
std::string_view relation_prompt_template();

/// The binary-match baseline prompt template.
std::string_view naive_prompt_template();

/// Renders `display_name: description` followed by the relation's worked
/// examples, all on one line.
std::string render_relation_clause(const core::RelationSpec& relation);

/// Fills the relation template. Candidates render one per line as
/// `"<ordinal>. [<id>] <serialized entity>"`. Byte-deterministic: identical
/// inputs always produce identical prompts, which makes the prompt hash a
/// complete cache key.
ClassificationRequest build_prompt(const core::EntityRecord& source,
                                   const std::vector<core::EntityRecord>& candidates,
                                   const core::RelationSpec& relation,
                                   const std::string& model_hint = {});

/// Fills the naive binary-match template; relation_id is "match".
ClassificationRequest build_naive_prompt(const core::EntityRecord& source,
                                         const std::vector<core::EntityRecord>& candidates,
                                         const std::string& model_hint = {});

} // namespace relmatch::classify
