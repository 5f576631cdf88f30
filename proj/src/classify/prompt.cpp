#include "relmatch/classify/prompt.hpp"

#include "relmatch/errors.hpp"
#include "relmatch/index/embedding.hpp"

namespace relmatch::classify {

namespace {

// Note the trailing space on the "2." line; the template is fixed
// byte-for-byte and golden-file tests depend on it.
constexpr std::string_view kRelationTemplate =
    "Task: Decide input & output entity relation.\n"
    "Data: The input entity: {input_entity_row}\n"
    "The output entities: {output_entity_rows}\n"
    "Relation: {relation_description_with_example}\n"
    "Steps:\n"
    "1. Repeat input entity and relation.\n"
    "2. Go through each output entity. \n"
    "Reason if it has the relation to input entity.\n"
    "After reasoning, output a line \"VERDICTS:\" followed by one line per output entity: \"<entity_id>: YES\" or \"<entity_id>: NO\".\n";

constexpr std::string_view kNaiveTemplate =
    "Task: Decide if the input entity and each output entity match.\n"
    "Data: The input entity: {input_entity_row}\n"
    "The output entities: {output_entity_rows}\n"
    "Definition: An output entity matches when it refers to exactly the same real-world entity as the input entity.\n"
    "Steps:\n"
    "1. Repeat the input entity.\n"
    "2. Go through each output entity. \n"
    "Reason if it matches (refers to exactly the same entity as) the input entity.\n"
    "After reasoning, output a line \"VERDICTS:\" followed by one line per output entity: \"<entity_id>: YES\" or \"<entity_id>: NO\".\n";

std::string replace_once(std::string text, std::string_view placeholder, std::string_view value) {
    auto pos = text.find(placeholder);
    if (pos == std::string::npos) {
        throw Error("prompt template is missing placeholder " + std::string(placeholder));
    }
    text.replace(pos, placeholder.size(), value);
    return text;
}

std::string render_candidate_lines(const std::vector<core::EntityRecord>& candidates) {
    std::string out;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (i > 0) out += '\n';
        out += std::to_string(i + 1);
        out += ". [";
        out += candidates[i].id;
        out += "] ";
        out += index::serialize_entity(candidates[i]);
    }
    return out;
}

ClassificationRequest fill(std::string_view tmpl, const core::EntityRecord& source,
                           const std::vector<core::EntityRecord>& candidates,
                           std::string relation_id, std::string_view relation_clause,
                           const std::string& model_hint) {
    if (candidates.empty()) {
        throw Error("build_prompt requires at least one candidate");
    }

    std::string prompt = replace_once(std::string(tmpl), "{input_entity_row}",
                                      index::serialize_entity(source));
    prompt = replace_once(std::move(prompt), "{output_entity_rows}",
                          render_candidate_lines(candidates));
    if (!relation_clause.empty()) {
        prompt = replace_once(std::move(prompt), "{relation_description_with_example}",
                              relation_clause);
    }

    ClassificationRequest request;
    request.prompt = std::move(prompt);
    request.source_id = source.id;
    request.relation_id = std::move(relation_id);
    for (const auto& c : candidates) {
        request.candidate_ids.push_back(c.id);
    }
    request.model_hint = model_hint;
    return request;
}

} // namespace

std::string_view relation_prompt_template() { return kRelationTemplate; }
std::string_view naive_prompt_template() { return kNaiveTemplate; }

std::string render_relation_clause(const core::RelationSpec& relation) {
    std::string out = relation.display_name;
    out += ": ";
    out += relation.description;
    for (const auto& ex : relation.examples) {
        out += " E.g., input \"";
        out += ex.source_text;
        out += "\", output \"";
        out += ex.target_text;
        out += "\": ";
        out += ex.explanation;
    }
    return out;
}

ClassificationRequest build_prompt(const core::EntityRecord& source,
                                   const std::vector<core::EntityRecord>& candidates,
                                   const core::RelationSpec& relation,
                                   const std::string& model_hint) {
    return fill(kRelationTemplate, source, candidates, relation.id,
                render_relation_clause(relation), model_hint);
}

ClassificationRequest build_naive_prompt(const core::EntityRecord& source,
                                         const std::vector<core::EntityRecord>& candidates,
                                         const std::string& model_hint) {
    return fill(kNaiveTemplate, source, candidates, std::string(kNaiveRelationId), {},
                model_hint);
}

} // namespace relmatch::classify
