#include "relmatch/harness/oracle.hpp"

#include "relmatch/classify/prompt.hpp"

namespace relmatch::harness {

std::string render_chat_reply(const classify::ClassificationRequest& request,
                              const std::function<bool(const std::string&)>& confirms) {
    std::string reply = "Input entity " + request.source_id + " under relation '" +
                        request.relation_id + "'.\n";
    for (const auto& candidate : request.candidate_ids) {
        reply += "Candidate " + candidate +
                 (confirms(candidate) ? ": the relation holds.\n"
                                      : ": the relation does not hold.\n");
    }
    reply += "VERDICTS:\n";
    for (const auto& candidate : request.candidate_ids) {
        reply += candidate + (confirms(candidate) ? ": YES\n" : ": NO\n");
    }
    return reply;
}

OracleBackend::OracleBackend(GroundTruth truth, std::string naive_alias)
    : truth_(std::move(truth)), naive_alias_(std::move(naive_alias)) {}

std::string OracleBackend::id() const { return "oracle:v1"; }

classify::BackendResponse OracleBackend::complete(const classify::ClassificationRequest& request) {
    const std::string& relation =
        request.relation_id == classify::kNaiveRelationId ? naive_alias_ : request.relation_id;
    auto confirms = [&](const std::string& candidate) {
        return truth_.contains(relation, request.source_id, candidate);
    };
    return classify::BackendResponse{render_chat_reply(request, confirms),
                                     core::Provenance::oracle()};
}

} // namespace relmatch::harness
