#pragma once

#include "relmatch/classify/backend.hpp"
#include "relmatch/harness/taxonomy.hpp"

#include <functional>
#include <string>

namespace relmatch::harness {

/// Renders a well-formed chat reply for a request: one reasoning line per
/// candidate, then the verdict block. `confirms` decides each candidate id.
std::string render_chat_reply(const classify::ClassificationRequest& request,
                              const std::function<bool(const std::string&)>& confirms);

/// Ground-truth backend: answers YES exactly when (relation, source, target)
/// is a truth triple. Never reads the prompt text; only the structured
/// request fields matter. The naive "match" relation is answered from the
/// exactly-the-same triples.
class OracleBackend : public classify::ChatBackend {
public:
    explicit OracleBackend(GroundTruth truth, std::string naive_alias = std::string(kExactId));

    std::string id() const override;
    classify::BackendResponse complete(const classify::ClassificationRequest& request) override;

private:
    GroundTruth truth_;
    std::string naive_alias_;
};

} // namespace relmatch::harness
