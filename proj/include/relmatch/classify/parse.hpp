#pragma once

#include "relmatch/classify/backend.hpp"
#include "relmatch/classify/prompt.hpp"
#include "relmatch/core/verdict.hpp"

#include <vector>

namespace relmatch::classify {

/// Extracts one verdict per candidate from a backend reply. The decision for
/// each candidate comes from the final `VERDICTS:` block (`<id>: YES` /
/// `<id>: NO` lines, any order); the chain-of-thought text before the block
/// becomes the shared rationale. Output order follows request.candidate_ids.
///
/// Throws ParseError (carrying the raw reply) when the block is missing, an
/// id is unknown, duplicated or missing, or a token is not YES/NO. Never
/// returns a partial verdict list.
std::vector<core::RelationVerdict> parse_response(const BackendResponse& response,
                                                  const ClassificationRequest& request);

} // namespace relmatch::classify
