#include "relmatch/classify/parse.hpp"

#include "relmatch/errors.hpp"

#include <algorithm>
#include <optional>
#include <unordered_map>

namespace relmatch::classify {

namespace {

std::string_view trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

} // namespace

std::vector<core::RelationVerdict> parse_response(const BackendResponse& response,
                                                  const ClassificationRequest& request) {
    const auto lines = split_lines(response.raw_text);

    // The decisions live in the final VERDICTS: block.
    std::optional<std::size_t> block_start;
    for (std::size_t i = lines.size(); i-- > 0;) {
        if (trim(lines[i]) == "VERDICTS:") {
            block_start = i;
            break;
        }
    }
    if (!block_start) {
        throw ParseError("response has no VERDICTS block", response.raw_text);
    }

    std::unordered_map<std::string, bool> decisions;
    for (std::size_t i = *block_start + 1; i < lines.size(); ++i) {
        const auto line = trim(lines[i]);
        if (line.empty()) continue;
        const auto colon = line.rfind(':');
        if (colon == std::string_view::npos) {
            throw ParseError("malformed verdict line: '" + std::string(line) + "'",
                             response.raw_text);
        }
        const std::string id{trim(line.substr(0, colon))};
        const auto token = trim(line.substr(colon + 1));

        bool decision;
        if (token == "YES") decision = true;
        else if (token == "NO") decision = false;
        else {
            throw ParseError("verdict token for '" + id + "' is not YES/NO: '" +
                             std::string(token) + "'", response.raw_text);
        }
        if (std::find(request.candidate_ids.begin(), request.candidate_ids.end(), id) ==
            request.candidate_ids.end()) {
            throw ParseError("verdict for unknown entity id '" + id + "'",
                             response.raw_text);
        }
        if (!decisions.emplace(id, decision).second) {
            throw ParseError("duplicate verdict for entity id '" + id + "'",
                             response.raw_text);
        }
    }

    // Rationale: everything before the block line, trailing whitespace dropped.
    const std::size_t block_offset =
        static_cast<std::size_t>(lines[*block_start].data() - response.raw_text.data());
    std::string rationale{response.raw_text.substr(0, block_offset)};
    while (!rationale.empty() && (rationale.back() == '\n' || rationale.back() == '\r' ||
                                  rationale.back() == ' ' || rationale.back() == '\t')) {
        rationale.pop_back();
    }

    std::vector<core::RelationVerdict> verdicts;
    verdicts.reserve(request.candidate_ids.size());
    for (const auto& id : request.candidate_ids) {
        auto it = decisions.find(id);
        if (it == decisions.end()) {
            throw ParseError("no verdict for entity id '" + id + "'", response.raw_text);
        }
        core::RelationVerdict v;
        v.relation_id = request.relation_id;
        v.source_id = request.source_id;
        v.target_id = id;
        v.decision = it->second;
        v.rationale = rationale;
        v.provenance = response.provenance;
        verdicts.push_back(std::move(v));
    }
    return verdicts;
}

} // namespace relmatch::classify
