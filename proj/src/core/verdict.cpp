#include "relmatch/core/verdict.hpp"

namespace relmatch::core {

std::string to_string(MatchStatus s) {
    switch (s) {
    case MatchStatus::resolved: return "resolved";
    case MatchStatus::component_only: return "component_only";
    case MatchStatus::unresolved: return "unresolved";
    }
    return "unresolved";
}

} // namespace relmatch::core
