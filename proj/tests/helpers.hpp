#ifndef ATTRITION_TESTS_HELPERS_HPP
#define ATTRITION_TESTS_HELPERS_HPP

#include <string>

#include "attrition/grid.hpp"
#include "attrition/rational.hpp"

namespace attrition::testing {

inline Rat rat(const std::string& text) { return parse_rational(text); }

/// The ladder used across the tests: prior 1/2, precision 3/4, bounds 1/5 and
/// 4/5. The reachable odds ladder snaps outward to {1/10, 1/4, 1/2, 3/4, 9/10},
/// three interior points with the prior in the middle.
inline BeliefGrid bench_grid() {
    return build_grid(rat("1/2"), rat("1/5"), rat("4/5"), rat("3/4"));
}

}  // namespace attrition::testing

#endif
