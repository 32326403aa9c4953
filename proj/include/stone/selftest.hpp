#pragma once

#include <string>
#include <vector>

namespace stone {

struct SelfTestCheck {
  std::string name;
  bool passed;
  std::string detail;
};

/// Fast invariant suite: orthogonality, involution, window property at N = 8,
/// gradient adjointness and preview exactness.
std::vector<SelfTestCheck> run_selftest();

}  // namespace stone
