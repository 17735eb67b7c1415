#pragma once

#include <vector>

#include "jtree/graph.hpp"

namespace fixtures {

inline jtree::JacobiGraph theta3() { return jtree::build_theta(3, 1.0, 0.0); }

inline jtree::JacobiGraph c1() {
  const double a[] = {1.0}, b[] = {0.0};
  return jtree::build_cycle(1, a, b);
}

inline jtree::JacobiGraph c2() {
  const double a[] = {1.0, 1.0}, b[] = {1.0, -1.0};
  return jtree::build_cycle(2, a, b);
}

inline jtree::JacobiGraph c3() {
  const double a[] = {1.0, 2.0, 3.0}, b[] = {0.0, 0.0, 0.0};
  return jtree::build_cycle(3, a, b);
}

inline jtree::JacobiGraph k23() { return jtree::build_complete_bipartite(2, 3, 1.0, 0.0); }

}  // namespace fixtures
