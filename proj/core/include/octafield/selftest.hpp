#pragma once

#include <string>
#include <vector>

#include "octafield/types.hpp"

namespace octa {

struct SelfTestCheck {
  std::string name;
  bool passed = false;
  double error = 0.0;      // worst observed deviation
  double tolerance = 0.0;
};

struct SelfTestResult {
  std::vector<SelfTestCheck> checks;
  bool all_passed() const;
};

// Embedded analytic oracle suite: quadrature identities for the band-4
// algebra, finite-difference checks of the network derivatives, and
// brute-force equivalence of the distance metrics. corrupt_x90 perturbs the
// x-rotation constant feeding the homomorphism check (negative control).
SelfTestResult run_selftest(bool corrupt_x90 = false);

// All 24 rotations of the octahedral symmetry group.
std::vector<Mat3> octahedral_group();

}  // namespace octa
