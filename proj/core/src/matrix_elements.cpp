#include "adce/matrix_elements.hpp"

#include <cmath>
#include <string>

#include "adce/error.hpp"

namespace adce {

namespace {

void check_level(int k, int max_level) {
  if (k < 0 || k > max_level) throw InvalidArgument("atomic index " + std::to_string(k) + " out of range");
}

}  // namespace

double lowering_element(int k, const DressedState& lower, const DressedState& upper) {
  check_level(k, 2);
  if (upper.m != lower.m + 2) throw InvalidArgument("lowering element needs subspaces m and m + 2");
  if (k == 2) return 0.0;
  // a sigma_{k,k+1} |k+1, m+1-k> = sqrt(m+1-k) |k, m-k>
  const int photons = lower.m + 1 - k;
  if (photons <= 0 || lower.m - k < 0) return 0.0;
  return std::sqrt(static_cast<double>(photons)) * lower.coefficient(k) * upper.coefficient(k + 1);
}

double projector_element(int k, const DressedState& t, const DressedState& s) {
  check_level(k, 2);
  if (t.m != s.m) throw InvalidArgument("projector element needs a common subspace");
  return t.coefficient(k) * s.coefficient(k);
}

double coupling_element(int k, const DressedState& t, const DressedState& s) {
  check_level(k, 2);
  if (t.m != s.m) throw InvalidArgument("coupling element needs a common subspace");
  if (k == 2) return 0.0;
  // a sigma_{k+1,k} |k, m-k> = sqrt(m-k) |k+1, m-k-1>, and its adjoint.
  const int photons = t.m - k;
  if (photons <= 0) return 0.0;
  const double root = std::sqrt(static_cast<double>(photons));
  return root * (t.coefficient(k + 1) * s.coefficient(k) + t.coefficient(k) * s.coefficient(k + 1));
}

}  // namespace adce
