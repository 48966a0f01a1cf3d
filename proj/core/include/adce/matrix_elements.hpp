#pragma once

// Matrix elements between dressed states, evaluated directly in the canonical
// subspace basis.

#include "adce/dressed.hpp"

namespace adce {

/// <lower| a sigma_{k,k+1} |upper>, lower in subspace m, upper in subspace m + 2.
double lowering_element(int k, const DressedState& lower, const DressedState& upper);

/// <t| sigma_{k,k} |s> for states of the same subspace.
double projector_element(int k, const DressedState& t, const DressedState& s);

/// <t| (a sigma_{k+1,k} + a^dagger sigma_{k,k+1}) |s> for states of the same subspace.
double coupling_element(int k, const DressedState& t, const DressedState& s);

}  // namespace adce
