#pragma once

#include <utility>

#include "moser/grid.hpp"

namespace moser {

/// Decreasing radial rearrangement of a nonnegative profile.
///
/// The profile is treated as the atomic measure sum_i W_i delta_{r_i} of its
/// quadrature rule.  The (value, mass) atoms are sorted by value and
/// re-deposited from r = 0 outward at the centroid radii of the equal-mass
/// bands, on a transport grid carrying the original masses.  Every integral
/// of the form sum_i W_i h(f_i) is therefore preserved exactly, and
/// super-level-set volumes match within one cell's volume.  An input that is
/// already nonincreasing is returned unchanged.
///
/// Throws std::invalid_argument on negative input.
RadialFunction decreasing_rearrangement(const RadialFunction& f);

/// Dirichlet energies (before, after) rearrangement.
///
/// `before` is the energy of the piecewise-linear interpolant of f (what
/// dirichlet_energy computes).  `after` is the exact energy of the
/// decreasing rearrangement of that same interpolant, evaluated through the
/// level-set formula
///   E* = omega^n int rho(t)^{n(n-1)} / |mu'(t)|^{n-1} dt,
/// where mu(t) = |{f > t}| and rho(t) is the radius with |B_rho| = mu(t).
/// (A nodal resampling of the rearranged profile would smear its jumps and
/// is useless for an energy comparison.)  For profiles vanishing at the
/// outer radius the inequality after <= before holds up to the
/// level-quadrature tolerance; a positive boundary value voids it, since
/// super-level sets touching the boundary sphere beat the centered ball in
/// relative perimeter.
std::pair<double, double> polya_szego_check(const RadialFunction& f);

}  // namespace moser
