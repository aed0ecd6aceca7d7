#pragma once

#include <utility>
#include <vector>

#include "moser/green.hpp"
#include "moser/grid.hpp"

namespace moser {

// ---------------------------------------------------------------------------
// Blow-up bubble  w(r) = -n log(1 + c_n r^{n/(n-1)})
// ---------------------------------------------------------------------------

/// w(0) = 0, strictly decreasing, and int_{R^n} e^w dx = 1.
double bubble(const DimensionContext& ctx, double r);

/// int_{B_R} e^w dx by adaptive quadrature; tends to 1 as R grows.
double bubble_mass(const DimensionContext& ctx, double R);

/// Max over interior grid nodes of the residual of
///   -(r^{n-1} |w'|^{n-2} w')' / r^{n-1} = (n alpha_n / (n-1))^{n-1} e^w,
/// relative to the local source magnitude, with centered differences.
double bubble_pde_residual(const DimensionContext& ctx, const RadialGrid& grid);

// ---------------------------------------------------------------------------
// Moser sequence (plateau + truncated logarithm), unit Dirichlet energy
// ---------------------------------------------------------------------------

/// eps(c) with eps^n = e^{-alpha_n c^{n/(n-1)}}.
double moser_eps(const DimensionContext& ctx, double c);

/// The profile equal to c on [0, L eps], n log(L/r) / (alpha_n c^{1/(n-1)})
/// on [L eps, L] and 0 outside, sampled on the given grid.  Continuous at
/// both joints and of unit Dirichlet energy up to discretization error.
/// The grid must resolve the plateau: its first positive node has to lie at
/// or below L*eps(c).
RadialFunction moser_function(const DimensionContext& ctx, double c,
                              double L_outer, GridPtr grid);

/// Grid adapted to one Moser profile: nodes exactly at the two joints,
/// geometric fill of the log branch at ratio e^{dlog}.
RadialGrid moser_grid(const DimensionContext& ctx, double c, double L_outer,
                      double dlog = 0.02);

/// Union grid adapted to a whole c-schedule (every joint is a node).
RadialGrid sharpness_grid(const DimensionContext& ctx,
                          const std::vector<double>& c_schedule, double L_outer,
                          double dlog = 0.02);

/// tm_functional(normalize(moser_function(c)), alpha) along the schedule.
/// Diverges along the schedule for alpha > alpha_n (sharpness), stays
/// bounded for alpha <= alpha_n.  Values come from the log-domain evaluation
/// when they overflow; entries are then capped (see TmValue).
std::vector<TmValue> sharpness_experiment(const DimensionContext& ctx, double alpha,
                                          const std::vector<double>& c_schedule,
                                          GridPtr grid);

/// The subcritical uniform bound controls the functional relative to the
/// n-norm mass, so the banded quantity along a schedule is
///   tm_functional(u_c, alpha) / int |u_c|^n dx,   u_c normalized.
/// (The raw values decay like int u^n ~ 1/c^{n/(n-1)} even subcritically.)
std::vector<double> sharpness_ratio_experiment(const DimensionContext& ctx,
                                               double alpha,
                                               const std::vector<double>& c_schedule,
                                               GridPtr grid);

// ---------------------------------------------------------------------------
// Test function 1: bubble core glued to the Green function (all n >= 2)
// ---------------------------------------------------------------------------

struct Test1Params {
  double eps = 0.0;
  double L = 0.0;          ///< -log eps
  double C = 0.0;          ///< gluing height, root of the normalization relation
  double Lambda_eps = 0.0; ///< inner shift, from the exact matching condition
  double A = 0.0;          ///< Green constant used
  double phi_hat = 0.0;    ///< computed normalization defect (second pass)
  double C_first = 0.0;    ///< first-pass root (phi = 0)
  double norm_first = 0.0; ///< Sobolev norm^n of the first-pass profile
  double norm_residual = 0.0;  ///< |sobolev_norm^n - 1| of the final profile
  double matching_residual = 0.0;  ///< |inner(L eps) - outer(L eps)|
};

/// Solves -alpha_n t^{n/(n-1)} + [-(n-1)H_{n-1} + alpha_n A + log(omega/n)
/// - log eps^n + phi] = 0 by bisection on the bracket
/// [(-(1/(2 alpha_n)) log eps^n)^{(n-1)/n}, (-(2/alpha_n) log eps^n)^{(n-1)/n}].
/// Throws when the bracket does not change sign (eps not small enough).
double test1_solve_C(const DimensionContext& ctx, double eps, double A,
                     double phi_err = 0.0);

/// Grid adapted to the glued profile (node exactly at L*eps).
RadialGrid test1_grid(const DimensionContext& ctx, double eps,
                      const GreenSolution& green, double dlog = 0.02);

/// Builds the glued profile
///   C - [(n-1) log(1 + c_n (r/eps)^{n/(n-1)}) + Lambda_eps]/(alpha_n C^{1/(n-1)})
/// on [0, L eps] and G(r)/C^{1/(n-1)} outside, iterating the C-solve twice:
/// first with phi = 0, then with phi estimated from the first pass's
/// normalization defect.  Lambda_eps is chosen so the two branches match
/// exactly at r = L eps.
std::pair<RadialFunction, Test1Params> test1_build(const DimensionContext& ctx,
                                                   double eps,
                                                   const GreenSolution& green,
                                                   GridPtr grid);

/// (value, threshold) with value = tm_functional(normalize(u_eps), alpha_n)
/// and threshold = (omega/n) e^{alpha_n A + H_{n-1}}; value exceeds the
/// threshold for eps small enough.
std::pair<double, double> test1_lower_bound(const DimensionContext& ctx, double eps,
                                            const GreenSolution& green, GridPtr grid);

// ---------------------------------------------------------------------------
// Test function 2: Moser profile with L = b c^{1/(n-2)}  (n > 2 only)
// ---------------------------------------------------------------------------

struct Test2Params {
  double c = 0.0;    ///< plateau height
  double eps = 0.0;  ///< eps^n = e^{-alpha_n c^{n/(n-1)}}
  double b = 0.0;
  double L = 0.0;    ///< b c^{1/(n-2)}
};

/// Validates and completes the parameter set; rejects n = 2.
Test2Params make_test2_params(const DimensionContext& ctx, double c, double b);

/// (value, threshold) with value = tm_functional of the normalized profile at
/// alpha_n and threshold = alpha_n^{n-1}/(n-1)!; exceeds the threshold for c
/// and b large.
std::pair<double, double> test2_ratio(const DimensionContext& ctx,
                                      const Test2Params& params, GridPtr grid);

/// Convenience grid for one test-2 profile.
RadialGrid test2_grid(const DimensionContext& ctx, const Test2Params& params,
                      double dlog = 0.01);

/// Condition (6.1) quantity c^{n/(n-1)} / L^n (must decay along schedules).
double test2_condition(const DimensionContext& ctx, const Test2Params& params);

}  // namespace moser
