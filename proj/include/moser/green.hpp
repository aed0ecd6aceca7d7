#pragma once

#include <utility>
#include <vector>

#include "moser/grid.hpp"

namespace moser {

/// Options for the Green solver.  `ds` is the relative (logarithmic) step
/// used while r < 1, `dr_far` the absolute step beyond; the shooting bracket
/// on the inner constant starts at [a_lo, a_hi] and is widened if needed.
struct GreenOptions {
  double ds = 0.004;
  double dr_far = 0.004;
  double a_lo = -2.0;
  double a_hi = 2.0;
  int max_bisect = 240;
};

/// Outcome of integrating one shooting trajectory.
enum class GreenEvent {
  Converged,   ///< reached R_max with 0 < G(R_max) < tol
  HitZero,     ///< G reached 0 before R_max (inner constant too small)
  MassExhausted,  ///< running mass reached 1 with G still large (too big)
  TooLargeAtEnd,  ///< G(R_max) >= tol
};

struct GreenTrial {
  GreenEvent event;
  double r_end;
  double g_end;
  double mass_end;
};

/// Radial profile of the Green function of the n-Laplacian plus zero-order
/// term with a unit point mass at the origin, together with the extracted
/// asymptotic constant A of G = -(1/alpha_n) log r^n + A + O(r^n log^n r).
struct GreenSolution {
  int n = 0;
  double A = 0.0;        ///< extrapolated asymptotic constant
  double A_guess = 0.0;  ///< converged shooting parameter (inner data)
  double r_inner = 0.0;
  double R_max = 0.0;
  double tol = 0.0;

  RadialFunction profile;        ///< G at the integration nodes
  std::vector<double> dvalues;   ///< G' at the nodes (from the flux law)
  std::vector<double> deficit;   ///< 1 - int_{B_r} G^{n-1} dx, tabulated

  double flux_residual_max = 0.0;  ///< independent re-check, see solve_green
  double mass_total = 0.0;         ///< int_{B_{R_max}} G^{n-1} dx
  double fit_spread = 0.0;         ///< scatter of the A-extrapolation window
  bool fit_flagged = false;
  int shoot_iterations = 0;

  double value_at(double r) const;
  double deriv_at(double r) const;
  double deficit_at(double r) const;
};

/// Integrates one trajectory of
///   G'(r) = -[(1 - m(r)) / (omega r^{n-1})]^{1/(n-1)},
///   m'(r) = omega r^{n-1} G^{n-1},
/// outward from G(r_inner) = -(n/alpha_n) log r_inner + A_guess, and reports
/// which shooting event terminated it.  The flux form is the unit point mass
/// balance, so no derivative of |G'|^{n-2} G' is ever needed at the
/// singularity.
GreenTrial integrate_green_trial(const DimensionContext& ctx, double A_guess,
                                 double r_inner, double R_max, double tol,
                                 const GreenOptions& opts = {});

/// Shooting solve: bisects the inner constant until G stays positive on
/// [r_inner, R_max] and G(R_max) < tol.  After convergence the running mass
/// is re-integrated from the stored profile with a Hermite-corrected
/// trapezoid rule and flux_residual_max records the worst mismatch
/// |omega (-G')^{n-1} r^{n-1} - (1 - m)| over the nodes.
/// Throws std::runtime_error with a bracket trace when shooting fails.
GreenSolution solve_green(const DimensionContext& ctx, double R_max,
                          double r_inner, double tol,
                          const GreenOptions& opts = {});

/// Extracts A = lim_{r->0} (G(r) + (n/alpha_n) log r) by fitting
/// y(r) = A + K r^n |log r|^n over the innermost nodes.
double green_constant_A(const DimensionContext& ctx, const GreenSolution& sol);

/// (direct, formula) where direct = int_{B_delta^c} (|G'|^n + G^n) dx by
/// quadrature over the stored nodes and formula = G(delta)(1 - int_{B_delta}
/// G^{n-1} dx); the two agree for the true solution.
std::pair<double, double> green_tail_energy(const GreenSolution& sol, double delta);

}  // namespace moser
