#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "moser/grid.hpp"

namespace moser {

struct MaximizeOptions {
  int max_iters = 40000;
  double tol = 1e-12;       ///< relative value improvement considered a stall
  int stall_iters = 40;     ///< consecutive stalled iterations before stopping
  double step0 = 0.5;
  int seeds = 5;            ///< multi-start count (first seed is the bubble shape)
  std::uint64_t seed = 1234;
  int record_every = 50;    ///< iteration-log stride
};

struct IterRecord {
  int iter;
  double value;
  double norm_residual;
  double c_k;
};

/// Constrained maximizer of int Phi(beta |u|^{n/(n-1)}) dx over the unit
/// Sobolev sphere of H^{1,n}_0(B_R), radial nonincreasing profiles.
struct MaximizerResult {
  RadialFunction u;          ///< nonnegative, nonincreasing, unit Sobolev norm
  double beta = 0.0;
  double R = 0.0;
  double value = 0.0;        ///< functional at u
  double c_k = 0.0;          ///< u(0)
  double lambda_k = 0.0;     ///< int u^{n/(n-1)} Phi'(beta u^{n/(n-1)}) dx
  double el_residual = 0.0;  ///< weak Euler-Lagrange residual (see el_residual)
  int iterations = 0;
  bool converged = false;
  std::uint64_t seed = 0;

  std::vector<double> seed_values;  ///< best value per start
  double value_spread = 0.0;        ///< max - min over the starts
  std::vector<IterRecord> log;      ///< iteration log of the winning start
};

/// Projected ascent on the unit Sobolev sphere: ascend the weak-form
/// gradient of the functional projected against the constraint gradient
/// (preconditioned by the linearized n-Laplacian, which keeps graded grids
/// tractable), renormalize, rearrange to nonincreasing form, with Armijo
/// backtracking on the functional.  Runs opts.seeds independent starts
/// (bubble-shaped seed plus random ones) and returns the best; ties are
/// broken by the lower Euler-Lagrange residual.
///
/// Requires 0 < beta <= alpha_n (the supremum is infinite beyond) and a grid
/// whose outer radius is R.
MaximizerResult maximize_on_ball(const DimensionContext& ctx, double R, double beta,
                                 GridPtr grid, const MaximizeOptions& opts = {});

/// lambda = int u^{n/(n-1)} Phi'(beta u^{n/(n-1)}) dx (positive for u != 0).
double lagrange_multiplier(const DimensionContext& ctx, const RadialFunction& u,
                           double beta);

/// Weak residual of
///   -div |grad u|^{n-2} grad u + u^{n-1} = u^{1/(n-1)} Phi'(beta u^{n/(n-1)}) / lambda
/// against a family of compactly supported radial bumps, each normalized by
/// its Sobolev norm; the integrals use midpoint-refined quadrature, so the
/// residual keeps shrinking under grid refinement.
double el_residual(const DimensionContext& ctx, const MaximizerResult& result);

/// Blow-up diagnostics of a converged maximizer.
struct BlowupDiagnostics {
  double r_k = 0.0;          ///< concentration scale, r_k^n = lambda / (c^{n/(n-1)} e^{beta c^{n/(n-1)}})
  RadialFunction w_rescaled; ///< (n/(n-1)) beta c^{1/(n-1)} (u(r_k x) - c) on B_L
  double bubble_distance = 0.0;  ///< sup_{B_L} |w_rescaled - w|
  double core_mass = 0.0;        ///< int_{B_{L r_k}} u^{n/(n-1)} Phi'(...)/lambda dx
  std::map<double, double> truncation_energy;  ///< A -> Sobolev energy of min(u, c/A)
  bool under_resolved = false;   ///< L r_k reaches below the resolved core
};

BlowupDiagnostics blowup_diagnostics(const DimensionContext& ctx,
                                     const MaximizerResult& result, double L);

/// Trend classification of a maximizer schedule.
enum class Dichotomy { BoundedPeak, BlowUp };

struct DichotomyReport {
  Dichotomy classification = Dichotomy::BoundedPeak;
  std::vector<double> c_ks;
  std::vector<double> values;
  std::vector<double> lambda_over_c;
  std::vector<double> scaled_u_at_half;  ///< c_k^{1/(n-1)} u_k(1/2), Green comparison hook
  bool values_nondecreasing = false;
  bool lambda_over_c_increasing = false;
};

/// Classifies a run along an (R_k, beta_k) schedule as bounded-peak (c_k
/// plateau; candidate extremal) or blow-up (c_k growing).  Purely
/// diagnostic; throws on empty input.
DichotomyReport dichotomy_report(const DimensionContext& ctx,
                                 const std::vector<MaximizerResult>& sequence);

}  // namespace moser
