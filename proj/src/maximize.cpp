#include "moser/maximize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <stdexcept>

#include "moser/profiles.hpp"

namespace moser {

namespace {

struct Problem {
  const DimensionContext* ctx;
  const RadialGrid* grid;
  double beta;
  double p;  // n/(n-1)

  double functional(const std::vector<double>& u) const {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
      if (u[i] > 0.0)
        s += grid->weight(i) * phi(*ctx, beta * std::pow(u[i], p));
    return s;
  }

  double norm_pow(const std::vector<double>& u) const {
    const int n = ctx->n;
    double e = 0.0;
    for (std::size_t c = 0; c < grid->cells(); ++c) {
      double s = (u[c + 1] - u[c]) / (grid->node(c + 1) - grid->node(c));
      e += grid->cell_moment(c) * std::pow(std::fabs(s), n);
    }
    for (std::size_t i = 0; i < u.size(); ++i)
      e += grid->weight(i) * std::pow(std::fabs(u[i]), n);
    return e;
  }

  void grad_functional(const std::vector<double>& u, std::vector<double>& g) const {
    g.assign(u.size(), 0.0);
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (u[i] <= 0.0) continue;
      double t = beta * std::pow(u[i], p);
      g[i] = grid->weight(i) * beta * p * std::pow(u[i], p - 1.0) * phi_prime(*ctx, t);
    }
  }

  // weak form of the constraint gradient against nodal hats:
  // n [ m_{c-1} sgn|s|^{n-2} s / h  (right node)  -  ... (left node) ] + n W u^{n-1}
  void grad_norm(const std::vector<double>& u, std::vector<double>& g) const {
    const int n = ctx->n;
    g.assign(u.size(), 0.0);
    for (std::size_t c = 0; c < grid->cells(); ++c) {
      double h = grid->node(c + 1) - grid->node(c);
      double s = (u[c + 1] - u[c]) / h;
      double sig = std::pow(std::fabs(s), n - 2) * s;
      double t = n * grid->cell_moment(c) * sig / h;
      g[c] -= t;
      g[c + 1] += t;
    }
    for (std::size_t i = 0; i < u.size(); ++i)
      g[i] += n * grid->weight(i) * std::pow(std::fabs(u[i]), n - 2) * u[i];
  }
};

// Tridiagonal SPD preconditioner: linearized n-Laplacian + zero-order term.
struct Tridiag {
  std::vector<double> lower, diag, upper;

  void assemble(const Problem& pb, const std::vector<double>& u) {
    const RadialGrid& g = *pb.grid;
    const int n = pb.ctx->n;
    const std::size_t M = u.size();
    lower.assign(M, 0.0);
    diag.assign(M, 0.0);
    upper.assign(M, 0.0);
    double smax = 1e-300;
    for (std::size_t c = 0; c < g.cells(); ++c) {
      double s = std::fabs(u[c + 1] - u[c]) / (g.node(c + 1) - g.node(c));
      smax = std::max(smax, s);
    }
    for (std::size_t c = 0; c < g.cells(); ++c) {
      double h = g.node(c + 1) - g.node(c);
      double s = std::fabs(u[c + 1] - u[c]) / h;
      double a = n * (n - 1) * std::pow(s + 1e-6 * smax, n - 2);
      double k = a * g.cell_moment(c) / (h * h);
      diag[c] += k;
      diag[c + 1] += k;
      upper[c] -= k;
      lower[c + 1] -= k;
    }
    for (std::size_t i = 0; i < M; ++i) {
      double zo = n * (n - 1) * std::pow(std::fabs(u[i]), n - 2);
      diag[i] += g.weight(i) * (zo + 1.0);
    }
    // Dirichlet condition at the outer boundary
    lower[M - 1] = 0.0;
    diag[M - 1] = 1.0;
    upper[M - 2] = 0.0;
  }

  void solve(const std::vector<double>& rhs, std::vector<double>& x) const {
    const std::size_t M = rhs.size();
    std::vector<double> cp(M), dp(M);
    cp[0] = upper[0] / diag[0];
    dp[0] = rhs[0] / diag[0];
    for (std::size_t i = 1; i < M; ++i) {
      double den = diag[i] - lower[i] * cp[i - 1];
      cp[i] = i + 1 < M ? upper[i] / den : 0.0;
      dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / den;
    }
    x.resize(M);
    x[M - 1] = dp[M - 1];
    for (std::size_t i = M - 1; i-- > 0;) x[i] = dp[i] - cp[i] * x[i + 1];
  }
};

// retraction: nonnegativity, nonincreasing rearrangement, unit Sobolev norm
void retract(const Problem& pb, std::vector<double>& u) {
  for (double& v : u) v = std::fabs(v);
  u.back() = 0.0;
  bool sorted = true;
  for (std::size_t i = 0; i + 1 < u.size(); ++i)
    if (u[i] < u[i + 1]) { sorted = false; break; }
  if (!sorted) std::sort(u.begin(), u.end(), std::greater<double>());
  double norm = std::pow(pb.norm_pow(u), 1.0 / pb.ctx->n);
  if (!(norm > 0.0)) throw std::runtime_error("maximize: iterate collapsed to zero");
  for (double& v : u) v /= norm;
}

struct RunOutcome {
  std::vector<double> u;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<IterRecord> log;
};

RunOutcome run_single(const Problem& pb, std::vector<double> u,
                      const MaximizeOptions& opts) {
  RunOutcome out;
  retract(pb, u);
  double J = pb.functional(u);

  Tridiag T;
  std::vector<double> gJ, gN, dJ, dN, d(u.size()), trial;
  double step = opts.step0;
  int stalled = 0;
  int it = 0;
  for (; it < opts.max_iters && stalled < opts.stall_iters; ++it) {
    pb.grad_functional(u, gJ);
    pb.grad_norm(u, gN);
    T.assemble(pb, u);
    gJ.back() = 0.0;
    gN.back() = 0.0;
    T.solve(gJ, dJ);
    T.solve(gN, dN);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      num += gN[i] * dJ[i];
      den += gN[i] * dN[i];
    }
    double theta = den != 0.0 ? num / den : 0.0;
    double slope = 0.0;  // <g, T^{-1} g> >= 0 along the projected direction
    for (std::size_t i = 0; i < u.size(); ++i) {
      d[i] = dJ[i] - theta * dN[i];
      slope += (gJ[i] - theta * gN[i]) * d[i];
    }
    d.back() = 0.0;

    bool accepted = false;
    double s = step;
    for (int back = 0; back < 60; ++back) {
      trial = u;
      for (std::size_t i = 0; i < u.size(); ++i) trial[i] += s * d[i];
      retract(pb, trial);
      double Jt = pb.functional(trial);
      if (Jt >= J + 1e-4 * s * slope || Jt >= J) {
        bool improved = Jt > J * (1.0 + opts.tol);
        u.swap(trial);
        J = Jt;
        step = std::min(s * 1.7, 64.0);
        stalled = improved ? 0 : stalled + 1;
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (!accepted) {
      ++stalled;
      step = std::max(step * 0.5, 1e-18);
    }
    if (std::getenv("MOSER_DEBUG") && it % 10 == 0)
      std::fprintf(stderr, "it=%d J=%.14g step=%.3e slope=%.3e stall=%d theta=%.4g\n",
                   it, J, step, slope, stalled, theta);
    if (it % opts.record_every == 0)
      out.log.push_back({it, J, std::fabs(pb.norm_pow(u) - 1.0), u.front()});
  }
  out.log.push_back({it, J, std::fabs(pb.norm_pow(u) - 1.0), u.front()});
  out.u = std::move(u);
  out.value = J;
  out.iterations = it;
  out.converged = stalled >= opts.stall_iters;
  return out;
}

std::vector<double> make_seed_profile(const Problem& pb, int which,
                                      std::mt19937_64& rng) {
  const RadialGrid& g = *pb.grid;
  const double R = g.outer_radius();
  double rho, q;
  if (which == 0) {  // bubble-shaped deterministic seed
    rho = 0.2 * R;
    q = 1.0;
  } else {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    rho = R * std::pow(10.0, -3.0 * u01(rng));
    q = 0.5 + 2.0 * u01(rng);
  }
  std::vector<double> u(g.size());
  auto shape = [&](double r) { return std::pow(1.0 + (r / rho) * (r / rho), -q); };
  double at_R = shape(R);
  for (std::size_t i = 0; i < g.size(); ++i)
    u[i] = std::max(shape(g.node(i)) - at_R, 0.0);
  return u;
}

}  // namespace

MaximizerResult maximize_on_ball(const DimensionContext& ctx, double R, double beta,
                                 GridPtr grid, const MaximizeOptions& opts) {
  if (!(beta > 0.0) || beta > ctx.alpha_n * (1.0 + 1e-12))
    throw std::invalid_argument(
        "maximize_on_ball: need 0 < beta <= alpha_n (supremum is infinite beyond)");
  if (grid->dim() != ctx.n)
    throw std::invalid_argument("maximize_on_ball: dimension mismatch");
  if (std::fabs(grid->outer_radius() - R) > 1e-9 * R)
    throw std::invalid_argument("maximize_on_ball: grid outer radius must equal R");

  Problem pb{&ctx, grid.get(), beta, ctx.growth()};

  std::vector<RunOutcome> runs;
  std::vector<double> seed_values;
  for (int k = 0; k < std::max(1, opts.seeds); ++k) {
    std::mt19937_64 rng(opts.seed + 0x9e3779b97f4a7c15ULL * k);
    RunOutcome r = run_single(pb, make_seed_profile(pb, k, rng), opts);
    seed_values.push_back(r.value);
    runs.push_back(std::move(r));
  }

  std::size_t best = 0;
  for (std::size_t k = 1; k < runs.size(); ++k)
    if (runs[k].value > runs[best].value) best = k;

  MaximizerResult res;
  res.u = RadialFunction(grid, runs[best].u, BoundaryKind::CompactSupport);
  res.beta = beta;
  res.R = R;
  res.value = runs[best].value;
  res.c_k = runs[best].u.front();
  res.lambda_k = lagrange_multiplier(ctx, res.u, beta);
  res.iterations = runs[best].iterations;
  res.converged = runs[best].converged;
  res.seed = opts.seed;
  res.seed_values = seed_values;
  res.value_spread = *std::max_element(seed_values.begin(), seed_values.end()) -
                     *std::min_element(seed_values.begin(), seed_values.end());
  res.log = std::move(runs[best].log);
  res.el_residual = el_residual(ctx, res);

  // tie-break equal values by the lower Euler-Lagrange residual
  for (std::size_t k = 0; k < runs.size(); ++k) {
    if (k == best || runs[k].value < res.value - 1e-12 * std::fabs(res.value)) continue;
    MaximizerResult alt = res;
    alt.u = RadialFunction(grid, runs[k].u, BoundaryKind::CompactSupport);
    alt.value = runs[k].value;
    alt.c_k = runs[k].u.front();
    alt.lambda_k = lagrange_multiplier(ctx, alt.u, beta);
    alt.iterations = runs[k].iterations;
    alt.converged = runs[k].converged;
    alt.el_residual = el_residual(ctx, alt);
    if (alt.el_residual < res.el_residual) {
      alt.log = res.log;
      res = std::move(alt);
    }
  }
  return res;
}

double lagrange_multiplier(const DimensionContext& ctx, const RadialFunction& u,
                           double beta) {
  if (ctx.n != u.grid->dim())
    throw std::invalid_argument("lagrange_multiplier: dimension mismatch");
  const double p = ctx.growth();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double v = std::fabs(u.values[i]);
    if (v > 0.0)
      s += u.grid->weight(i) * std::pow(v, p) * phi_prime(ctx, beta * std::pow(v, p));
  }
  return s;
}

namespace {

// C^1 compact bump centered at a with half-width b.
struct Bump {
  double a, b;
  double value(double r) const {
    double t = (r - a) / b;
    if (std::fabs(t) >= 1.0) return 0.0;
    double q = 1.0 - t * t;
    return q * q;
  }
  double deriv(double r) const {
    double t = (r - a) / b;
    if (std::fabs(t) >= 1.0) return 0.0;
    return -4.0 * t * (1.0 - t * t) / b;
  }
};

}  // namespace

double el_residual(const DimensionContext& ctx, const MaximizerResult& result) {
  const RadialFunction& u = result.u;
  const RadialGrid& g = *u.grid;
  const int n = ctx.n;
  const double p = ctx.growth();
  const double beta = result.beta;
  const double lambda = result.lambda_k > 0.0
                            ? result.lambda_k
                            : lagrange_multiplier(ctx, u, beta);
  const double R = g.outer_radius();

  // supports stay inside the open ball: the weak form admits only test
  // profiles vanishing at the boundary
  std::vector<Bump> bumps;
  bumps.push_back({0.0, 0.3 * R});
  for (int j = 1; j <= 8; ++j) bumps.push_back({R * j / 10.0, 0.1 * R});

  double worst = 0.0;
  for (const Bump& bump : bumps) {
    // Simpson per grid cell; u' is cell-constant, everything else midpoint-refined.
    double total = 0.0;
    for (std::size_t c = 0; c < g.cells(); ++c) {
      double ra = g.node(c), rb = g.node(c + 1);
      if (ra >= bump.a + bump.b || rb <= bump.a - bump.b) continue;
      double h = rb - ra, rm = 0.5 * (ra + rb);
      double s = (u.values[c + 1] - u.values[c]) / h;
      double sig = std::pow(std::fabs(s), n - 2) * s;
      auto zero_order = [&](double r, double uval) {
        double v = std::max(uval, 0.0);
        double f = std::pow(v, n - 1) -
                   std::pow(v, 1.0 / (n - 1)) * phi_prime(ctx, beta * std::pow(v, p)) / lambda;
        return (sig * bump.deriv(r) + f * bump.value(r)) * std::pow(r, n - 1);
      };
      double um = 0.5 * (u.values[c] + u.values[c + 1]);
      total += g.omega() * h / 6.0 *
               (zero_order(ra, u.values[c]) + 4.0 * zero_order(rm, um) +
                zero_order(rb, u.values[c + 1]));
    }
    RadialFunction phi_fn = RadialFunction::sample(
        u.grid, [&](double r) { return bump.value(r); }, BoundaryKind::CompactSupport);
    double norm = sobolev_norm(phi_fn);
    if (norm > 0.0) worst = std::max(worst, std::fabs(total) / norm);
  }
  return worst;
}

BlowupDiagnostics blowup_diagnostics(const DimensionContext& ctx,
                                     const MaximizerResult& result, double L) {
  const RadialFunction& u = result.u;
  const RadialGrid& g = *u.grid;
  const double p = ctx.growth();
  const double beta = result.beta;
  const double c = result.c_k;
  const double lambda = result.lambda_k;
  if (!(c > 0.0 && lambda > 0.0))
    throw std::invalid_argument("blowup_diagnostics: degenerate maximizer");

  BlowupDiagnostics diag;
  double log_rk = (std::log(lambda) - beta * std::pow(c, p) - p * std::log(c)) / ctx.n;
  diag.r_k = std::exp(log_rk);

  // number of grid nodes resolving [0, L r_k]
  double cut = L * diag.r_k;
  std::size_t resolved = 0;
  while (resolved < g.size() && g.node(resolved) < cut) ++resolved;
  diag.under_resolved = resolved < 32;

  std::vector<double> xs{0.0};
  for (int j = 0; j <= 400; ++j)
    xs.push_back(1e-3 * std::pow(L / 1e-3, j / 400.0));
  auto xgrid = std::make_shared<RadialGrid>(RadialGrid::from_nodes(ctx.n, xs));
  double kappa = p * beta * std::pow(c, 1.0 / (ctx.n - 1));
  diag.w_rescaled = RadialFunction::sample(
      xgrid, [&](double x) { return kappa * (u(diag.r_k * x) - c); },
      BoundaryKind::DecayingTail);
  double dist = 0.0;
  for (std::size_t i = 0; i < xgrid->size(); ++i)
    dist = std::max(dist, std::fabs(diag.w_rescaled.values[i] -
                                    bubble(ctx, xgrid->node(i))));
  diag.bubble_distance = dist;

  // core mass: Simpson per cell up to the cut, partial last cell
  auto dens = [&](double r) {
    double v = u(r);
    if (v <= 0.0) return 0.0;
    return g.omega() * std::pow(r, ctx.n - 1) * std::pow(v, p) *
           phi_prime(ctx, beta * std::pow(v, p)) / lambda;
  };
  double mass = 0.0;
  for (std::size_t cidx = 0; cidx < g.cells(); ++cidx) {
    double ra = g.node(cidx);
    if (ra >= cut) break;
    double rb = std::min(g.node(cidx + 1), cut);
    double rm = 0.5 * (ra + rb);
    mass += (rb - ra) / 6.0 * (dens(ra) + 4.0 * dens(rm) + dens(rb));
  }
  diag.core_mass = mass;

  for (double A : {2.0, 4.0, 8.0}) {
    std::vector<double> trunc(u.values);
    for (double& v : trunc) v = std::min(v, c / A);
    trunc.back() = 0.0;
    RadialFunction uA(u.grid, std::move(trunc), BoundaryKind::CompactSupport);
    diag.truncation_energy[A] = dirichlet_energy(uA) + ln_norm_pow(uA);
  }
  return diag;
}

DichotomyReport dichotomy_report(const DimensionContext& ctx,
                                 const std::vector<MaximizerResult>& sequence) {
  if (sequence.empty())
    throw std::invalid_argument("dichotomy_report: empty sequence");
  DichotomyReport rep;
  for (const auto& r : sequence) {
    rep.c_ks.push_back(r.c_k);
    rep.values.push_back(r.value);
    rep.lambda_over_c.push_back(r.lambda_k / r.c_k);
    rep.scaled_u_at_half.push_back(std::pow(r.c_k, 1.0 / (ctx.n - 1)) * r.u(0.5));
  }
  rep.values_nondecreasing = true;
  for (std::size_t k = 0; k + 1 < rep.values.size(); ++k)
    if (rep.values[k + 1] < rep.values[k] * (1.0 - 1e-9))
      rep.values_nondecreasing = false;
  rep.lambda_over_c_increasing =
      rep.lambda_over_c.back() > rep.lambda_over_c.front();
  double growth = rep.c_ks.back() / rep.c_ks.front();
  rep.classification = growth > 1.5 ? Dichotomy::BlowUp : Dichotomy::BoundedPeak;
  return rep;
}

}  // namespace moser
