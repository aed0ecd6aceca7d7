#include "moser/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace moser {

namespace {

// Adaptive Simpson on [a,b]; fine for the smooth rational-type integrands
// used here.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int depth,
                        double fa, double fm, double fb, double whole) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, 0.5 * tol, depth - 1, fa, flm, fm, left) +
         adaptive_simpson(f, m, b, 0.5 * tol, depth - 1, fm, frm, fb, right);
}

template <class F>
double integrate(F&& f, double a, double b, double rel_tol) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  double tol = std::max(std::fabs(whole), 1e-30) * rel_tol;
  return adaptive_simpson(f, a, b, tol, 48, fa, fm, fb, whole);
}

// Appends geometrically spaced nodes in (a, b], the last one exactly b.
void geometric_fill(std::vector<double>& nodes, double a, double b, double dlog) {
  int cells = std::max(16, static_cast<int>(std::ceil(std::log(b / a) / dlog)));
  double q = std::log(b / a) / cells;
  for (int j = 1; j < cells; ++j) nodes.push_back(a * std::exp(j * q));
  nodes.push_back(b);
}

}  // namespace

double bubble(const DimensionContext& ctx, double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("bubble: r must be >= 0");
  return -ctx.n * std::log1p(ctx.c_n * std::pow(r, ctx.growth()));
}

double bubble_mass(const DimensionContext& ctx, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("bubble_mass: R must be positive");
  const double p = ctx.growth();
  auto f = [&](double r) {
    return ctx.omega * std::pow(r, ctx.n - 1) *
           std::pow(1.0 + ctx.c_n * std::pow(r, p), -static_cast<double>(ctx.n));
  };
  // split at r = 1: the integrand peaks near the origin at unit scale
  if (R <= 1.0) return integrate(f, 0.0, R, 1e-13);
  return integrate(f, 0.0, 1.0, 1e-13) + integrate(f, 1.0, R, 1e-13);
}

double bubble_pde_residual(const DimensionContext& ctx, const RadialGrid& grid) {
  if (grid.dim() != ctx.n)
    throw std::invalid_argument("bubble_pde_residual: dimension mismatch");
  const int n = ctx.n;
  const double coef = std::pow(n * ctx.alpha_n / (n - 1), n - 1);
  const auto& r = grid.nodes();
  std::size_t i0 = r.front() == 0.0 ? 1 : 0;

  // conservative stencil: midpoint fluxes r^{n-1} (-w')^{n-1} per cell
  auto flux = [&](std::size_t c) {
    double rm = 0.5 * (r[c] + r[c + 1]);
    double slope = (bubble(ctx, r[c + 1]) - bubble(ctx, r[c])) / (r[c + 1] - r[c]);
    return std::pow(rm, n - 1) * std::pow(-slope, n - 1);
  };

  double worst = 0.0;
  for (std::size_t i = i0 + 1; i + 1 < r.size(); ++i) {
    double h = 0.5 * (r[i + 1] - r[i - 1]);
    double div = (flux(i) - flux(i - 1)) / (h * std::pow(r[i], n - 1));
    double source = coef * std::exp(bubble(ctx, r[i]));
    worst = std::max(worst, std::fabs(div - source) / source);
  }
  return worst;
}

double moser_eps(const DimensionContext& ctx, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("moser_eps: c must be positive");
  return std::exp(-ctx.alpha_n * std::pow(c, ctx.growth()) / ctx.n);
}

RadialFunction moser_function(const DimensionContext& ctx, double c,
                              double L_outer, GridPtr grid) {
  if (!(c > 0.0)) throw std::invalid_argument("moser_function: c must be positive");
  if (grid->dim() != ctx.n)
    throw std::invalid_argument("moser_function: dimension mismatch");
  if (grid->outer_radius() < L_outer)
    throw std::invalid_argument("moser_function: grid outer radius below L_outer");
  const double eps = moser_eps(ctx, c);
  const double rp = L_outer * eps;
  if (rp < grid->node(1))
    throw std::invalid_argument(
        "moser_function: plateau radius " + std::to_string(rp) +
        " below the first grid cell (under-resolved); refine the inner grid");
  const double denom = ctx.alpha_n * std::pow(c, 1.0 / (ctx.n - 1));
  return RadialFunction::sample(
      std::move(grid),
      [&](double r) {
        if (r <= rp) return c;
        if (r >= L_outer) return 0.0;
        return ctx.n * std::log(L_outer / r) / denom;
      },
      BoundaryKind::CompactSupport);
}

RadialGrid moser_grid(const DimensionContext& ctx, double c, double L_outer,
                      double dlog) {
  const double rp = L_outer * moser_eps(ctx, c);
  std::vector<double> nodes{0.0, 0.25 * rp, 0.5 * rp, 0.75 * rp, rp};
  geometric_fill(nodes, rp, L_outer, dlog);
  return RadialGrid::from_nodes(ctx.n, std::move(nodes));
}

RadialGrid sharpness_grid(const DimensionContext& ctx,
                          const std::vector<double>& c_schedule, double L_outer,
                          double dlog) {
  if (c_schedule.empty())
    throw std::invalid_argument("sharpness_grid: empty schedule");
  std::vector<double> joints;
  for (double c : c_schedule) joints.push_back(L_outer * moser_eps(ctx, c));
  std::sort(joints.begin(), joints.end());
  std::vector<double> nodes{0.0, 0.5 * joints.front()};
  double prev = joints.front();
  nodes.push_back(prev);
  for (std::size_t k = 1; k < joints.size(); ++k) {
    if (joints[k] > prev * (1.0 + 1e-12)) {
      geometric_fill(nodes, prev, joints[k], dlog);
      prev = joints[k];
    }
  }
  geometric_fill(nodes, prev, L_outer, dlog);
  return RadialGrid::from_nodes(ctx.n, std::move(nodes));
}

std::vector<TmValue> sharpness_experiment(const DimensionContext& ctx, double alpha,
                                          const std::vector<double>& c_schedule,
                                          GridPtr grid) {
  if (!(alpha > 0.0))
    throw std::invalid_argument("sharpness_experiment: alpha must be positive");
  for (std::size_t k = 0; k + 1 < c_schedule.size(); ++k)
    if (!(c_schedule[k] < c_schedule[k + 1]))
      throw std::invalid_argument("sharpness_experiment: schedule must increase");
  std::vector<TmValue> out;
  out.reserve(c_schedule.size());
  const double L = grid->outer_radius();
  for (double c : c_schedule) {
    RadialFunction u = normalize(moser_function(ctx, c, L, grid));
    out.push_back(tm_functional_ex(ctx, u, alpha));
  }
  return out;
}

std::vector<double> sharpness_ratio_experiment(const DimensionContext& ctx,
                                               double alpha,
                                               const std::vector<double>& c_schedule,
                                               GridPtr grid) {
  std::vector<double> out;
  out.reserve(c_schedule.size());
  const double L = grid->outer_radius();
  for (double c : c_schedule) {
    RadialFunction u = normalize(moser_function(ctx, c, L, grid));
    out.push_back(tm_functional(ctx, u, alpha) / ln_norm_pow(u));
  }
  return out;
}

double test1_solve_C(const DimensionContext& ctx, double eps, double A,
                     double phi_err) {
  if (!(eps > 0.0 && eps < std::exp(-1.0)))
    throw std::invalid_argument("test1_solve_C: need 0 < eps < e^{-1}");
  const double p = ctx.growth();
  const double mlog = -ctx.n * std::log(eps);  // -log eps^n > 0
  const double N0 = -(ctx.n - 1) * ctx.harmonic + ctx.alpha_n * A +
                    std::log(ctx.omega / ctx.n) + mlog + phi_err;
  auto f = [&](double t) { return N0 - ctx.alpha_n * std::pow(t, p); };

  double lo = std::pow(mlog / (2.0 * ctx.alpha_n), 1.0 / p);
  double hi = std::pow(2.0 * mlog / ctx.alpha_n, 1.0 / p);
  if (!(f(lo) > 0.0 && f(hi) < 0.0))
    throw std::runtime_error("test1_solve_C: bracket sign check failed (eps not small enough)");
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
    if (hi - lo < 1e-15 * hi) break;
  }
  return 0.5 * (lo + hi);
}

RadialGrid test1_grid(const DimensionContext& ctx, double eps,
                      const GreenSolution& green, double dlog) {
  const double L = -std::log(eps);
  const double rp = L * eps;
  if (!(rp > green.r_inner))
    throw std::invalid_argument("test1_grid: L*eps is below the Green solve's inner radius");
  std::vector<double> nodes{0.0};
  geometric_fill(nodes, 1e-3 * eps, rp, dlog);
  geometric_fill(nodes, rp, green.R_max, dlog);
  return RadialGrid::from_nodes(ctx.n, std::move(nodes));
}

namespace {

struct Test1Profile {
  RadialFunction u;
  double lambda;     // Lambda_eps used
  double norm_pow;   // Sobolev norm^n
  double matching;   // |inner - outer| at the joint
};

Test1Profile build_once(const DimensionContext& ctx, double eps, double C,
                        const GreenSolution& green, const GridPtr& grid) {
  const double p = ctx.growth();
  const double L = -std::log(eps);
  const double rp = L * eps;
  const double Cq = std::pow(C, 1.0 / (ctx.n - 1));
  const double lambda = ctx.alpha_n * C * Cq -
                        (ctx.n - 1) * std::log1p(ctx.c_n * std::pow(L, p)) -
                        ctx.alpha_n * green.value_at(rp);
  auto inner = [&](double r) {
    return C - ((ctx.n - 1) * std::log1p(ctx.c_n * std::pow(r / eps, p)) + lambda) /
                   (ctx.alpha_n * Cq);
  };
  auto outer = [&](double r) { return green.value_at(r) / Cq; };
  Test1Profile out{
      RadialFunction::sample(
          grid, [&](double r) { return r <= rp ? inner(r) : outer(r); },
          BoundaryKind::DecayingTail),
      lambda, 0.0, std::fabs(inner(rp) - outer(rp))};
  out.norm_pow = dirichlet_energy(out.u) + ln_norm_pow(out.u);
  return out;
}

}  // namespace

std::pair<RadialFunction, Test1Params> test1_build(const DimensionContext& ctx,
                                                   double eps,
                                                   const GreenSolution& green,
                                                   GridPtr grid) {
  if (grid->dim() != ctx.n || green.n != ctx.n)
    throw std::invalid_argument("test1_build: dimension mismatch");
  const double p = ctx.growth();

  double C1 = test1_solve_C(ctx, eps, green.A, 0.0);
  Test1Profile first = build_once(ctx, eps, C1, green, grid);
  double phi_hat = (first.norm_pow - 1.0) * ctx.alpha_n * std::pow(C1, p);

  double C2 = test1_solve_C(ctx, eps, green.A, phi_hat);
  Test1Profile second = build_once(ctx, eps, C2, green, grid);

  Test1Params params;
  params.eps = eps;
  params.L = -std::log(eps);
  params.C = C2;
  params.Lambda_eps = second.lambda;
  params.A = green.A;
  params.phi_hat = phi_hat;
  params.C_first = C1;
  params.norm_first = first.norm_pow;
  params.norm_residual = std::fabs(second.norm_pow - 1.0);
  params.matching_residual = second.matching;
  if (params.norm_residual > 0.01)
    throw std::runtime_error("test1_build: normalization defect above 1% (eps too large)");
  return {std::move(second.u), params};
}

std::pair<double, double> test1_lower_bound(const DimensionContext& ctx, double eps,
                                            const GreenSolution& green, GridPtr grid) {
  auto [u, params] = test1_build(ctx, eps, green, std::move(grid));
  double value = tm_functional(ctx, normalize(u), ctx.alpha_n);
  double threshold =
      (ctx.omega / ctx.n) * std::exp(ctx.alpha_n * params.A + ctx.harmonic);
  return {value, threshold};
}

Test2Params make_test2_params(const DimensionContext& ctx, double c, double b) {
  if (ctx.n == 2)
    throw std::invalid_argument("test2: the construction requires n > 2");
  if (!(c > 0.0 && b > 0.0))
    throw std::invalid_argument("test2: c and b must be positive");
  Test2Params p;
  p.c = c;
  p.b = b;
  p.eps = moser_eps(ctx, c);
  p.L = b * std::pow(c, 1.0 / (ctx.n - 2));
  return p;
}

RadialGrid test2_grid(const DimensionContext& ctx, const Test2Params& params,
                      double dlog) {
  return moser_grid(ctx, params.c, params.L, dlog);
}

std::pair<double, double> test2_ratio(const DimensionContext& ctx,
                                      const Test2Params& params, GridPtr grid) {
  if (ctx.n == 2) throw std::invalid_argument("test2_ratio: n > 2 required");
  RadialFunction u = normalize(moser_function(ctx, params.c, params.L, std::move(grid)));
  return {tm_functional(ctx, u, ctx.alpha_n), ctx.threshold_poly};
}

double test2_condition(const DimensionContext& ctx, const Test2Params& params) {
  return std::pow(params.c, ctx.growth()) / std::pow(params.L, ctx.n);
}

}  // namespace moser
