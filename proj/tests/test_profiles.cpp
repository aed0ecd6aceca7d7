#include <doctest.h>

#include <cmath>
#include <memory>
#include <stdexcept>

#include "moser/profiles.hpp"
#include "oracle.hpp"

using namespace moser;

namespace {

GridPtr share(RadialGrid g) { return std::make_shared<RadialGrid>(std::move(g)); }

GridPtr geometric(int n, double r0, double R, int cells) {
  std::vector<double> nodes{0.0};
  for (int j = 0; j <= cells; ++j)
    nodes.push_back(r0 * std::pow(R / r0, static_cast<double>(j) / cells));
  return share(RadialGrid::from_nodes(n, std::move(nodes)));
}

const GreenSolution& deep_green(int n) {
  static GreenSolution g2 = solve_green(make_context(2), 16.0, 1e-9, 1e-6);
  static GreenSolution g3 = solve_green(make_context(3), 20.0, 2e-9, 1e-6);
  return n == 2 ? g2 : g3;
}

// partial sums of the quadrature up to radius cut (cut must be a node)
double tm_inside(const DimensionContext& ctx, const RadialFunction& f, double alpha,
                 double cut) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size() && f.grid->node(i) <= cut * (1 + 1e-12); ++i)
    s += f.grid->weight(i) * phi(ctx, alpha * std::pow(std::fabs(f.values[i]), ctx.growth()));
  return s;
}

}  // namespace

TEST_SUITE_BEGIN("profiles");

TEST_CASE("bubble profile") {
  DimensionContext c2 = make_context(2);
  CHECK(bubble(c2, 0.0) == 0.0);
  CHECK(bubble(c2, 1.0) ==
        doctest::Approx(-2.0 * std::log1p(M_PI)).epsilon(1e-14));
  CHECK(bubble(c2, 1.0) == doctest::Approx(-2.8421608255885853).epsilon(1e-12));
  double prev = bubble(c2, 0.0);
  for (double r : {0.1, 0.5, 1.0, 3.0, 10.0, 100.0}) {
    double w = bubble(c2, r);
    CHECK(w < prev);
    prev = w;
  }
}

TEST_CASE("bubble mass: closed form and normalization") {
  DimensionContext c2 = make_context(2);
  double m1 = bubble_mass(c2, 1.0);
  CHECK(m1 == doctest::Approx(1.0 - 1.0 / (1.0 + M_PI)).epsilon(1e-10));
  CHECK(m1 == doctest::Approx(0.7585469929947761).epsilon(1e-10));
  CHECK(bubble_mass(c2, 100.0) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(bubble_mass(c2, 2.0) > m1);

  DimensionContext c3 = make_context(3);
  double m200 = bubble_mass(c3, 200.0);
  CHECK(std::fabs(m200 - 1.0) < 1e-3);
  CHECK(m200 == doctest::Approx(0.9996545953545684).epsilon(1e-8));
  // independent oracle for the same integral
  double p = c3.growth();
  double via_oracle = oracle::integrate(
      [&](double r) {
        return c3.omega * r * r * std::pow(1.0 + c3.c_n * std::pow(r, p), -3.0);
      },
      0.0, 200.0, 1e-12);
  CHECK(m200 == doctest::Approx(via_oracle).epsilon(1e-8));
}

TEST_CASE("bubble PDE residual is small and shrinks under refinement") {
  for (int n : {2, 3}) {
    DimensionContext ctx = make_context(n);
    double r512 = bubble_pde_residual(ctx, *geometric(n, 1e-3, 20.0, 512));
    double r1024 = bubble_pde_residual(ctx, *geometric(n, 1e-3, 20.0, 1024));
    CHECK(r512 < 1e-2);
    CHECK(r1024 <= 0.55 * r512);
  }
}

TEST_CASE("moser function: continuity, support, unit Dirichlet energy") {
  for (auto [n, c] : {std::pair{2, 1.0}, {2, 3.0}, {3, 2.0}}) {
    DimensionContext ctx = make_context(n);
    double L = 1.0;
    auto grid = share(moser_grid(ctx, c, L));
    RadialFunction u = moser_function(ctx, c, L, grid);
    double rp = L * moser_eps(ctx, c);
    CHECK(std::fabs(u(rp) - c) < 1e-12 * c);
    CHECK(u(L) == 0.0);
    CHECK(std::fabs(dirichlet_energy(u) - 1.0) < 1e-3);
  }
}

TEST_CASE("moser function rejects an unresolved plateau") {
  DimensionContext ctx = make_context(2);
  auto coarse = share(RadialGrid::build(2, 1.0, 16, 16, 0.1));
  CHECK_THROWS_AS(moser_function(ctx, 3.0, 1.0, coarse), std::invalid_argument);
}

TEST_CASE("sharpness experiment: supercritical growth, subcritical band") {
  DimensionContext ctx = make_context(2);
  std::vector<double> cs{1.0, 2.0, 3.0, 4.0};
  auto grid = share(sharpness_grid(ctx, cs, 1.0));

  auto super = sharpness_experiment(ctx, 1.05 * ctx.alpha_n, cs, grid);
  for (std::size_t k = 0; k + 1 < super.size(); ++k)
    CHECK(super[k + 1].log_value > super[k].log_value);
  CHECK(super.back().log_value - super.front().log_value >= std::log(10.0));

  auto sub = sharpness_experiment(ctx, 0.9 * ctx.alpha_n, cs, grid);
  for (const auto& v : sub) CHECK(!v.overflowed);
  auto ratios = sharpness_ratio_experiment(ctx, 0.9 * ctx.alpha_n, cs, grid);
  double lo = 1e300, hi = 0.0;
  for (double r : ratios) {
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  CHECK(hi / lo < 10.0);
  // the ratio floor is the leading Taylor coefficient of the functional
  CHECK(lo > 0.9 * std::pow(0.9 * ctx.alpha_n, ctx.n - 1));

  auto crit = sharpness_experiment(ctx, ctx.alpha_n, cs, grid);
  double sup_obs = 0.0;
  for (const auto& v : crit) {
    CHECK(!v.overflowed);
    sup_obs = std::max(sup_obs, v.value);
  }
  MESSAGE("critical sup observed: ", sup_obs);
  CHECK(sup_obs < 1e3);

  CHECK_THROWS_AS(sharpness_experiment(ctx, 1.05 * ctx.alpha_n, {2.0, 1.0}, grid),
                  std::invalid_argument);
}

TEST_CASE("test1 C-solve: bracket, residual, asymptotics") {
  DimensionContext ctx = make_context(2);
  double A = 0.02;
  CHECK_THROWS_AS(test1_solve_C(ctx, 0.5, A), std::invalid_argument);

  double p = ctx.growth();
  double first = 0.0;
  for (double eps : {1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8}) {
    double C = test1_solve_C(ctx, eps, A);
    double N0 = -(ctx.n - 1) * ctx.harmonic + ctx.alpha_n * A +
                std::log(ctx.omega / ctx.n) - ctx.n * std::log(eps);
    // bracket endpoints bracket the root with the right signs
    double mlog = -ctx.n * std::log(eps);
    double lo = std::pow(mlog / (2.0 * ctx.alpha_n), 1.0 / p);
    double hi = std::pow(2.0 * mlog / ctx.alpha_n, 1.0 / p);
    CHECK(N0 - ctx.alpha_n * std::pow(lo, p) > 0.0);
    CHECK(N0 - ctx.alpha_n * std::pow(hi, p) < 0.0);
    CHECK(C > lo);
    CHECK(C < hi);
    // root-finder contract
    CHECK(std::fabs(N0 - ctx.alpha_n * std::pow(C, p)) < 1e-10);
    // alpha_n C^{n/(n-1)} + log eps^n stays bounded along the sweep
    double drift = ctx.alpha_n * std::pow(C, p) - mlog;
    if (first == 0.0) first = drift;
    CHECK(std::fabs(drift) < 10.0);
    CHECK(std::fabs(drift - first) < 1e-9);
  }
}

TEST_CASE("test1 build: matching, normalization, Lambda trend") {
  for (int n : {2, 3}) {
    DimensionContext ctx = make_context(n);
    const GreenSolution& green = deep_green(n);
    for (double eps : {1e-6, 1e-8}) {
      auto grid = share(test1_grid(ctx, eps, green));
      auto [u, params] = test1_build(ctx, eps, green, grid);
      CHECK(params.matching_residual < 1e-8);
      double norm = sobolev_norm(u);
      CHECK(std::fabs(norm - 1.0) < 2e-3);
      if (eps == 1e-8)
        CHECK(std::fabs(params.Lambda_eps + (n - 1) * ctx.harmonic) < 0.05);
      // continuity across the joint on the sampled profile
      double rp = params.L * eps;
      CHECK(std::fabs(u(rp * (1 + 1e-9)) - u(rp * (1 - 1e-9))) < 1e-6);
    }
  }
}

TEST_CASE("test1 lower bound beats the Carleson-Chang type threshold") {
  for (int n : {2, 3}) {
    DimensionContext ctx = make_context(n);
    const GreenSolution& green = deep_green(n);
    double margin_at_smallest = 0.0;
    for (double eps : {1e-4, 1e-6, 1e-8}) {
      auto grid = share(test1_grid(ctx, eps, green));
      auto [value, threshold] = test1_lower_bound(ctx, eps, green, grid);
      margin_at_smallest = value - threshold;
      MESSAGE("n=", n, " eps=", eps, " value=", value, " threshold=", threshold,
              " margin=", margin_at_smallest);
    }
    CHECK(margin_at_smallest > 0.0);
  }
}

TEST_CASE("test1 inner ball alone nearly reaches the threshold") {
  DimensionContext ctx = make_context(2);
  const GreenSolution& green = deep_green(2);
  double eps = 1e-8;
  auto grid = share(test1_grid(ctx, eps, green));
  auto [u, params] = test1_build(ctx, eps, green, grid);
  double threshold =
      (ctx.omega / ctx.n) * std::exp(ctx.alpha_n * params.A + ctx.harmonic);
  double inner = tm_inside(ctx, u, ctx.alpha_n, params.L * eps);
  double corr = 5.0 * std::pow(params.L, -ctx.growth());
  CHECK(inner >= threshold * (1.0 - corr));
}

TEST_CASE("test1 pointwise exponent bound inside the core") {
  DimensionContext ctx = make_context(2);
  const GreenSolution& green = deep_green(2);
  double eps = 1e-6;
  auto grid = share(test1_grid(ctx, eps, green));
  auto [u, params] = test1_build(ctx, eps, green, grid);
  double p = ctx.growth();
  double rp = params.L * eps;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    double r = grid->node(i);
    if (r > rp) break;
    double lhs = ctx.alpha_n * std::pow(u.values[i], p);
    double rhs = ctx.alpha_n * std::pow(params.C, p) -
                 ctx.n * std::log1p(ctx.c_n * std::pow(r / eps, p)) -
                 p * params.Lambda_eps;
    CHECK(lhs >= rhs - 1e-9 * std::fabs(rhs));
  }
}

TEST_CASE("elementary inequality |1-t|^{n/(n-1)} >= 1 - (n/(n-1)) t") {
  for (int n = 2; n <= 7; ++n) {
    double p = static_cast<double>(n) / (n - 1);
    for (int k = -99; k <= 99; ++k) {
      double t = k / 100.0;
      CHECK(std::pow(std::fabs(1.0 - t), p) >= 1.0 - p * t - 1e-14);
    }
  }
}

TEST_CASE("test1 tail norm matches the Green flux formula") {
  DimensionContext ctx = make_context(2);
  const GreenSolution& green = deep_green(2);
  double eps = 1e-6;
  auto grid = share(test1_grid(ctx, eps, green));
  auto [u, params] = test1_build(ctx, eps, green, grid);
  double rp = params.L * eps;

  // energy of the profile outside B_{L eps}: cells at and beyond the joint
  double direct = 0.0;
  const RadialGrid& g = *grid;
  for (std::size_t c = 0; c < g.cells(); ++c) {
    if (g.node(c) < rp * (1 - 1e-12)) continue;
    double h = g.node(c + 1) - g.node(c);
    double s = (u.values[c + 1] - u.values[c]) / h;
    direct += g.cell_moment(c) * std::pow(std::fabs(s), ctx.n);
    double fa = std::pow(std::fabs(u.values[c]), ctx.n);
    double fb = std::pow(std::fabs(u.values[c + 1]), ctx.n);
    direct += 0.5 * (fa + fb) * g.cell_moment(c);
  }
  double Cpow = std::pow(params.C, ctx.growth());
  double formula = green.value_at(rp) * green.deficit_at(rp) / Cpow;
  CHECK(std::fabs(direct - formula) / formula < 1e-3);
}

TEST_CASE("test2 parameters and threshold") {
  DimensionContext c3 = make_context(3);
  CHECK_THROWS_AS(make_test2_params(make_context(2), 2.0, 4.0), std::invalid_argument);
  Test2Params p = make_test2_params(c3, 3.0, 6.0);
  CHECK(std::pow(p.eps, 3) * std::exp(c3.alpha_n * std::pow(3.0, 1.5)) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.L == doctest::Approx(18.0).epsilon(1e-14));
  CHECK(c3.threshold_poly == doctest::Approx(18.0 * M_PI).epsilon(1e-12));
}

TEST_CASE("test2 plateau energy matches the closed-form display") {
  DimensionContext ctx = make_context(3);
  Test2Params p = make_test2_params(ctx, 3.0, 6.0);
  auto grid = share(test2_grid(ctx, p, 0.005));
  RadialFunction u = moser_function(ctx, p.c, p.L, grid);
  double got = ln_norm_pow(u);

  int n = ctx.n;
  double logint = oracle::integrate(
      [&](double s) {
        return std::pow(s, n - 1) * std::pow(-std::log(s), n);
      },
      p.eps, 1.0, 1e-13);
  double expect = ctx.omega / n * std::pow(p.c, n) * std::pow(p.L * p.eps, n) +
                  ctx.omega * std::pow(static_cast<double>(n), n) * std::pow(p.L, n) /
                      (std::pow(ctx.alpha_n, n) * std::pow(p.c, ctx.growth())) *
                      logint;
  CHECK(std::fabs(got - expect) / expect < 1e-4);
}

TEST_CASE("test2 crosses the polynomial threshold for large b") {
  DimensionContext ctx = make_context(3);
  double best = -1e300;
  double prev_cond = 1e300;
  for (double c : {2.0, 3.0, 4.0}) {
    Test2Params p = make_test2_params(ctx, c, 6.0);
    auto grid = share(test2_grid(ctx, p));
    auto [value, threshold] = test2_ratio(ctx, p, grid);
    best = std::max(best, value - threshold);
    double cond = test2_condition(ctx, p);
    CHECK(cond < prev_cond);
    prev_cond = cond;
    MESSAGE("c=", c, " value=", value, " threshold=", threshold);
  }
  CHECK(best > 0.0);
}

TEST_SUITE_END();
