#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>

#include "moser/grid.hpp"
#include "moser/profiles.hpp"
#include "oracle.hpp"

using namespace moser;

namespace {

GridPtr share(RadialGrid g) { return std::make_shared<RadialGrid>(std::move(g)); }

GridPtr log_grid(int n, double r0, double R, int cells, bool with_zero = true) {
  std::vector<double> nodes;
  if (with_zero) nodes.push_back(0.0);
  for (int j = 0; j <= cells; ++j)
    nodes.push_back(r0 * std::pow(R / r0, static_cast<double>(j) / cells));
  return share(RadialGrid::from_nodes(n, std::move(nodes)));
}

GridPtr uniform_grid(int n, double R, int cells) {
  std::vector<double> nodes;
  for (int j = 0; j <= cells; ++j) nodes.push_back(R * j / cells);
  return share(RadialGrid::from_nodes(n, std::move(nodes)));
}

}  // namespace

TEST_SUITE_BEGIN("grid");

TEST_CASE("graded grid construction and ball volume") {
  RadialGrid g = RadialGrid::build(2, 1.0, 64, 64, 1e-3);
  CHECK(g.size() == 129);
  double wsum = 0.0;
  for (double w : g.weights()) {
    CHECK(w > 0.0);
    wsum += w;
  }
  CHECK(std::fabs(wsum - M_PI) / M_PI < 1e-10);

  RadialGrid g3 = RadialGrid::build(3, 10.0, 32, 32, 1e-2);
  double wsum3 = 0.0;
  for (double w : g3.weights()) wsum3 += w;
  double vol = 4.0 * M_PI / 3.0 * 1000.0;
  CHECK(std::fabs(wsum3 - vol) / vol < 1e-10);

  CHECK_THROWS_AS(RadialGrid::build(2, -1.0, 64, 64, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(RadialGrid::build(2, 1.0, 4, 64, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(RadialGrid::build(2, 1.0, 64, 64, 2.0), std::invalid_argument);
}

TEST_CASE("quadrature integrates linear polynomials exactly against r^{n-1}") {
  for (int n : {2, 3, 5}) {
    RadialGrid g = RadialGrid::build(n, 3.0, 32, 48, 0.05);
    double a = 0.7, b = -0.2;
    double got = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      got += g.weight(i) * (a + b * g.node(i));
    double R = g.outer_radius();
    double expect = g.omega() * (a * std::pow(R, n) / n + b * std::pow(R, n + 1) / (n + 1));
    CHECK(std::fabs(got - expect) / std::fabs(expect) < 1e-12);
  }
}

TEST_CASE("dirichlet energy: constant and logarithmic profiles") {
  auto grid = log_grid(2, 1e-3, 1.0, 768);
  RadialFunction c1 = RadialFunction::sample(grid, [](double) { return 2.5; },
                                             BoundaryKind::DecayingTail);
  CHECK(dirichlet_energy(c1) == 0.0);

  // f = log(1/r) on [eps,1], constant on [0,eps]; energy 2 pi log(1/eps)
  double eps = 1e-3;
  RadialFunction f = RadialFunction::sample(
      grid, [&](double r) { return std::log(1.0 / std::max(r, eps)); },
      BoundaryKind::CompactSupport);
  double expect = 2.0 * M_PI * std::log(1.0 / eps);
  CHECK(std::fabs(dirichlet_energy(f) - expect) / expect < 1e-3);
}

TEST_CASE("dirichlet energy of the Moser profile is 1") {
  DimensionContext ctx = make_context(2);
  auto grid = share(moser_grid(ctx, 1.0, 1.0, 0.005));
  RadialFunction u = moser_function(ctx, 1.0, 1.0, grid);
  CHECK(std::fabs(dirichlet_energy(u) - 1.0) < 1e-4);
}

TEST_CASE("ln_norm_pow closed forms") {
  auto grid = uniform_grid(2, 1.0, 64);
  RadialFunction zero = RadialFunction::sample(grid, [](double) { return 0.0; },
                                               BoundaryKind::DecayingTail);
  CHECK(ln_norm_pow(zero) == 0.0);

  RadialFunction one = RadialFunction::sample(grid, [](double) { return 1.0; },
                                              BoundaryKind::DecayingTail);
  CHECK(std::fabs(ln_norm_pow(one) - M_PI) / M_PI < 1e-10);

  // n=3, f = e^{-r} on B_30: int f^3 dx = 4 pi * 2/27 = 8 pi/27
  std::vector<double> nodes;
  for (int j = 0; j <= 20000; ++j) nodes.push_back(10.0 * j / 20000.0);
  for (int j = 1; j <= 2000; ++j) nodes.push_back(10.0 + 20.0 * j / 2000.0);
  auto g3 = share(RadialGrid::from_nodes(3, std::move(nodes)));
  RadialFunction e3 = RadialFunction::sample(
      g3, [](double r) { return std::exp(-r); }, BoundaryKind::DecayingTail);
  double expect = 8.0 * M_PI / 27.0;
  CHECK(std::fabs(ln_norm_pow(e3) - expect) / expect < 1e-6);
}

TEST_CASE("sobolev norm homogeneity and normalize") {
  std::mt19937_64 rng(7);
  auto grid = share(RadialGrid::build(2, 2.0, 24, 48, 0.05));
  for (int trial = 0; trial < 10; ++trial) {
    RadialFunction f(grid, oracle::random_profile(rng, grid->size(), true),
                     BoundaryKind::CompactSupport);
    double t = 0.1 + 5.0 * trial;
    RadialFunction tf = f;
    for (double& v : tf.values) v *= t;
    CHECK(std::fabs(sobolev_norm(tf) - t * sobolev_norm(f)) <
          1e-12 * t * sobolev_norm(f));

    RadialFunction nrm = normalize(f);
    CHECK(std::fabs(sobolev_norm(nrm) - 1.0) < 1e-12);
    RadialFunction nrm2 = normalize(nrm);
    for (std::size_t i = 0; i < nrm.size(); ++i)
      CHECK(nrm2.values[i] == doctest::Approx(nrm.values[i]).epsilon(1e-14));
  }
  RadialFunction zero = RadialFunction::sample(grid, [](double) { return 0.0; },
                                               BoundaryKind::CompactSupport);
  CHECK_THROWS_AS(normalize(zero), std::invalid_argument);
}

TEST_CASE("tm functional: constants, monotonicity, ranking invariance") {
  DimensionContext ctx = make_context(2);
  auto grid = uniform_grid(2, 1.0, 128);
  RadialFunction zero = RadialFunction::sample(grid, [](double) { return 0.0; },
                                               BoundaryKind::DecayingTail);
  CHECK(tm_functional(ctx, zero, 1.0) == 0.0);

  RadialFunction one = RadialFunction::sample(grid, [](double) { return 1.0; },
                                              BoundaryKind::DecayingTail);
  double expect = (std::exp(1.0) - 1.0) * M_PI;
  CHECK(std::fabs(tm_functional(ctx, one, 1.0) - expect) / expect < 1e-8);

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 8; ++trial) {
    RadialFunction f(grid, oracle::random_profile(rng, grid->size(), false),
                     BoundaryKind::DecayingTail);
    double a1 = 0.5 + trial * 0.3, a2 = a1 + 0.7;
    CHECK(tm_functional(ctx, f, a1) <= tm_functional(ctx, f, a2));

    // ranking of normalized inputs is invariant under pre-scaling
    RadialFunction g(grid, oracle::random_profile(rng, grid->size(), false),
                     BoundaryKind::DecayingTail);
    double vf = tm_functional(ctx, normalize(f), 2.0);
    double vg = tm_functional(ctx, normalize(g), 2.0);
    RadialFunction f3 = f;
    for (double& v : f3.values) v *= 37.0;
    double vf3 = tm_functional(ctx, normalize(f3), 2.0);
    CHECK(vf3 == doctest::Approx(vf).epsilon(1e-12));
    CHECK(((vf > vg) == (vf3 > vg)));
  }
}

TEST_CASE("tm functional overflow guard") {
  DimensionContext ctx = make_context(2);
  auto grid = uniform_grid(2, 1.0, 64);

  // near the crossover the log path must agree with the direct path
  RadialFunction mid = RadialFunction::sample(
      grid, [&](double r) { return std::sqrt(650.0 / ctx.alpha_n) * (1.0 - 0.3 * r); },
      BoundaryKind::DecayingTail);
  TmValue direct = tm_functional_ex(ctx, mid, ctx.alpha_n);
  CHECK(!direct.overflowed);
  CHECK(std::log(direct.value) == doctest::Approx(direct.log_value).epsilon(1e-12));

  RadialFunction big = RadialFunction::sample(
      grid, [&](double r) { return std::sqrt(900.0 / ctx.alpha_n) * (1.0 - 0.3 * r); },
      BoundaryKind::DecayingTail);
  TmValue v = tm_functional_ex(ctx, big, ctx.alpha_n);
  CHECK(v.overflowed);
  CHECK(v.log_value > 700.0);
  CHECK(std::isfinite(v.value));
  CHECK(std::isfinite(v.log_value));
}

TEST_CASE("grid refinement changes smooth integrals below 1e-3") {
  DimensionContext ctx = make_context(2);
  auto coarse = uniform_grid(2, 4.0, 256);
  std::vector<double> fine_nodes;
  for (std::size_t i = 0; i + 1 < coarse->size(); ++i) {
    fine_nodes.push_back(coarse->node(i));
    fine_nodes.push_back(0.5 * (coarse->node(i) + coarse->node(i + 1)));
  }
  fine_nodes.push_back(coarse->outer_radius());
  auto fine = share(RadialGrid::from_nodes(2, std::move(fine_nodes)));

  auto f = [](double r) { return std::exp(-r * r) * (1.0 + 0.5 * r); };
  RadialFunction fc = RadialFunction::sample(coarse, f, BoundaryKind::DecayingTail);
  RadialFunction ff = RadialFunction::sample(fine, f, BoundaryKind::DecayingTail);
  CHECK(std::fabs(dirichlet_energy(fc) - dirichlet_energy(ff)) /
            dirichlet_energy(ff) < 1e-3);
  CHECK(std::fabs(ln_norm_pow(fc) - ln_norm_pow(ff)) / ln_norm_pow(ff) < 1e-3);
  double tc = tm_functional(ctx, fc, 2.0), tf = tm_functional(ctx, ff, 2.0);
  CHECK(std::fabs(tc - tf) / tf < 1e-3);
}

TEST_CASE("decay bound and tail error bar") {
  DimensionContext ctx = make_context(2);
  CHECK(decay_bound(ctx, 5.0) ==
        doctest::Approx(1.0 / (5.0 * std::sqrt(M_PI))).epsilon(1e-13));
  CHECK_THROWS_AS(decay_bound(ctx, 0.0), std::invalid_argument);

  auto grid = uniform_grid(2, 10.0, 200);
  RadialFunction f = RadialFunction::sample(
      grid, [](double r) { return std::exp(-r); }, BoundaryKind::DecayingTail);
  double bar = tail_error_bar(f);
  // true tail: int_10^inf 2 pi r e^{-2r} dr
  double truth = oracle::integrate(
      [](double r) { return 2.0 * M_PI * r * std::exp(-2.0 * r); }, 10.0, 40.0);
  CHECK(bar >= truth * 0.9);
  CHECK(bar <= truth * 3.0);
}

TEST_SUITE_END();
