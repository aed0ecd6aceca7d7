#include "moser/rearrange.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace moser {

RadialFunction decreasing_rearrangement(const RadialFunction& f) {
  for (double v : f.values)
    if (v < 0.0)
      throw std::invalid_argument("decreasing_rearrangement: input must be nonnegative");

  bool sorted = true;
  for (std::size_t i = 0; i + 1 < f.values.size(); ++i)
    if (f.values[i] < f.values[i + 1]) { sorted = false; break; }
  if (sorted) return f;

  const RadialGrid& g = *f.grid;
  std::vector<std::size_t> order(f.values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return f.values[a] > f.values[b];
  });

  const int n = g.dim();
  std::vector<double> nodes(order.size()), weights(order.size()), values(order.size());
  double cum = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double w = g.weight(order[k]);
    // centroid (in volume) of the k-th equal-mass band [cum, cum + w];
    // nudged upward when rounding collapses adjacent centroids
    double rho = std::pow((cum + 0.5 * w) * n / g.omega(), 1.0 / n);
    if (k > 0 && rho <= nodes[k - 1])
      rho = std::nextafter(nodes[k - 1], std::numeric_limits<double>::infinity());
    nodes[k] = rho;
    weights[k] = w;
    values[k] = f.values[order[k]];
    cum += w;
  }

  auto grid = std::make_shared<RadialGrid>(
      RadialGrid::transport(n, std::move(nodes), std::move(weights), g.outer_radius()));
  return RadialFunction(std::move(grid), std::move(values), f.kind);
}

namespace {

// Level-set machinery for the piecewise-linear interpolant of f.
struct LevelSet {
  const RadialFunction& f;
  const RadialGrid& g;
  int n;

  // super-level-set volume mu(t) = |{f > t}| of the interpolant
  double volume(double t) const {
    double vol = 0.0;
    for (std::size_t c = 0; c < g.cells(); ++c) {
      double a = f.values[c], b = f.values[c + 1];
      double ra = g.node(c), rb = g.node(c + 1);
      if (a <= t && b <= t) continue;
      if (a > t && b > t) {
        vol += g.cell_moment(c);
        continue;
      }
      double rc = ra + (t - a) / (b - a) * (rb - ra);
      double lo = a > t ? ra : rc;
      double hi = a > t ? rc : rb;
      vol += g.omega() * (std::pow(hi, n) - std::pow(lo, n)) / n;
    }
    return vol;
  }

  // |mu'(t)| = sum over cells crossing level t of omega r(t)^{n-1} / |slope|
  double volume_rate(double t) const {
    double rate = 0.0;
    for (std::size_t c = 0; c < g.cells(); ++c) {
      double a = f.values[c], b = f.values[c + 1];
      if ((a - t) * (b - t) >= 0.0) continue;
      double ra = g.node(c), rb = g.node(c + 1);
      double rc = ra + (t - a) / (b - a) * (rb - ra);
      double slope = (b - a) / (rb - ra);
      rate += g.omega() * std::pow(rc, n - 1) / std::fabs(slope);
    }
    return rate;
  }

  // integrand of the rearranged Dirichlet energy in the level variable
  double energy_density(double t) const {
    double rate = volume_rate(t);
    if (rate == 0.0) return 0.0;
    double rho = std::pow(n * volume(t) / g.omega(), 1.0 / n);
    return std::pow(g.omega(), n) * std::pow(rho, n * (n - 1)) /
           std::pow(rate, n - 1);
  }
};

// Composite two-point Gauss per level band.  The crossing-cell set is
// constant strictly inside a band, so open nodes avoid the nodal levels
// where it changes; the rule is exact for the polynomial densities of
// n <= 4 and far below the 1e-8 slack beyond.
double gauss_levels(const LevelSet& ls, double lo, double hi) {
  const int pieces = 32;
  const double off = 0.5 / std::sqrt(3.0);
  double h = (hi - lo) / pieces;
  double sum = 0.0;
  for (int k = 0; k < pieces; ++k) {
    double mid = lo + (k + 0.5) * h;
    sum += 0.5 * h * (ls.energy_density(mid - off * h) +
                      ls.energy_density(mid + off * h));
  }
  return sum;
}

}  // namespace

std::pair<double, double> polya_szego_check(const RadialFunction& f) {
  for (double v : f.values)
    if (v < 0.0)
      throw std::invalid_argument("polya_szego_check: input must be nonnegative");
  double before = dirichlet_energy(f);

  LevelSet ls{f, *f.grid, f.grid->dim()};
  std::vector<double> levels(f.values);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  double after = 0.0;
  for (std::size_t k = 0; k + 1 < levels.size(); ++k)
    after += gauss_levels(ls, levels[k], levels[k + 1]);
  return {before, after};
}

}  // namespace moser
