#include "moser/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace moser {

std::string to_string(BoundaryKind k) {
  return k == BoundaryKind::CompactSupport ? "compact-support" : "decaying-tail";
}

BoundaryKind boundary_kind_from_string(const std::string& s) {
  if (s == "compact-support") return BoundaryKind::CompactSupport;
  if (s == "decaying-tail") return BoundaryKind::DecayingTail;
  throw std::invalid_argument("unknown boundary kind: " + s);
}

namespace {
constexpr double kNodesPerDecade = 8.0;
}

RadialGrid RadialGrid::build(int n, double R, int inner_count, int outer_count,
                             double inner_scale) {
  if (!(R > 0.0)) throw std::invalid_argument("RadialGrid::build: R must be positive");
  if (inner_count < 8 || outer_count < 8)
    throw std::invalid_argument("RadialGrid::build: node counts must be >= 8");
  if (!(inner_scale > 0.0) || !(inner_scale < R))
    throw std::invalid_argument("RadialGrid::build: need 0 < inner_scale < R");

  RadialGrid g;
  g.n_ = n;
  g.nodes_.reserve(1 + inner_count + outer_count);
  g.nodes_.push_back(0.0);
  const double ratio = std::pow(10.0, 1.0 / kNodesPerDecade);
  for (int j = inner_count - 1; j >= 0; --j)
    g.nodes_.push_back(inner_scale * std::pow(ratio, -j));
  const double h = (R - inner_scale) / outer_count;
  for (int j = 1; j <= outer_count; ++j) g.nodes_.push_back(inner_scale + j * h);
  g.nodes_.back() = R;  // exact outer radius
  g.spec_ = {"graded", inner_scale, inner_count, outer_count};
  g.finalize(true);
  return g;
}

RadialGrid RadialGrid::from_nodes(int n, std::vector<double> nodes) {
  RadialGrid g;
  g.n_ = n;
  g.nodes_ = std::move(nodes);
  g.spec_ = {"custom", 0.0, 0, 0};
  g.finalize(true);
  return g;
}

RadialGrid RadialGrid::transport(int n, std::vector<double> nodes,
                                 std::vector<double> weights, double outer_radius) {
  RadialGrid g;
  g.n_ = n;
  g.nodes_ = std::move(nodes);
  g.weights_ = std::move(weights);
  g.outer_radius_ = outer_radius;
  g.spec_ = {"transport", 0.0, 0, 0};
  if (g.weights_.size() != g.nodes_.size())
    throw std::invalid_argument("RadialGrid::transport: weights/nodes size mismatch");
  g.finalize(false);
  return g;
}

void RadialGrid::finalize(bool derive_weights) {
  if (n_ < 2) throw std::invalid_argument("RadialGrid: dimension must be >= 2");
  if (nodes_.size() < kMinNodes)
    throw std::invalid_argument("RadialGrid: need at least 16 nodes");
  if (!(nodes_.front() >= 0.0))
    throw std::invalid_argument("RadialGrid: first node must be >= 0");
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
    if (!(nodes_[i] < nodes_[i + 1]))
      throw std::invalid_argument("RadialGrid: nodes must be strictly increasing");

  omega_ = make_context(n_).omega;
  if (derive_weights) outer_radius_ = nodes_.back();

  cell_moment_.assign(nodes_.size() - 1, 0.0);
  if (derive_weights) weights_.assign(nodes_.size(), 0.0);
  for (std::size_t c = 0; c + 1 < nodes_.size(); ++c) {
    const double a = nodes_[c], b = nodes_[c + 1];
    // Exact moments of r^{n-1} over the cell; the linear-interpolant rule
    // splits them between the two endpoint nodes.
    const double m0 = (std::pow(b, n_) - std::pow(a, n_)) / n_;
    cell_moment_[c] = omega_ * m0;
    if (derive_weights) {
      const double m1 = (std::pow(b, n_ + 1) - std::pow(a, n_ + 1)) / (n_ + 1);
      const double right = (m1 - a * m0) / (b - a);
      weights_[c] += omega_ * (m0 - right);
      weights_[c + 1] += omega_ * right;
    }
  }
  for (double w : weights_)
    if (!(w > 0.0)) throw std::runtime_error("RadialGrid: nonpositive quadrature weight (grid too deep for this dimension?)");
}

double RadialGrid::ball_volume() const {
  return omega_ * std::pow(outer_radius_, n_) / n_;
}

RadialFunction::RadialFunction(GridPtr g, std::vector<double> v, BoundaryKind k)
    : grid(std::move(g)), values(std::move(v)), kind(k) {
  if (!grid) throw std::invalid_argument("RadialFunction: null grid");
  if (values.size() != grid->size())
    throw std::invalid_argument("RadialFunction: values/grid size mismatch");
}

void RadialFunction::validate() const {
  for (double v : values)
    if (!std::isfinite(v)) throw std::runtime_error("RadialFunction: non-finite value");
  if (kind == BoundaryKind::CompactSupport && values.back() != 0.0)
    throw std::runtime_error("RadialFunction: compact support requires value 0 at the outer radius");
}

double RadialFunction::operator()(double r) const {
  const auto& x = grid->nodes();
  if (r <= x.front()) return values.front();
  if (r >= x.back()) return r == x.back() ? values.back() : 0.0;
  auto it = std::upper_bound(x.begin(), x.end(), r);
  std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
  double t = (r - x[i]) / (x[i + 1] - x[i]);
  return values[i] + t * (values[i + 1] - values[i]);
}

double dirichlet_energy(const RadialFunction& f) {
  const RadialGrid& g = *f.grid;
  if (g.size() < 2) throw std::invalid_argument("dirichlet_energy: need >= 2 nodes");
  const int n = g.dim();
  double e = 0.0;
  for (std::size_t c = 0; c < g.cells(); ++c) {
    const double slope =
        (f.values[c + 1] - f.values[c]) / (g.node(c + 1) - g.node(c));
    if (slope != 0.0) e += std::pow(std::fabs(slope), n) * g.cell_moment(c);
  }
  return e;
}

double ln_norm_pow(const RadialFunction& f) {
  const RadialGrid& g = *f.grid;
  const int n = g.dim();
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    s += g.weight(i) * std::pow(std::fabs(f.values[i]), n);
  return s;
}

double sobolev_norm(const RadialFunction& f) {
  return std::pow(dirichlet_energy(f) + ln_norm_pow(f), 1.0 / f.grid->dim());
}

RadialFunction normalize(const RadialFunction& f) {
  double s = sobolev_norm(f);
  if (!(s > 0.0) || !std::isfinite(s))
    throw std::invalid_argument("normalize: zero (or non-finite) input");
  RadialFunction out = f;
  for (double& v : out.values) v /= s;
  return out;
}

TmValue tm_functional_ex(const DimensionContext& ctx, const RadialFunction& f,
                         double alpha) {
  if (ctx.n != f.grid->dim())
    throw std::invalid_argument("tm_functional: context/grid dimension mismatch");
  if (!(alpha > 0.0)) throw std::invalid_argument("tm_functional: alpha must be positive");

  const RadialGrid& g = *f.grid;
  const double p = ctx.growth();
  std::vector<double> expo(g.size());
  double expo_max = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    expo[i] = alpha * std::pow(std::fabs(f.values[i]), p);
    expo_max = std::max(expo_max, expo[i]);
  }

  TmValue out;
  if (expo_max <= 700.0) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (expo[i] > 0.0) s += g.weight(i) * phi(ctx, expo[i]);
    out.value = s;
    out.log_value = s > 0.0 ? std::log(s) : -std::numeric_limits<double>::infinity();
    return out;
  }

  // Log-domain evaluation: log-sum-exp of log(w_i) + log(Phi(t_i)).
  double lmax = -std::numeric_limits<double>::infinity();
  std::vector<double> lterm(g.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (expo[i] <= 0.0) continue;
    lterm[i] = std::log(g.weight(i)) + log_phi(ctx, expo[i]);
    lmax = std::max(lmax, lterm[i]);
  }
  double acc = 0.0;
  for (double lt : lterm)
    if (std::isfinite(lt)) acc += std::exp(lt - lmax);
  out.log_value = lmax + std::log(acc);
  if (out.log_value < std::log(std::numeric_limits<double>::max())) {
    out.value = std::exp(out.log_value);
    out.overflowed = expo_max > 700.0;  // flagged: log path was required
  } else {
    out.value = std::numeric_limits<double>::max();
    out.overflowed = true;
  }
  return out;
}

double tm_functional(const DimensionContext& ctx, const RadialFunction& f,
                     double alpha) {
  return tm_functional_ex(ctx, f, alpha).value;
}

double decay_bound(const DimensionContext& ctx, double L) {
  if (!(L > 0.0)) throw std::invalid_argument("decay_bound: L must be positive");
  return std::pow(ctx.n / (ctx.omega * std::pow(L, ctx.n)), 1.0 / ctx.n);
}

double tail_error_bar(const RadialFunction& f) {
  const RadialGrid& g = *f.grid;
  if (f.kind == BoundaryKind::CompactSupport) return 0.0;
  const int n = g.dim();
  const std::size_t M = g.size() - 1;
  const double R = g.node(M);
  const double uR = std::fabs(f.values[M]);
  if (uR == 0.0) return 0.0;
  // Fit an exponential decay rate on the last few cells and integrate
  // omega r^{n-1} u(R)^n e^{-n kappa (r-R)} beyond R.
  std::size_t j = M >= 4 ? M - 4 : 0;
  double uj = std::fabs(f.values[j]);
  if (!(uj > uR)) return std::numeric_limits<double>::infinity();
  double kappa = std::log(uj / uR) / (R - g.node(j));
  double denom = n * kappa - (n - 1) / R;
  if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
  return g.omega() * std::pow(R, n - 1) * std::pow(uR, n) / denom;
}

}  // namespace moser
