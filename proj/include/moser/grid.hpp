#pragma once

#include <memory>
#include <string>
#include <vector>

#include "moser/constants.hpp"

namespace moser {

/// How a radial profile behaves at the grid's outer radius.
enum class BoundaryKind {
  CompactSupport,  ///< vanishes at r = R; models H^{1,n}_0(B_R)
  DecayingTail,    ///< decays at infinity; the grid truncates R^n at R
};

std::string to_string(BoundaryKind k);
BoundaryKind boundary_kind_from_string(const std::string& s);

/// Descriptor of how the nodes were generated (kept for serialization).
struct GridSpec {
  std::string kind;  // "graded", "custom" or "transport"
  double inner_scale = 0.0;
  int inner_count = 0;
  int outer_count = 0;
};

/// Radial discretization of a ball B_R in R^n.
///
/// Nodes are strictly increasing radii r_0 < ... < r_M with r_0 >= 0.  The
/// quadrature rule integrates the piecewise-linear interpolant of a nodal
/// integrand exactly against the radial measure omega r^{n-1} dr, cell by
/// cell, so integrating the constant 1 reproduces |B_R| to rounding.
/// Grids are immutable after construction.
class RadialGrid {
 public:
  static constexpr int kMinNodes = 16;

  /// Graded grid: the zero node, inner_count geometrically spaced nodes
  /// ending at inner_scale (kNodesPerDecade nodes per decade, so the grading
  /// reaches inner_scale * 10^{-(inner_count-1)/kNodesPerDecade}), then
  /// outer_count uniformly spaced nodes up to R.  counts >= 8 each.
  static RadialGrid build(int n, double R, int inner_count, int outer_count,
                          double inner_scale);

  /// Grid from an explicit node list (strictly increasing, first node >= 0).
  static RadialGrid from_nodes(int n, std::vector<double> nodes);

  /// Grid whose quadrature weights are prescribed per node instead of being
  /// derived from the node positions.  Used by the rearrangement transport,
  /// which relocates (value, mass) atoms; weights must be positive.
  static RadialGrid transport(int n, std::vector<double> nodes,
                              std::vector<double> weights, double outer_radius);

  int dim() const { return n_; }
  double omega() const { return omega_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  double node(std::size_t i) const { return nodes_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  double outer_radius() const { return outer_radius_; }
  double ball_volume() const;  ///< |B_R| = omega R^n / n

  /// omega * (r_{c+1}^n - r_c^n) / n for cell c (radial measure of the shell).
  double cell_moment(std::size_t c) const { return cell_moment_[c]; }
  std::size_t cells() const { return nodes_.size() - 1; }

  const GridSpec& spec() const { return spec_; }

 private:
  RadialGrid() = default;
  void finalize(bool derive_weights);

  int n_ = 0;
  double omega_ = 0.0;
  double outer_radius_ = 0.0;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> cell_moment_;
  GridSpec spec_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

/// A radial profile sampled at the grid nodes, linearly interpolated in
/// between and extended by its boundary kind outside.  Carrier for
/// maximizers, Green functions, bubbles and test functions.
struct RadialFunction {
  GridPtr grid;
  std::vector<double> values;
  BoundaryKind kind = BoundaryKind::DecayingTail;

  RadialFunction() = default;
  RadialFunction(GridPtr g, std::vector<double> v, BoundaryKind k);

  /// Samples f(r) at every node.  For compact support the last node is
  /// pinned to zero.
  template <class F>
  static RadialFunction sample(GridPtr g, F&& f, BoundaryKind k) {
    std::vector<double> v(g->size());
    for (std::size_t i = 0; i < g->size(); ++i) v[i] = f(g->node(i));
    if (k == BoundaryKind::CompactSupport) v.back() = 0.0;
    return RadialFunction(std::move(g), std::move(v), k);
  }

  std::size_t size() const { return values.size(); }
  double operator()(double r) const;  ///< linear interpolation; 0 beyond R
  void validate() const;              ///< finite values, support condition
};

/// omega * int |f'|^n r^{n-1} dr with the per-cell derivative; 0 iff f const.
double dirichlet_energy(const RadialFunction& f);

/// int |f|^n dx over the truncated domain.
double ln_norm_pow(const RadialFunction& f);

/// Full Sobolev norm (dirichlet_energy + ln_norm_pow)^{1/n}.
double sobolev_norm(const RadialFunction& f);

/// f / sobolev_norm(f).  Rejects (near-)zero input.
RadialFunction normalize(const RadialFunction& f);

/// Trudinger-Moser functional int Phi(alpha |f|^{n/(n-1)}) dx.
///
/// When the exponent alpha |f|^{n/(n-1)} exceeds ~700 at some node the sum
/// is evaluated in the log domain; `value` is then capped at DBL_MAX and
/// `overflowed` set, with `log_value` carrying the true magnitude.
struct TmValue {
  double value = 0.0;
  double log_value = 0.0;
  bool overflowed = false;
};

TmValue tm_functional_ex(const DimensionContext& ctx, const RadialFunction& f,
                         double alpha);
double tm_functional(const DimensionContext& ctx, const RadialFunction& f,
                     double alpha);

/// Pointwise decay bound for radial nonincreasing u with int u^n <= 1:
/// u(L) <= (n / (omega L^n))^{1/n}, from u(L)^n |B_L| <= int_{B_L} u^n.
double decay_bound(const DimensionContext& ctx, double L);

/// Crude bound on the neglected tail int_{B_R^c} |f|^n dx of a decaying
/// profile, from the log-slope of the last cells.  Returns +inf (flag) when
/// the tail is not integrably decaying at the boundary.
double tail_error_bar(const RadialFunction& f);

}  // namespace moser
