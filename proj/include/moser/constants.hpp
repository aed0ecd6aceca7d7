#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace moser {

using Rational = boost::multiprecision::cpp_rational;

/// All dimension-dependent constants of the critical Trudinger-Moser setting
/// in R^n.  Built once per dimension by make_context(); immutable afterwards.
struct DimensionContext {
  int n;                  ///< space dimension, n >= 2
  double omega;           ///< surface measure of the unit sphere S^{n-1}
  double alpha_n;         ///< critical exponent constant n * omega^{1/(n-1)}
  double c_n;             ///< bubble constant (omega/n)^{1/(n-1)}
  double harmonic;        ///< H_{n-1} = 1 + 1/2 + ... + 1/(n-1)
  double threshold_poly;  ///< alpha_n^{n-1} / (n-1)!

  /// Critical growth exponent n/(n-1).
  double growth() const { return static_cast<double>(n) / (n - 1); }
};

/// Builds the constants for dimension n (n >= 2).  omega is evaluated from
/// the closed forms of Gamma(n/2) at integer and half-integer arguments, so
/// the values are bit-reproducible.  Throws std::invalid_argument for n < 2.
DimensionContext make_context(int n);

/// Truncated exponential Phi(t) = e^t - sum_{j=0}^{n-2} t^j/j!, t >= 0.
/// Phi(0) = 0, Phi is strictly increasing, Phi(t) ~ t^{n-1}/(n-1)! at 0.
/// Evaluated by the tail series for moderate t to avoid cancellation.
double phi(const DimensionContext& ctx, double t);

/// Derivative Phi'(t) = e^t - sum_{j=0}^{n-3} t^j/j! (the sum is empty for
/// n = 2, i.e. Phi'(t) = e^t there).
double phi_prime(const DimensionContext& ctx, double t);

/// log(Phi(t)), finite-overflow-safe for large t (returns roughly t there).
/// log_phi(0) = -infinity.
double log_phi(const DimensionContext& ctx, double t);

/// Result of one of the exact combinatorial identities; both sides are kept
/// as exact rationals so equality can be asserted without a tolerance.
struct IdentityCheck {
  Rational lhs;
  Rational rhs;
  bool holds() const { return lhs == rhs; }
};

/// sum_{k=0}^{m} (-1)^{m-k} C(m,k) / (m-k+1)  ==  1/(m+1),   m >= 1.
IdentityCheck alternating_identity(int m);

/// -sum_{k=0}^{n-2} C(n-1,k) (-1)^{n-1-k} / (n-k-1)  ==  H_{n-1},  n >= 2.
IdentityCheck harmonic_identity(int n);

}  // namespace moser
