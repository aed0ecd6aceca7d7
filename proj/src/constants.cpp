#include "moser/constants.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace moser {

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int j = 2; j <= k; ++j) f *= j;
  return f;
}

// Gamma(n/2) for integer n >= 2: (n/2-1)! for even n,
// sqrt(pi) * (n-2)!! / 2^{(n-1)/2} for odd n.
double gamma_half_integer(int n) {
  if (n % 2 == 0) return factorial(n / 2 - 1);
  double dfac = 1.0;
  for (int j = n - 2; j >= 3; j -= 2) dfac *= j;
  return std::sqrt(M_PI) * dfac / std::pow(2.0, (n - 1) / 2);
}

Rational binomial(int n, int k) {
  boost::multiprecision::cpp_int num = 1, den = 1;
  for (int j = 0; j < k; ++j) {
    num *= n - j;
    den *= j + 1;
  }
  return Rational(num, den);
}

}  // namespace

DimensionContext make_context(int n) {
  if (n < 2) throw std::invalid_argument("make_context: dimension must be >= 2, got " + std::to_string(n));
  DimensionContext ctx;
  ctx.n = n;
  ctx.omega = 2.0 * std::pow(M_PI, 0.5 * n) / gamma_half_integer(n);
  ctx.alpha_n = n * std::pow(ctx.omega, 1.0 / (n - 1));
  ctx.c_n = std::pow(ctx.omega / n, 1.0 / (n - 1));
  double h = 0.0;
  for (int j = 1; j <= n - 1; ++j) h += 1.0 / j;
  ctx.harmonic = h;
  ctx.threshold_poly = std::pow(ctx.alpha_n, n - 1) / factorial(n - 1);
  return ctx;
}

namespace {

void check_t(double t, const char* who) {
  if (!(t >= 0.0)) throw std::invalid_argument(std::string(who) + ": argument must be >= 0");
}

// Tail series sum_{j>=j0} t^j/j!.  All terms positive, so no cancellation;
// used below the crossover where e^t minus the Taylor head would cancel.
double exp_tail(double t, int j0) {
  if (t == 0.0) return j0 == 0 ? 1.0 : 0.0;
  double term = 1.0;
  for (int j = 1; j <= j0; ++j) term *= t / j;
  double sum = term;
  for (int j = j0 + 1; j < j0 + 500; ++j) {
    term *= t / j;
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

double exp_head(double t, int j_last) {
  double term = 1.0, sum = 0.0;
  for (int j = 0; j <= j_last; ++j) {
    if (j > 0) term *= t / j;
    sum += term;
  }
  return sum;
}

constexpr double kSeriesCrossover = 35.0;

}  // namespace

double phi(const DimensionContext& ctx, double t) {
  check_t(t, "phi");
  if (t < kSeriesCrossover) return exp_tail(t, ctx.n - 1);
  return std::exp(t) - exp_head(t, ctx.n - 2);
}

double phi_prime(const DimensionContext& ctx, double t) {
  check_t(t, "phi_prime");
  if (ctx.n == 2) return std::exp(t);
  if (t < kSeriesCrossover) return exp_tail(t, ctx.n - 2);
  return std::exp(t) - exp_head(t, ctx.n - 3);
}

double log_phi(const DimensionContext& ctx, double t) {
  check_t(t, "log_phi");
  if (t < kSeriesCrossover) return std::log(phi(ctx, t));
  // Phi(t) = e^t (1 - head(t) e^{-t}); the head is far below e^t here.
  double head = exp_head(t, ctx.n - 2);
  return t + std::log1p(-std::exp(std::log(head) - t));
}

IdentityCheck alternating_identity(int m) {
  if (m < 1) throw std::invalid_argument("alternating_identity: m must be >= 1");
  Rational lhs = 0;
  for (int k = 0; k <= m; ++k) {
    Rational term = binomial(m, k) / (m - k + 1);
    lhs += ((m - k) % 2 == 0) ? term : -term;
  }
  return {lhs, Rational(1, m + 1)};
}

IdentityCheck harmonic_identity(int n) {
  if (n < 2) throw std::invalid_argument("harmonic_identity: n must be >= 2");
  Rational lhs = 0;
  for (int k = 0; k <= n - 2; ++k) {
    Rational term = binomial(n - 1, k) / (n - k - 1);
    lhs += ((n - 1 - k) % 2 == 0) ? term : -term;
  }
  lhs = -lhs;
  Rational rhs = 0;
  for (int j = 1; j <= n - 1; ++j) rhs += Rational(1, j);
  return {lhs, rhs};
}

}  // namespace moser
