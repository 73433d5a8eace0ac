#pragma once

// Deviation quantiles and tail bounds for Gaussian quadratic forms xi'B xi,
// xi standard normal.  All quantities are computed through the normalized
// matrix B/lamstar whose spectrum lives in (0,1]; results are rescaled back.

#include "concfield/linalg.hpp"
#include "concfield/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace concfield {

enum class QuantileBranch { kSqrt, kLinear, kLargeDeviation };

[[nodiscard]] inline const char* branch_name(QuantileBranch b) {
  switch (b) {
    case QuantileBranch::kSqrt:
      return "sqrt";
    case QuantileBranch::kLinear:
      return "linear";
    default:
      return "ld";
  }
}

// Spectral summaries of B after dividing out the top eigenvalue.
struct NormalizedQuad {
  double lamstar = 0.0;  // lambda_max(B)
  double trace = 0.0;    // tr B
  double p_app = 0.0;    // tr(B) / lamstar
  double v_app = 0.0;    // sqrt(2 tr B^2) / lamstar
  double g_tilde = 0.0;  // MGF range (unchanged by the normalization)
  Vector spectrum;       // eigenvalues of B / lamstar, in (0, 1]
};

// Corner of the moderate-deviation region: the largest x the two small-x
// branches cover, plus the slope data for the branch beyond it.
struct QuadCritical {
  double w_c = 0.0;
  double mu_c = 0.0;
  double y_c = 0.0;
  double x_c = 0.0;
  double g_c = 0.0;
};

struct QuantileReport {
  double z_dev = 0.0;    // quantile of xi'B xi - tr(B)
  double z_total = 0.0;  // tr(B) + z_dev
  double x_c = 0.0;
  QuantileBranch branch = QuantileBranch::kSqrt;
};

[[nodiscard]] inline double critical_w_equation(double w) {
  return w * (1.0 + w) / std::sqrt(1.0 + w * w);
}

// Solves w(1+w)/sqrt(1+w^2) = t for w > 0.  The left side is increasing, so
// a safeguarded Newton iteration (bisection fallback) converges for any
// t > 0.  f'(w) = (1 + 2w + w^3) / (1+w^2)^{3/2}.
[[nodiscard]] inline double solve_critical_w(double t) {
  if (!(t > 0.0))
    throw std::domain_error("solve_critical_w: t must be positive");
  double lo = 0.0;
  double hi = std::max(t, 1.0);
  while (critical_w_equation(hi) < t) hi *= 2.0;
  double w = std::min(t, hi);  // f(w) ~ w near 0, ~ w + 1 at infinity
  for (int it = 0; it < 200; ++it) {
    const double wsq = w * w;
    const double f = critical_w_equation(w) - t;
    if (f > 0.0)
      hi = w;
    else
      lo = w;
    const double fp = (1.0 + 2.0 * w + wsq * w) / std::pow(1.0 + wsq, 1.5);
    double next = w - f / fp;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - w);
    w = next;
    if (step <= 1e-16 * std::max(1.0, w)) break;
  }
  return w;
}

[[nodiscard]] inline NormalizedQuad normalized_quad(const SpdMatrix& b,
                                                    double g) {
  NormalizedQuad q;
  const Vector lam = b.eigenvalues();
  q.lamstar = lam.maxCoeff();
  if (!(q.lamstar > 0.0))
    throw std::domain_error("quadform: top eigenvalue must be positive");
  q.trace = lam.sum();
  q.p_app = q.trace / q.lamstar;
  q.v_app = std::sqrt(2.0 * lam.squaredNorm()) / q.lamstar;
  q.g_tilde = g;
  if (!(g * g >= 2.0 * q.trace))
    throw std::domain_error("g_cond: require g^2 >= 2*tr(B)");
  q.spectrum = lam / q.lamstar;
  return q;
}

[[nodiscard]] inline QuadCritical critical_params(const NormalizedQuad& q) {
  QuadCritical c;
  c.w_c = solve_critical_w(q.g_tilde / std::sqrt(q.p_app));
  const double wsq = c.w_c * c.w_c;
  c.mu_c = std::min(wsq / (1.0 + wsq), 2.0 / 3.0);
  c.y_c = std::sqrt((1.0 + wsq) * q.p_app);
  double log_det = 0.0;
  for (int i = 0; i < q.spectrum.size(); ++i)
    log_det += std::log1p(-c.mu_c * q.spectrum[i]);
  c.x_c = 0.5 * (c.mu_c * c.y_c * c.y_c + log_det);
  c.g_c = q.g_tilde * c.w_c / (1.0 + c.w_c);
  return c;
}

namespace detail {

[[nodiscard]] inline QuantileReport quantile_from_params(
    double x, const NormalizedQuad& q, const QuadCritical& c) {
  if (!(x > 0.0)) throw std::domain_error("x_cond: x must be positive");
  QuantileReport r;
  r.x_c = c.x_c;
  if (x <= c.x_c) {
    if (x <= q.v_app / 18.0) {
      r.branch = QuantileBranch::kSqrt;
      r.z_dev = q.lamstar * 2.0 * q.v_app * std::sqrt(x);
    } else {
      r.branch = QuantileBranch::kLinear;
      r.z_dev = q.lamstar * 6.0 * x;
    }
  } else {
    r.branch = QuantileBranch::kLargeDeviation;
    const double y = c.y_c + 2.0 * (x - c.x_c) / c.g_c;
    r.z_dev = q.lamstar * y * y - q.trace;
  }
  r.z_total = q.trace + r.z_dev;
  return r;
}

}  // namespace detail

[[nodiscard]] inline QuantileReport deviation_quantile_report(
    double x, const SpdMatrix& b, double g) {
  const NormalizedQuad q = normalized_quad(b, g);
  return detail::quantile_from_params(x, q, critical_params(q));
}

[[nodiscard]] inline double deviation_quantile(double x, const SpdMatrix& b,
                                               double g) {
  return deviation_quantile_report(x, b, g).z_dev;
}

// Piecewise-branch quantile made nondecreasing in x: the raw rule can step
// down where the sqrt branch hands over, so take the running maximum over
// every branch value attained at or before x.
[[nodiscard]] inline double monotone_quantile_envelope(double x,
                                                       const SpdMatrix& b,
                                                       double g) {
  const NormalizedQuad q = normalized_quad(b, g);
  const QuadCritical c = critical_params(q);
  double z = detail::quantile_from_params(x, q, c).z_dev;
  const double sqrt_end = std::min(q.v_app / 18.0, c.x_c);
  if (x > sqrt_end)
    z = std::max(z, q.lamstar * 2.0 * q.v_app * std::sqrt(sqrt_end));
  if (x > c.x_c && c.x_c > q.v_app / 18.0)
    z = std::max(z, q.lamstar * 6.0 * c.x_c);
  return z;
}

// Deviation quantile mapped back to model coordinates: lam0 * result bounds
// the squared norm tr(B) + deviation for B = D0^{-1} V0^2 D0^{-1}.
[[nodiscard]] inline double total_quantile(double x, const EffectiveDims& eff,
                                           double g) {
  const SpdMatrix b(eff.b);
  return (eff.p_eff + deviation_quantile(x, b, g)) / eff.lam0;
}

// P(xi'B xi > y^2), by inverting the quantile branches.  Monotone
// nonincreasing in y and consistent with deviation_quantile: plugging in
// y^2 = tr(B) + deviation_quantile(x) recovers at most 2e^{-x} + 8.4e^{-x_c}.
[[nodiscard]] inline double tail_bound(double y, const SpdMatrix& b,
                                       double g) {
  const NormalizedQuad q = normalized_quad(b, g);
  const QuadCritical c = critical_params(q);
  const double y_til = y / std::sqrt(q.lamstar);
  if (y_til >= c.y_c) {
    const double log_p = -c.x_c - c.g_c * (y_til - c.y_c) / 2.0;
    return std::min(1.0, 8.4 * std::exp(log_p));
  }
  const double dev = y_til * y_til - q.p_app;
  if (dev <= 0.0) return 1.0;
  const double half = dev / (2.0 * q.v_app);
  const double c1 = std::min(half * half, q.v_app / 18.0);
  const double c2 = (dev / 6.0 > q.v_app / 18.0) ? dev / 6.0 : 0.0;
  const double x_inv = std::min(std::max(c1, c2), c.x_c);
  return std::min(1.0, 2.0 * std::exp(-x_inv) + 8.4 * std::exp(-c.x_c));
}

}  // namespace concfield
