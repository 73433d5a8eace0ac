#pragma once

// Assembly of the supremum bound for smooth random fields: the local
// quadratic bracket and its error budget, the contraction factor tau, the
// minimal radius at which the global exit argument applies, and the final
// offset report combining the quadratic-form quantile with the error term.

#include "concfield/linalg.hpp"
#include "concfield/model.hpp"
#include "concfield/philox.hpp"
#include "concfield/quadform.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace concfield {

// Quadratic bracket at radius r: the field is sandwiched by the quadratic
// model with curvature Ddelta_sq = D0^2 (1 - delta) - rho V0^2 up to
// err_bound, where delta = delta0 eps r and rho = 3 nu0 omega0 eps r.
struct LocalBudget {
  double r = 0.0;
  double delta = 0.0;
  double rho = 0.0;
  double err_bound = 0.0;
  Matrix ddelta_sq;
};

struct BoundValidity {
  bool eps_cond = false;     // eps * sqrt(x + 3p) < 1
  bool global_cond = false;  // x + 3p >= 2.5
  bool tau_cond = false;     // tau < 1
  bool xc_cond = false;      // x within the quadratic-form corner x_c (soft)
};

struct BoundReport {
  double x = 0.0;
  double r0_used = 0.0;
  double tau = 0.0;
  double quantile_term = 0.0;  // (tr B + deviation) / (2 (1 - tau))
  double error_term = 0.0;     // 6 nu0 omega0 eps r0 (1 + sqrt(x+3p))^2
  double total_offset = 0.0;
  double prob_multiplier = 0.0;
  double implied_c = 0.0;
  BoundValidity validity;
};

[[nodiscard]] inline LocalBudget local_budget(const FieldModel& m, double r,
                                              double x) {
  if (!(r > 0.0) || !(x > 0.0))
    throw std::invalid_argument("local_budget: r > 0 and x > 0 required");
  LocalBudget budget;
  budget.r = r;
  budget.delta = m.delta0 * m.eps * r;
  budget.rho = 3.0 * m.nu0 * m.omega0 * m.eps * r;
  const double s = 1.0 + std::sqrt(x + 3.0 * m.dim);
  budget.err_bound = budget.rho * s * s;
  budget.ddelta_sq =
      (m.d0sq.mat() * (1.0 - budget.delta) - budget.rho * m.v0sq.mat())
          .eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(budget.ddelta_sq,
                                           Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, m.d0sq.mat().cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() < kMarginTol * scale)
    throw std::domain_error(
        "local quadratic bracket fails; shrink r or eps");
  return budget;
}

// tau = eps r0 (delta0 + 3 nu0 omega0 aa^2); the quadratic remainder of the
// bracket contracts only while tau < 1.
[[nodiscard]] inline double contraction_tau(const FieldModel& m, double r0) {
  if (!(r0 > 0.0))
    throw std::invalid_argument("contraction_tau: r0 > 0 required");
  const double tau =
      m.eps * r0 * (m.delta0 + 3.0 * m.nu0 * m.omega0 * m.aa * m.aa);
  if (!(tau < 1.0))
    throw std::domain_error("tau_cond: contraction fails (tau >= 1)");
  return tau;
}

// Smallest radius at which the exit argument covers the complement:
// 6 nu0 sqrt(x + 3p) / bstar with bstar = lambda_min(Dstar)/lambda_max(V0^2).
[[nodiscard]] inline double min_global_radius(const FieldModel& m, double x) {
  const double xp = x + 3.0 * m.dim;
  if (!(xp >= 2.5))
    throw std::domain_error("global_cond: require x + 3*dim >= 2.5");
  return 6.0 * m.nu0 * std::sqrt(xp) / curvature_rate(m.dstar, m.v0sq);
}

// Exact supremum of the local quadratic model: grad' (Ddelta_sq)^{-1} grad/2.
[[nodiscard]] inline double quad_sup_closed_form(const Vector& grad,
                                                 const SpdMatrix& ddelta_sq) {
  if (ddelta_sq.dim() != grad.size())
    throw std::invalid_argument("quad_sup_closed_form: dimension mismatch");
  const double scale = std::max(1.0, ddelta_sq.mat().cwiseAbs().maxCoeff());
  if (ddelta_sq.min_eigenvalue() <= 1e-14 * scale)
    throw std::domain_error("quad_sup_closed_form: curvature singular");
  return 0.5 * ddelta_sq.inverse_quadratic_form(grad);
}

// Offset t(x) with P(sup G > G(theta*) + t(x)) <= prob_multiplier * e^{-x}:
// quantile + error terms over radius r0_used = max(model r0, global radius).
// Violations of the hard conditions throw with the condition name; the
// x <= x_c comparison is informational only, since the quantile extends
// beyond the corner by the large-deviation branch.
[[nodiscard]] inline BoundReport sup_bound(const FieldModel& m, double x,
                                           double prob_multiplier = 5.0) {
  BoundReport rep;
  rep.x = x;
  rep.prob_multiplier = prob_multiplier;
  const double xp = x + 3.0 * m.dim;
  if (!(m.eps * std::sqrt(xp) < 1.0))
    throw std::domain_error("eps_cond: require eps*sqrt(x+3p) < 1");
  rep.validity.eps_cond = true;
  rep.validity.global_cond = xp >= 2.5;  // rechecked by min_global_radius
  rep.r0_used = std::max(m.r0, min_global_radius(m, x));
  rep.tau = contraction_tau(m, rep.r0_used);
  rep.validity.tau_cond = true;

  const EffectiveDims eff = effective_dims(m.d0sq, m.v0sq);
  const QuantileReport qr =
      deviation_quantile_report(x, SpdMatrix(eff.b), m.g);
  rep.validity.xc_cond = qr.branch != QuantileBranch::kLargeDeviation;

  rep.quantile_term = (eff.p_eff + qr.z_dev) / (2.0 * (1.0 - rep.tau));
  const double s = 1.0 + std::sqrt(xp);
  rep.error_term = 6.0 * m.nu0 * m.omega0 * m.eps * rep.r0_used * s * s;
  rep.total_offset = rep.quantile_term + rep.error_term;
  rep.implied_c = (rep.total_offset - eff.lam0 * eff.p_eff / 2.0) /
                  (eff.lam0 * (eff.v_eff * std::sqrt(x) + x));
  return rep;
}

// Data-driven delta0: the worst observed quadratic remainder
// |2 dM(theta)/||D0 theta||^2 + 1| over theta sampled in the D0-ball of
// radius r around theta* = 0, divided by eps r.  The callback returns the
// displacement M(theta) - M(theta*).  Draws are indexed per sample, so
// enlarging `samples` only extends the scanned prefix: the estimate is
// nondecreasing in `samples`.
[[nodiscard]] inline double calibrate_delta0(
    const std::function<double(const Vector&)>& m_eval, const FieldModel& m,
    double r, int samples, uint64_t seed = 0) {
  if (!(r > 0.0)) throw std::invalid_argument("calibrate_delta0: r > 0");
  if (samples < 1)
    throw std::invalid_argument("calibrate_delta0: samples >= 1");
  const Matrix d0_inv = m.d0sq.inverse_sqrt();
  const double inv_dim = 1.0 / static_cast<double>(m.dim);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    PhiloxStream stream(seed, static_cast<uint64_t>(i),
                        StreamTag::kCalibration);
    Vector u = stream.next_gaussian_vector(m.dim);
    const double norm = u.norm();
    if (norm == 0.0) continue;
    const double radius = r * std::pow(stream.next_uniform(), inv_dim);
    u *= radius / norm;  // uniform in the ball of radius r
    const Vector theta = d0_inv * u;
    const double dm = m_eval(theta);
    if (!std::isfinite(dm))
      throw std::domain_error(
          "calibrate_delta0: objective not finite; r exceeds the domain");
    worst = std::max(worst, std::abs(2.0 * dm / u.squaredNorm() + 1.0));
  }
  return worst / (m.eps * r);
}

}  // namespace concfield
