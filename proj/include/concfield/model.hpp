#pragma once

// Smooth-field model inputs and the spectral summaries derived from them.
// The model bundles the curvature and variance proxies together with the
// scalar hypotheses a user declares; validate_model checks every inequality
// it can observe and reports a margin for each.

#include "concfield/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace concfield {

struct FieldModel {
  int dim = 0;
  SpdMatrix d0sq;   // local curvature scale, squared
  SpdMatrix v0sq;   // gradient variance upper bound
  SpdMatrix dstar;  // global curvature floor
  double nu0 = 1.0;     // gradient sub-gaussian factor, >= 1
  double g = 1.0;       // gradient MGF range
  double eps = 0.25;    // bracket precision, in (0, 1/2)
  double omega0 = 1.0;  // gradient-increment scale
  double delta0 = 1.0;  // quadratic-remainder scale
  double aa = 1.0;      // spectral link: aa^2 D0^2 >= V0^2
  double r0 = 1.0;      // local radius
};

// Spectral summaries of B = D0^{-1} V0^2 D0^{-1}: effective dimension, its
// fluctuation scale and the top eigenvalue.
struct EffectiveDims {
  Matrix b;
  double p_eff = 0.0;  // tr B
  double v_eff = 0.0;  // sqrt(2 tr B^2)
  double lam0 = 0.0;   // lambda_max(B)
};

struct ValidationCheck {
  std::string name;
  double margin = 0.0;
  bool pass = false;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool valid = false;

  [[nodiscard]] double worst_margin() const {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& c : checks) worst = std::min(worst, c.margin);
    return worst;
  }
};

[[nodiscard]] inline EffectiveDims effective_dims(const SpdMatrix& d0sq,
                                                  const SpdMatrix& v0sq) {
  if (d0sq.dim() != v0sq.dim())
    throw std::invalid_argument("effective_dims: dimension mismatch");
  const double scale = std::max(1.0, d0sq.mat().cwiseAbs().maxCoeff());
  if (d0sq.min_eigenvalue() <= 1e-14 * scale)
    throw std::domain_error("effective_dims: curvature matrix is singular");

  const Matrix s = d0sq.inverse_sqrt();
  Matrix b = s * v0sq.mat() * s;
  b = ((b + b.transpose()) / 2.0).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> es(b, Eigen::EigenvaluesOnly);
  const Vector lam = es.eigenvalues();
  EffectiveDims out;
  out.b = std::move(b);
  out.p_eff = lam.sum();
  out.v_eff = std::sqrt(2.0 * lam.squaredNorm());
  out.lam0 = lam.maxCoeff();
  return out;
}

// Curvature-to-noise rate lambda_min(Dstar) / lambda_max(V0^2).
[[nodiscard]] inline double curvature_rate(const SpdMatrix& dstar,
                                           const SpdMatrix& v0sq) {
  if (dstar.dim() != v0sq.dim())
    throw std::invalid_argument("curvature_rate: dimension mismatch");
  const double lam_min = dstar.min_eigenvalue();
  const double lam_max = v0sq.max_eigenvalue();
  if (lam_min <= 0.0)
    throw std::domain_error("curvature_rate: curvature floor not positive");
  if (lam_max <= 0.0)
    throw std::domain_error("curvature_rate: variance bound not positive");
  return lam_min / lam_max;
}

// Smallest aa with aa^2 D0^2 >= V0^2; the top eigenvalue of the same pencil
// effective_dims diagonalizes, so minimal_aa^2 == effective_dims(...).lam0.
[[nodiscard]] inline double minimal_aa(const SpdMatrix& d0sq,
                                       const SpdMatrix& v0sq) {
  return std::sqrt(effective_dims(d0sq, v0sq).lam0);
}

// Checks every declared inequality.  A model is valid when all margins are
// >= -1e-10; matrix symmetry and dimension consistency are hard errors.
[[nodiscard]] inline ValidationReport validate_model(const FieldModel& m) {
  if (m.dim <= 0) throw std::invalid_argument("validate_model: dim <= 0");
  if (m.d0sq.dim() != m.dim || m.v0sq.dim() != m.dim ||
      m.dstar.dim() != m.dim)
    throw std::invalid_argument(
        "validate_model: matrix dimensions do not match dim");

  ValidationReport report;
  auto add = [&report](std::string name, double margin) {
    report.checks.push_back({std::move(name), margin, margin >= kMarginTol});
  };

  add("d0sq_pd", m.d0sq.min_eigenvalue());
  add("dstar_pd", m.dstar.min_eigenvalue());
  add("eps_range", std::min(m.eps, 0.5 - m.eps));
  if (m.eps > 0.0) {
    const Matrix floor_mat =
        Matrix::Identity(m.dim, m.dim) / (m.eps * m.eps);
    add("v0sq_noise_floor", order_margin(m.v0sq.mat(), floor_mat));
  } else {
    add("v0sq_noise_floor", -std::numeric_limits<double>::infinity());
  }
  add("spectral_link", order_margin(m.aa * m.aa * m.d0sq.mat(), m.v0sq.mat()));
  add("nu0_lower", m.nu0 - 1.0);
  add("g_positive", m.g);
  add("omega0_positive", m.omega0);
  add("delta0_positive", m.delta0);
  add("r0_positive", m.r0);

  report.valid = true;
  for (const auto& c : report.checks) report.valid = report.valid && c.pass;
  return report;
}

}  // namespace concfield
