#pragma once

// Largest-eigenvalue application: the random field G(A, theta) =
// theta' A theta - f(|theta|^2) over a sum A = X_1 + ... + X_n of i.i.d.
// symmetric matrices.  Builds the curvature/variance model at the stationary
// point, the eigenvalue deviation threshold, the matrix-Bernstein reference
// threshold, and the comparison sweep between the two.

#include "concfield/bound.hpp"
#include "concfield/linalg.hpp"
#include "concfield/model.hpp"
#include "concfield/philox.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace concfield {

// Penalty f: nonnegative, increasing, convex, f(0) = 0.  The quadratic kind
// f(r) = n r^2 admits closed forms everywhere; custom kinds supply
// (f, f', f'') callbacks.
struct PenaltySpec {
  enum class Kind { kQuadratic, kCustom };
  Kind kind = Kind::kQuadratic;
  double n = 1.0;  // quadratic coefficient: f(r) = n r^2
  std::function<double(double)> f;
  std::function<double(double)> fp;
  std::function<double(double)> fpp;

  static PenaltySpec quadratic(double n_summands) {
    if (!(n_summands > 0.0))
      throw std::invalid_argument("PenaltySpec::quadratic: n > 0 required");
    PenaltySpec s;
    s.kind = Kind::kQuadratic;
    s.n = n_summands;
    return s;
  }

  static PenaltySpec custom(std::function<double(double)> f,
                            std::function<double(double)> fp,
                            std::function<double(double)> fpp) {
    if (!f || !fp || !fpp)
      throw std::invalid_argument("PenaltySpec::custom: callbacks required");
    PenaltySpec s;
    s.kind = Kind::kCustom;
    s.f = std::move(f);
    s.fp = std::move(fp);
    s.fpp = std::move(fpp);
    return s;
  }
};

[[nodiscard]] inline double penalty_value(const PenaltySpec& s, double r) {
  return s.kind == PenaltySpec::Kind::kQuadratic ? s.n * r * r : s.f(r);
}

[[nodiscard]] inline double penalty_deriv(const PenaltySpec& s, double r) {
  return s.kind == PenaltySpec::Kind::kQuadratic ? 2.0 * s.n * r : s.fp(r);
}

[[nodiscard]] inline double penalty_second(const PenaltySpec& s, double r) {
  return s.kind == PenaltySpec::Kind::kQuadratic ? 2.0 * s.n : s.fpp(r);
}

namespace detail {

// Root of f'(r) = y for increasing f'; safeguarded Newton with bisection
// fallback, bracket found by doubling.
[[nodiscard]] inline double solve_penalty_deriv(const PenaltySpec& s,
                                                double y) {
  const double f0 = penalty_deriv(s, 0.0);
  if (y < f0) throw std::domain_error("legendre: y below the range of f'");
  if (y == f0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int guard = 0; penalty_deriv(s, hi) < y; ++guard) {
    if (guard > 200)
      throw std::domain_error("legendre: y outside the range of f'");
    hi *= 2.0;
  }
  double r = 0.5 * hi;
  for (int it = 0; it < 200; ++it) {
    const double val = penalty_deriv(s, r) - y;
    if (val > 0.0)
      hi = r;
    else
      lo = r;
    const double der = penalty_second(s, r);
    double next = der > 0.0 ? r - val / der : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - r);
    r = next;
    if (step <= 1e-16 * std::max(1.0, r)) break;
  }
  return r;
}

}  // namespace detail

// Legendre transform f*(y) = sup_r { y r - f(r) } for y in the range of f'.
[[nodiscard]] inline double legendre(const PenaltySpec& s, double y) {
  if (s.kind == PenaltySpec::Kind::kQuadratic) {
    if (y < 0.0) throw std::domain_error("legendre: y below the range of f'");
    return y * y / (4.0 * s.n);
  }
  const double r = detail::solve_penalty_deriv(s, y);
  return y * r - s.f(r);
}

// r* solving f'(r*) = lam_max_mean; for the quadratic kind this is
// lam_max_mean / (2n).
[[nodiscard]] inline double stationary_radius(const PenaltySpec& s,
                                              double lam_max_mean) {
  if (s.kind == PenaltySpec::Kind::kQuadratic) {
    if (lam_max_mean < 0.0)
      throw std::domain_error(
          "stationary_radius: lam_max_mean below the range of f'");
    return lam_max_mean / (2.0 * s.n);
  }
  return detail::solve_penalty_deriv(s, lam_max_mean);
}

enum class NoiseKind { kGaussian, kBounded };

// Per-summand noise Delta: i.i.d. entries scale*Z (gaussian) or scale*Z
// clipped to [-scale, scale] (bounded), then symmetrized as (E + E')/2.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::kGaussian;
  double scale = 1.0;
};

// Entry variance of the pre-symmetrization noise entries.  A standard
// normal clipped to [-1, 1] has variance 1 - 2 phi(1).
[[nodiscard]] inline double noise_entry_variance(const NoiseSpec& noise) {
  const double s2 = noise.scale * noise.scale;
  if (noise.kind == NoiseKind::kGaussian) return s2;
  const double phi1 =
      std::exp(-0.5) / std::sqrt(2.0 * std::numbers::pi_v<double>);
  return s2 * (1.0 - 2.0 * phi1);
}

[[nodiscard]] inline Matrix sample_symmetric_noise(PhiloxStream& stream,
                                                   int p,
                                                   const NoiseSpec& noise) {
  Matrix e(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      double z = noise.scale * stream.next_gaussian();
      if (noise.kind == NoiseKind::kBounded)
        z = std::clamp(z, -noise.scale, noise.scale);
      e(i, j) = z;
    }
  return (e + e.transpose()) / 2.0;
}

struct EnsembleSpec {
  int n = 1;
  int p = 1;
  SpdMatrix mean_summand;  // E X_1, PSD with a simple top eigenvalue
  NoiseSpec noise;
  uint64_t seed = 0;
};

// Covariance of Delta u for the symmetrized i.i.d.-entry noise:
// (v/2) (|u|^2 I + u u') with v the entry variance.  Exact for both kinds.
[[nodiscard]] inline Matrix noise_action_cov(const NoiseSpec& noise,
                                             const Vector& u) {
  const double v = noise_entry_variance(noise);
  const long p = u.size();
  return (v / 2.0) *
         (u.squaredNorm() * Matrix::Identity(p, p) + u * u.transpose());
}

// Synthetic PSD mean with top eigenvalue 1, gap 0.8, and a mild downward
// drift across the remaining spectrum.
[[nodiscard]] inline SpdMatrix default_mean(int p) {
  if (p < 1) throw std::invalid_argument("default_mean: p >= 1 required");
  Vector d(p);
  d[0] = 1.0;
  for (int j = 2; j <= p; ++j)
    d[j - 1] = 0.2 * (1.0 - (j - 2.0) / (2.0 * (p - 1.0)));
  return SpdMatrix::diagonal(d);
}

// Declared model constants used when deriving a FieldModel from an ensemble.
// Zero means "derive": eps becomes 1/sqrt(lambda_min(V0^2)) (the tightest
// value passing the noise-floor check) and g becomes 10 sqrt(tr B).
struct ModelConstants {
  double nu0 = 1.0;
  double omega0 = 0.1;
  double delta0 = 0.05;
  double eps = 0.0;
  double g = 0.0;
  double r0 = 1.0;
};

struct EnsembleModel {
  FieldModel model;
  double lam_bar = 0.0;  // lambda_max(E A) = n lambda_max(E X_1)
  double r_star = 0.0;
  Vector e_p;
  Vector theta_star;          // sqrt(r*) e_p
  double v0_theta_norm = 0.0;  // |V0 theta*|
  double v0_mc_se = 0.0;       // entrywise std error of the V0^2 moment MC
};

namespace detail {

struct MomentEstimate {
  Matrix cov;
  double max_se = 0.0;
};

// Second moment of Delta theta* over kV0MomentSamples draws; per-sample
// Philox streams keep the estimate independent of evaluation order.
inline constexpr long long kV0MomentSamples = 100000;

[[nodiscard]] inline MomentEstimate moment_mc_cov(const EnsembleSpec& e,
                                                  const Vector& u) {
  const int p = e.p;
  Matrix sum = Matrix::Zero(p, p);
  Matrix sum_sq = Matrix::Zero(p, p);
  for (long long i = 0; i < kV0MomentSamples; ++i) {
    PhiloxStream stream(e.seed, static_cast<uint64_t>(i), StreamTag::kMoments);
    const Matrix delta = sample_symmetric_noise(stream, p, e.noise);
    const Vector w = delta * u;
    const Matrix outer = w * w.transpose();
    sum += outer;
    sum_sq += outer.cwiseProduct(outer);
  }
  MomentEstimate est;
  const auto samples = static_cast<double>(kV0MomentSamples);
  est.cov = sum / samples;
  const Matrix var =
      (sum_sq / samples - est.cov.cwiseProduct(est.cov)).cwiseMax(0.0);
  est.max_se = std::sqrt(var.maxCoeff() / samples);
  est.cov = ((est.cov + est.cov.transpose()) / 2.0).eval();
  return est;
}

}  // namespace detail

// Curvature and variance model at the stationary point theta* = sqrt(r*) e_p:
// D0^2 = lam_bar I - E A + 2 f''(r*) r* e_p e_p' (one half of -Hessian of
// E G), V0^2 = Var(A theta*) = n Cov(X_1 theta*) — closed form for gaussian
// noise, moment Monte Carlo with recorded standard error for bounded noise.
// Dstar is set to D0^2.
[[nodiscard]] inline EnsembleModel field_model_from_ensemble(
    const EnsembleSpec& e, const PenaltySpec& f,
    const ModelConstants& c = {}) {
  if (e.n < 1 || e.p < 1)
    throw std::invalid_argument("field_model_from_ensemble: n, p >= 1");
  if (e.mean_summand.dim() != e.p)
    throw std::invalid_argument(
        "field_model_from_ensemble: mean dimension mismatch");
  const double mean_scale =
      std::max(1.0, e.mean_summand.mat().cwiseAbs().maxCoeff());
  if (e.mean_summand.min_eigenvalue() < kMarginTol * mean_scale)
    throw std::domain_error("field_model_from_ensemble: E X_1 must be PSD");

  const Vector lam = e.mean_summand.eigenvalues();
  if (e.p >= 2 && !(lam[e.p - 1] - lam[e.p - 2] > 1e-8))
    throw std::domain_error("top eigenvector ill-defined");

  EnsembleModel em;
  const EigenPair top = top_eigenpair(e.mean_summand.mat());
  em.e_p = top.vector;
  em.lam_bar = e.n * top.value;
  em.r_star = stationary_radius(f, em.lam_bar);
  const double fpp = penalty_second(f, em.r_star);
  if (!(fpp > 0.0))
    throw std::domain_error(
        "field_model_from_ensemble: f''(r*) > 0 required");
  em.theta_star = std::sqrt(em.r_star) * em.e_p;

  const long p = e.p;
  Matrix d0sq = em.lam_bar * Matrix::Identity(p, p) -
                static_cast<double>(e.n) * e.mean_summand.mat() +
                2.0 * fpp * em.r_star * em.e_p * em.e_p.transpose();

  Matrix cov;
  if (e.noise.kind == NoiseKind::kGaussian) {
    cov = noise_action_cov(e.noise, em.theta_star);
  } else {
    const detail::MomentEstimate est = detail::moment_mc_cov(e, em.theta_star);
    cov = est.cov;
    em.v0_mc_se = static_cast<double>(e.n) * est.max_se;
  }
  const Matrix v0sq = static_cast<double>(e.n) * cov;

  FieldModel m;
  m.dim = e.p;
  m.d0sq = SpdMatrix(d0sq);
  m.v0sq = SpdMatrix(v0sq);
  m.dstar = m.d0sq;
  m.nu0 = c.nu0;
  m.omega0 = c.omega0;
  m.delta0 = c.delta0;
  m.r0 = c.r0;
  if (c.eps > 0.0) {
    m.eps = c.eps;
  } else {
    const double lam_min = m.v0sq.min_eigenvalue();
    if (!(lam_min > 0.0))
      throw std::domain_error(
          "field_model_from_ensemble: V0^2 singular, cannot derive eps");
    m.eps = 1.0 / std::sqrt(lam_min);
  }
  const EffectiveDims eff = effective_dims(m.d0sq, m.v0sq);
  m.g = c.g > 0.0 ? c.g : 10.0 * std::sqrt(eff.p_eff);
  m.aa = minimal_aa(m.d0sq, m.v0sq);

  em.v0_theta_norm =
      std::sqrt(em.theta_star.dot(v0sq * em.theta_star));
  em.model = std::move(m);
  return em;
}

struct EigenBound {
  double x = 0.0;
  double threshold = 0.0;  // on f*(lam_max(A)) - f*(lam_max(E A))
  double implied_c = 0.0;
  double prob_coeff = 0.0;      // 1 + e^{nu0^2/2}
  double prob_multiplier = 0.0;  // from the supremum-bound assembly
  double prob_bound = 0.0;       // min(1, coeff * multiplier * e^{-x})
};

// Threshold lam0 p_eff/2 + sqrt(x) |V0 theta*| + c lam0 (v_eff sqrt(x) + x)
// with c the implied constant of the supremum bound at the same x; at x = 0
// only the effective-dimension term survives.
[[nodiscard]] inline EigenBound eigen_bound(const EnsembleModel& em, double x,
                                            double prob_multiplier = 5.0) {
  if (!(x >= 0.0))
    throw std::invalid_argument("eigen_bound: x >= 0 required");
  const EffectiveDims eff = effective_dims(em.model.d0sq, em.model.v0sq);
  EigenBound out;
  out.x = x;
  out.prob_multiplier = prob_multiplier;
  out.prob_coeff = 1.0 + std::exp(em.model.nu0 * em.model.nu0 / 2.0);
  out.threshold = eff.lam0 * eff.p_eff / 2.0;
  if (x > 0.0) {
    const BoundReport rep = sup_bound(em.model, x, prob_multiplier);
    out.implied_c = rep.implied_c;
    out.threshold += std::sqrt(x) * em.v0_theta_norm +
                     rep.implied_c * eff.lam0 *
                         (eff.v_eff * std::sqrt(x) + x);
  }
  out.prob_bound =
      std::min(1.0, out.prob_coeff * prob_multiplier * std::exp(-x));
  return out;
}

[[nodiscard]] inline EigenBound eigen_bound(const EnsembleSpec& e,
                                            const PenaltySpec& f, double x,
                                            const ModelConstants& c = {}) {
  return eigen_bound(field_model_from_ensemble(e, f, c), x);
}

// sqrt(2 (x + log p) sigma^2) with sigma^2 = (n/2) * norm for a supplied
// norm = |B^2 + Var(X_1)|.
[[nodiscard]] inline double bernstein_threshold_from_norm(int n, int p,
                                                          double norm,
                                                          double x) {
  if (n < 1 || p < 1)
    throw std::invalid_argument("bernstein_threshold_from_norm: n, p >= 1");
  if (!(norm > 0.0) || !(x >= 0.0))
    throw std::invalid_argument(
        "bernstein_threshold_from_norm: norm > 0, x >= 0 required");
  const double sigma_sq = 0.5 * n * norm;
  return std::sqrt(2.0 * (x + std::log(static_cast<double>(p))) * sigma_sq);
}

struct BernsteinBound {
  double threshold = 0.0;  // on lam_max(A - E A)
  double sigma_sq = 0.0;
  double b_sq_norm = 0.0;  // recorded envelope |B^2| = scale^2 p
  double var_norm = 0.0;   // |Var(X_1)| = v (p+1)/2
};

// Matrix-Bernstein reference threshold; needs the almost-sure envelope, so
// it is defined only for bounded noise.
[[nodiscard]] inline BernsteinBound bernstein_bound(const EnsembleSpec& e,
                                                    double x) {
  if (e.noise.kind != NoiseKind::kBounded)
    throw std::domain_error(
        "bernstein_bound requires bounded noise: X_k^2 <= B^2 unavailable "
        "for gaussian noise");
  BernsteinBound out;
  out.b_sq_norm = e.noise.scale * e.noise.scale * e.p;
  out.var_norm = noise_entry_variance(e.noise) * (e.p + 1) / 2.0;
  const double norm = out.b_sq_norm + out.var_norm;
  out.sigma_sq = 0.5 * e.n * norm;
  out.threshold = bernstein_threshold_from_norm(e.n, e.p, norm, x);
  return out;
}

struct ComparisonRow {
  int n = 0;
  int p = 0;
  double x = 0.0;
  double paper_mapped = 0.0;     // threshold on lam_max^2(A) - lam_max^2(EA)
  double bernstein_mapped = 0.0;  // same event via (lam_bar + t)^2 - lam_bar^2
  double ratio = 0.0;
  bool field_valid = false;
  std::string winner;
};

// Sweeps (n, p, x) with quadratic penalty f(r) = n r^2 and maps both bounds
// onto the common event lam_max^2(A) - lam_max^2(E A): the field threshold T
// scales by 4n, the Bernstein threshold t maps to t (2 lam_bar + t).  Cells
// where the field-bound conditions fail report an infinite threshold and
// fall to Bernstein.
[[nodiscard]] inline std::vector<ComparisonRow> compare_bounds(
    const EnsembleSpec& proto, const std::vector<int>& n_grid,
    const std::vector<int>& p_grid, const std::vector<double>& x_grid,
    const ModelConstants& constants = {}) {
  std::vector<ComparisonRow> rows;
  rows.reserve(n_grid.size() * p_grid.size() * x_grid.size());
  const double inf = std::numeric_limits<double>::infinity();
  for (int n : n_grid) {
    for (int p : p_grid) {
      EnsembleSpec e;
      e.n = n;
      e.p = p;
      e.mean_summand =
          proto.mean_summand.dim() == p ? proto.mean_summand : default_mean(p);
      e.noise = proto.noise;
      e.seed = proto.seed;
      const PenaltySpec f = PenaltySpec::quadratic(n);
      const double lam_bar =
          static_cast<double>(n) * e.mean_summand.max_eigenvalue();

      std::optional<EnsembleModel> em;
      try {
        em = field_model_from_ensemble(e, f, constants);
      } catch (const std::exception&) {
        em.reset();
      }
      for (double x : x_grid) {
        ComparisonRow row;
        row.n = n;
        row.p = p;
        row.x = x;
        const double t = bernstein_bound(e, x).threshold;
        row.bernstein_mapped = t * (2.0 * lam_bar + t);
        row.paper_mapped = inf;
        if (em.has_value()) {
          try {
            row.paper_mapped = 4.0 * n * eigen_bound(*em, x).threshold;
            row.field_valid = true;
          } catch (const std::exception&) {
            row.paper_mapped = inf;
          }
        }
        row.ratio = row.paper_mapped / row.bernstein_mapped;
        row.winner = row.field_valid && row.paper_mapped < row.bernstein_mapped
                         ? "paper"
                         : "bernstein";
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

}  // namespace concfield
