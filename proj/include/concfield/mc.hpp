#pragma once

// Seeded Monte Carlo verification: empirical exceedance frequencies of the
// quadratic-form, field-supremum, and eigenvalue statistics against their
// theoretical tail bounds, plus data-driven estimators for the nu0/omega0
// scale constants.  All randomness flows through counter-based streams keyed
// by (seed, replica, role), so every report is reproducible bit-for-bit and
// independent of the number of worker threads.

#include "concfield/bound.hpp"
#include "concfield/eigenmax.hpp"
#include "concfield/linalg.hpp"
#include "concfield/philox.hpp"
#include "concfield/quadform.hpp"
#include "concfield/special.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace concfield {

// Half-width of the Wilson score interval at one standard normal unit
// (z = 1) for k successes out of n.
[[nodiscard]] inline double wilson_half_width(long long k, long long n) {
  if (n <= 0 || k < 0 || k > n)
    throw std::invalid_argument("wilson_half_width: need 0 <= k <= n, n > 0");
  const double kk = static_cast<double>(k);
  const double nn = static_cast<double>(n);
  return std::sqrt(kk * (nn - kk) / nn + 0.25) / (nn + 1.0);
}

// Chi-square quantile routed through the independent incomplete-gamma
// implementation; used as the reference law for gaussian quadratic forms.
[[nodiscard]] inline double chi2_oracle(int dof, double prob) {
  return chi_square_quantile(dof, prob);
}

struct CoverageRow {
  double x = 0.0;
  double threshold = 0.0;
  double empirical = 0.0;
  double bound = 0.0;
  double wilson_hw = 0.0;
  bool pass = false;
};

struct CoverageReport {
  std::vector<CoverageRow> rows;
  long long trials = 0;
  uint64_t seed = 0;
};

namespace detail {

[[nodiscard]] inline int worker_count(long long trials) {
  long requested = 0;
  if (const char* env = std::getenv("CONCFIELD_THREADS"))
    requested = std::strtol(env, nullptr, 10);
  if (requested <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    requested = hw == 0 ? 1 : static_cast<long>(hw);
  }
  return static_cast<int>(
      std::max<long long>(1, std::min<long long>(requested, trials)));
}

// Counts, for each statistic family f and each threshold_sets[f][i], how
// many replicas reach the threshold.  Threads partition the replica range;
// the per-chunk counts are integers, so the reduction is exact and the
// totals do not depend on the partition.
[[nodiscard]] inline std::vector<std::vector<long long>> exceedance_counts(
    long long trials, const std::vector<std::vector<double>>& threshold_sets,
    const std::function<void(uint64_t, std::vector<double>&)>& stats) {
  const int workers = worker_count(trials);
  const size_t families = threshold_sets.size();
  std::vector<std::vector<std::vector<long long>>> partial(workers);
  for (auto& w : partial) {
    w.resize(families);
    for (size_t f = 0; f < families; ++f)
      w[f].assign(threshold_sets[f].size(), 0);
  }

  const long long chunk = (trials + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      std::vector<double> values(families, 0.0);
      const long long lo = static_cast<long long>(w) * chunk;
      const long long hi = std::min(trials, lo + chunk);
      for (long long t = lo; t < hi; ++t) {
        stats(static_cast<uint64_t>(t), values);
        for (size_t f = 0; f < families; ++f)
          for (size_t i = 0; i < threshold_sets[f].size(); ++i)
            if (values[f] >= threshold_sets[f][i]) ++partial[w][f][i];
      }
    });
  }
  for (auto& th : pool) th.join();

  std::vector<std::vector<long long>> totals(families);
  for (size_t f = 0; f < families; ++f) totals[f].assign(threshold_sets[f].size(), 0);
  for (const auto& w : partial)
    for (size_t f = 0; f < families; ++f)
      for (size_t i = 0; i < w[f].size(); ++i) totals[f][i] += w[f][i];
  return totals;
}

[[nodiscard]] inline CoverageReport make_report(
    const std::vector<double>& x_grid, const std::vector<double>& thresholds,
    const std::vector<long long>& counts, const std::vector<double>& bounds,
    long long trials, uint64_t seed) {
  CoverageReport report;
  report.trials = trials;
  report.seed = seed;
  report.rows.reserve(x_grid.size());
  for (size_t i = 0; i < x_grid.size(); ++i) {
    CoverageRow row;
    row.x = x_grid[i];
    row.threshold = thresholds[i];
    row.empirical = static_cast<double>(counts[i]) / static_cast<double>(trials);
    row.bound = bounds[i];
    row.wilson_hw = wilson_half_width(counts[i], trials);
    row.pass = row.empirical <= row.bound + 3.0 * row.wilson_hw;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace detail

// Empirical tail of xi' B xi for xi ~ N(0, Sigma) against the deviation
// quantile tr(B) + z(x) and the tail bound 2 e^{-x} + 8.4 e^{-x_c}.  The
// sub-gaussian MGF hypothesis requires Sigma <= I.
[[nodiscard]] inline CoverageReport sample_quadform(
    const SpdMatrix& b, const SpdMatrix& sigma,
    const std::vector<double>& x_grid, long long trials, uint64_t seed) {
  if (sigma.dim() != b.dim())
    throw std::invalid_argument("sample_quadform: dimension mismatch");
  if (sigma.max_eigenvalue() > 1.0 + 1e-10)
    throw std::domain_error(
        "mgf_cond: MGF hypothesis violated (requires Sigma <= I)");
  if (trials < 10000)
    throw std::invalid_argument("sample_quadform: trials >= 10000 required");
  if (x_grid.empty())
    throw std::invalid_argument("sample_quadform: empty x grid");
  for (double x : x_grid)
    if (!(x > 0.0))
      throw std::invalid_argument("sample_quadform: x > 0 required");

  const double g = 10.0 * std::sqrt(b.trace());
  const QuadCritical crit = critical_params(normalized_quad(b, g));
  std::vector<double> thresholds;
  std::vector<double> bounds;
  thresholds.reserve(x_grid.size());
  bounds.reserve(x_grid.size());
  for (double x : x_grid) {
    thresholds.push_back(b.trace() + deviation_quantile(x, b, g));
    bounds.push_back(
        std::min(1.0, 2.0 * std::exp(-x) + 8.4 * std::exp(-crit.x_c)));
  }

  const Matrix sqrt_sigma = sigma.sqrt();
  const Matrix bm = b.mat();
  const int p = b.dim();
  const auto counts = detail::exceedance_counts(
      trials, {thresholds},
      [&](uint64_t replica, std::vector<double>& values) {
        PhiloxStream stream(seed, replica, StreamTag::kNoise);
        const Vector xi = sqrt_sigma * stream.next_gaussian_vector(p);
        values[0] = xi.dot(bm * xi);
      });
  return detail::make_report(x_grid, thresholds, counts[0], bounds, trials,
                             seed);
}

// Coarse-to-fine grid maximization of fn over the centered ball of the given
// radius.  Nine points per axis per level, half-width halved each level; the
// returned value is the best evaluation seen anywhere, so it never exceeds
// the true supremum.
[[nodiscard]] inline double zoom_maximize(
    const std::function<double(const Vector&)>& fn, int dim, double radius,
    int levels = 60) {
  if (dim < 1 || dim > 3)
    throw std::invalid_argument("zoom_maximize: dim must be 1..3");
  if (!(radius > 0.0))
    throw std::invalid_argument("zoom_maximize: radius > 0 required");
  constexpr int kPts = 9;
  Vector center = Vector::Zero(dim);
  double best = fn(center);
  Vector best_point = center;
  double h = radius;
  Vector point(dim);
  for (int level = 0; level < levels; ++level) {
    Vector level_best_point = center;
    double level_best = fn(center);
    int idx[3] = {0, 0, 0};
    const int total = dim == 1 ? kPts : dim == 2 ? kPts * kPts : kPts * kPts * kPts;
    for (int flat = 0; flat < total; ++flat) {
      int rem = flat;
      for (int d = 0; d < dim; ++d) {
        idx[d] = rem % kPts;
        rem /= kPts;
      }
      for (int d = 0; d < dim; ++d)
        point[d] = center[d] + h * (2.0 * idx[d] / (kPts - 1) - 1.0);
      if (point.norm() > radius) continue;
      const double v = fn(point);
      if (v > level_best) {
        level_best = v;
        level_best_point = point;
      }
    }
    if (level_best > best) {
      best = level_best;
      best_point = level_best_point;
    }
    center = level_best_point;
    h *= 0.5;
  }
  return best;
}

struct RandomFieldSpec {
  EnsembleSpec ensemble;
  PenaltySpec penalty;
  Vector theta_star;  // stationary point; empty means derive it
};

[[nodiscard]] inline RandomFieldSpec make_field_spec(const EnsembleSpec& e,
                                                     const PenaltySpec& f) {
  RandomFieldSpec rf;
  rf.ensemble = e;
  rf.penalty = f;
  const EigenPair top = top_eigenpair(e.mean_summand.mat());
  const double r_star = stationary_radius(f, e.n * top.value);
  rf.theta_star = std::sqrt(r_star) * top.vector;
  return rf;
}

namespace detail {

// sup_theta { y r - f(r) : r = |theta|^2 >= 0 } along the top eigenvalue y;
// the supremum is attained at theta = 0 whenever y <= f'(0).
[[nodiscard]] inline double field_sup_value(const PenaltySpec& f, double y) {
  if (y <= penalty_deriv(f, 0.0)) return 0.0;
  return legendre(f, y);
}

}  // namespace detail

// Empirical exceedance of sup_theta G - G(theta*) over the assembled
// supremum-bound offset, against prob_multiplier * e^{-x}.  The supremum is
// exact (Legendre transform of lam_max) for quadratic penalties; custom
// penalties fall back to a grid supremum and therefore require p <= 3.
[[nodiscard]] inline CoverageReport verify_field_bound(
    const RandomFieldSpec& rf, const std::vector<double>& x_grid,
    long long trials, uint64_t seed, const ModelConstants& constants = {},
    double prob_multiplier = 5.0) {
  if (trials < 1)
    throw std::invalid_argument("verify_field_bound: trials >= 1 required");
  if (x_grid.empty())
    throw std::invalid_argument("verify_field_bound: empty x grid");
  const bool quadratic = rf.penalty.kind == PenaltySpec::Kind::kQuadratic;
  if (!quadratic && rf.ensemble.p > 3)
    throw std::domain_error(
        "verify_field_bound: custom penalty needs p <= 3 for the grid "
        "supremum");

  const EnsembleModel em =
      field_model_from_ensemble(rf.ensemble, rf.penalty, constants);
  if (rf.theta_star.size() != 0) {
    if (rf.theta_star.size() != em.theta_star.size() ||
        (rf.theta_star - em.theta_star).norm() >
            1e-8 * (1.0 + em.theta_star.norm()))
      throw std::invalid_argument(
          "verify_field_bound: theta_star inconsistent with the stationary "
          "radius");
  }

  std::vector<double> thresholds;
  std::vector<double> bounds;
  thresholds.reserve(x_grid.size());
  bounds.reserve(x_grid.size());
  for (double x : x_grid) {
    thresholds.push_back(sup_bound(em.model, x, prob_multiplier).total_offset);
    bounds.push_back(std::min(1.0, prob_multiplier * std::exp(-x)));
  }

  const EnsembleSpec& e = rf.ensemble;
  const Matrix mean_total = static_cast<double>(e.n) * e.mean_summand.mat();
  const double f_at_star = penalty_value(rf.penalty, em.r_star);
  const auto counts = detail::exceedance_counts(
      trials, {thresholds},
      [&](uint64_t replica, std::vector<double>& values) {
        PhiloxStream stream(seed, replica, StreamTag::kNoise);
        Matrix a = mean_total;
        for (int i = 0; i < e.n; ++i)
          a += sample_symmetric_noise(stream, e.p, e.noise);
        Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
        const double lam_max = es.eigenvalues().maxCoeff();
        double sup_g;
        if (quadratic) {
          sup_g = detail::field_sup_value(rf.penalty, lam_max);
        } else {
          double reach = em.r_star;
          if (lam_max > penalty_deriv(rf.penalty, 0.0))
            reach = std::max(reach,
                             detail::solve_penalty_deriv(rf.penalty, lam_max));
          const double radius = 2.0 * std::sqrt(reach) + 1.0;
          sup_g = zoom_maximize(
              [&](const Vector& th) {
                return th.dot(a * th) -
                       penalty_value(rf.penalty, th.squaredNorm());
              },
              e.p, radius);
        }
        const double at_star =
            em.theta_star.dot(a * em.theta_star) - f_at_star;
        values[0] = sup_g - at_star;
      });
  return detail::make_report(x_grid, thresholds, counts[0], bounds, trials,
                             seed);
}

struct EigenCoverage {
  CoverageReport paper;
  CoverageReport bernstein;
};

// Joint empirical check of the eigenvalue application: the field-bound
// threshold on lam_max^2(A) - lam_max^2(E A) (mapped through the quadratic
// penalty, event bound (1 + e^{nu0^2/2}) * multiplier * e^{-x}) and the
// matrix-Bernstein threshold on lam_max(A - E A) (event bound e^{-x}).
[[nodiscard]] inline EigenCoverage verify_eigen_bounds(
    const EnsembleSpec& e, const PenaltySpec& f,
    const std::vector<double>& x_grid, long long trials, uint64_t seed,
    const ModelConstants& constants = {}, double prob_multiplier = 5.0) {
  if (trials < 1)
    throw std::invalid_argument("verify_eigen_bounds: trials >= 1 required");
  if (x_grid.empty())
    throw std::invalid_argument("verify_eigen_bounds: empty x grid");
  if (f.kind != PenaltySpec::Kind::kQuadratic)
    throw std::invalid_argument(
        "verify_eigen_bounds: quadratic penalty required");

  const EnsembleModel em = field_model_from_ensemble(e, f, constants);
  const double lam_bar = em.lam_bar;
  std::vector<double> paper_thresholds, paper_bounds;
  std::vector<double> bern_thresholds, bern_bounds;
  for (double x : x_grid) {
    const EigenBound eb = eigen_bound(em, x, prob_multiplier);
    paper_thresholds.push_back(4.0 * e.n * eb.threshold);
    paper_bounds.push_back(eb.prob_bound);
    bern_thresholds.push_back(bernstein_bound(e, x).threshold);
    bern_bounds.push_back(std::min(1.0, std::exp(-x)));
  }

  const Matrix mean_total = static_cast<double>(e.n) * e.mean_summand.mat();
  const auto counts = detail::exceedance_counts(
      trials, {paper_thresholds, bern_thresholds},
      [&](uint64_t replica, std::vector<double>& values) {
        PhiloxStream stream(seed, replica, StreamTag::kNoise);
        Matrix noise = Matrix::Zero(e.p, e.p);
        for (int i = 0; i < e.n; ++i)
          noise += sample_symmetric_noise(stream, e.p, e.noise);
        const Matrix a = mean_total + noise;
        Eigen::SelfAdjointEigenSolver<Matrix> es_a(a, Eigen::EigenvaluesOnly);
        const double lam_max = es_a.eigenvalues().maxCoeff();
        values[0] = lam_max * lam_max - lam_bar * lam_bar;
        Eigen::SelfAdjointEigenSolver<Matrix> es_n(noise,
                                                   Eigen::EigenvaluesOnly);
        values[1] = es_n.eigenvalues().maxCoeff();
      });

  EigenCoverage out;
  out.paper = detail::make_report(x_grid, paper_thresholds, counts[0],
                                  paper_bounds, trials, seed);
  out.bernstein = detail::make_report(x_grid, bern_thresholds, counts[1],
                                      bern_bounds, trials, seed);
  return out;
}

struct ScaleEstimate {
  double raw = 0.0;    // smallest scale certified by the empirical MGF
  double value = 0.0;  // raw after flooring
  bool floored = false;
  bool grid_truncated = false;  // lambdas dropped due to MGF overflow
};

inline const std::vector<double>& default_lambda_grid() {
  static const std::vector<double> grid{0.25, 0.5, 1.0, 1.5, 2.0};
  return grid;
}

namespace detail {

struct Welford {
  long long count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double y) {
    ++count;
    const double d = y - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (y - mean);
  }

  [[nodiscard]] double std_error() const {
    if (count < 2) return std::numeric_limits<double>::infinity();
    return std::sqrt(m2 / (static_cast<double>(count) *
                           static_cast<double>(count - 1)));
  }
};

}  // namespace detail

// Smallest nu with empirical log-MGF of the normalized directional increment
// s = gamma' (A - E A) theta / |V0 gamma| below nu^2 lambda^2 / 2 plus three
// standard errors, across random directions and the lambda grid.  The value
// is floored at 1, the smallest scale the model admits.  Lambdas whose MGF
// estimate overflows are dropped and flagged.
[[nodiscard]] inline ScaleEstimate estimate_nu0(
    const EnsembleSpec& e, const Vector& theta, int directions,
    std::vector<double> lambda_grid, long long trials, uint64_t seed) {
  if (directions < 1)
    throw std::invalid_argument("estimate_nu0: directions >= 1 required");
  if (trials < 2)
    throw std::invalid_argument("estimate_nu0: trials >= 2 required");
  if (theta.size() != e.p)
    throw std::invalid_argument("estimate_nu0: theta dimension mismatch");
  if (lambda_grid.empty()) lambda_grid = default_lambda_grid();
  for (double lam : lambda_grid)
    if (!(lam > 0.0))
      throw std::invalid_argument("estimate_nu0: lambdas must be positive");

  const Matrix v0sq =
      static_cast<double>(e.n) * noise_action_cov(e.noise, theta);
  std::vector<Vector> gammas;
  std::vector<double> norms;
  for (int j = 0; j < directions; ++j) {
    PhiloxStream stream(seed, static_cast<uint64_t>(j),
                        StreamTag::kDirections);
    Vector g = stream.next_gaussian_vector(e.p);
    g.normalize();
    const double norm = std::sqrt(g.dot(v0sq * g));
    if (!(norm > 0.0))
      throw std::domain_error("estimate_nu0: V0 degenerate at theta");
    gammas.push_back(std::move(g));
    norms.push_back(norm);
  }

  const size_t nl = lambda_grid.size();
  std::vector<detail::Welford> acc(static_cast<size_t>(directions) * nl);
  std::vector<char> dead(nl, 0);
  for (long long t = 0; t < trials; ++t) {
    PhiloxStream stream(seed, static_cast<uint64_t>(t), StreamTag::kNoise);
    Vector w = Vector::Zero(e.p);
    for (int i = 0; i < e.n; ++i)
      w += sample_symmetric_noise(stream, e.p, e.noise) * theta;
    for (int j = 0; j < directions; ++j) {
      const double s = gammas[j].dot(w) / norms[j];
      for (size_t l = 0; l < nl; ++l) {
        if (dead[l]) continue;
        const double y = std::exp(lambda_grid[l] * s);
        if (!std::isfinite(y)) {
          dead[l] = 1;
          continue;
        }
        acc[static_cast<size_t>(j) * nl + l].add(y);
      }
    }
  }

  ScaleEstimate out;
  double best_sq = 0.0;
  bool any_alive = false;
  for (size_t l = 0; l < nl; ++l) {
    if (dead[l]) {
      out.grid_truncated = true;
      continue;
    }
    any_alive = true;
    for (int j = 0; j < directions; ++j) {
      const detail::Welford& w = acc[static_cast<size_t>(j) * nl + l];
      const double se_log = w.std_error() / w.mean;
      if (!std::isfinite(se_log)) {
        out.grid_truncated = true;
        continue;
      }
      const double cand =
          2.0 * (std::log(w.mean) - 3.0 * se_log) /
          (lambda_grid[l] * lambda_grid[l]);
      best_sq = std::max(best_sq, cand);
    }
  }
  if (!any_alive)
    throw std::domain_error(
        "estimate_nu0: MGF overflow on the entire lambda grid");
  out.raw = std::sqrt(std::max(0.0, best_sq));
  out.value = std::max(out.raw, 1.0);
  out.floored = out.value > out.raw;
  return out;
}

// Smallest omega such that the normalized gradient increment
// s = gamma' {grad zeta(theta) - grad zeta(theta*)} / (omega eps r |V0 gamma|)
// satisfies the nu0-sub-gaussian MGF bound (plus three standard errors) over
// probe points theta in the radius-r neighborhood and the lambda grid.
// Fields with no gradient fluctuation report the conventional floor value 1.
[[nodiscard]] inline ScaleEstimate estimate_omega0(
    const RandomFieldSpec& rf, double r, int probes, long long trials,
    uint64_t seed, const ModelConstants& constants = {}) {
  if (!(r > 0.0))
    throw std::invalid_argument("estimate_omega0: r > 0 required");
  if (probes < 1)
    throw std::invalid_argument("estimate_omega0: probes >= 1 required");
  if (trials < 2)
    throw std::invalid_argument("estimate_omega0: trials >= 2 required");
  if (static_cast<long long>(probes) * trials > 50000000LL)
    throw std::invalid_argument(
        "estimate_omega0: probes * trials too large to hold in memory");

  const EnsembleSpec& e = rf.ensemble;
  Vector theta_star = rf.theta_star;
  if (theta_star.size() == 0)
    theta_star = make_field_spec(e, rf.penalty).theta_star;

  const Matrix v0sq =
      static_cast<double>(e.n) * noise_action_cov(e.noise, theta_star);
  const SpdMatrix v0sq_spd(v0sq);
  if (!(v0sq_spd.min_eigenvalue() > 0.0))
    throw std::domain_error("estimate_omega0: V0 degenerate at theta_star");
  const Matrix v0_inv_sqrt = v0sq_spd.inverse_sqrt();
  const double eps = constants.eps > 0.0
                         ? constants.eps
                         : 1.0 / std::sqrt(v0sq_spd.min_eigenvalue());
  const double nu0 = constants.nu0;

  std::vector<Vector> offsets;   // theta - theta*, inside the V0-ball of radius r
  std::vector<Vector> gammas;
  std::vector<double> norms;
  for (int k = 0; k < probes; ++k) {
    PhiloxStream stream(seed, static_cast<uint64_t>(k), StreamTag::kProbes);
    Vector dir = stream.next_gaussian_vector(e.p);
    dir.normalize();
    const double t = stream.next_uniform();
    offsets.push_back(v0_inv_sqrt * (r * t * dir));
    Vector g = stream.next_gaussian_vector(e.p);
    g.normalize();
    gammas.push_back(g);
    norms.push_back(std::sqrt(g.dot(v0sq * g)));
  }

  // Directional increments per (replica, probe); for the quadratic-form field
  // grad zeta(theta) - grad zeta(theta*) = 2 (A - E A)(theta - theta*).
  std::vector<double> s(static_cast<size_t>(trials) * probes);
  for (long long t = 0; t < trials; ++t) {
    PhiloxStream stream(seed, static_cast<uint64_t>(t), StreamTag::kNoise);
    Matrix noise = Matrix::Zero(e.p, e.p);
    for (int i = 0; i < e.n; ++i)
      noise += sample_symmetric_noise(stream, e.p, e.noise);
    for (int k = 0; k < probes; ++k) {
      const Vector w = 2.0 * (noise * offsets[k]);
      s[static_cast<size_t>(t) * probes + k] =
          gammas[k].dot(w) / (eps * r * norms[k]);
    }
  }

  double max_abs = 0.0;
  for (double v : s) max_abs = std::max(max_abs, std::abs(v));
  const std::vector<double>& lambdas = default_lambda_grid();

  const auto certified = [&](double omega) {
    for (int k = 0; k < probes; ++k) {
      for (double lam : lambdas) {
        detail::Welford acc;
        const double scale = lam / omega;
        for (long long t = 0; t < trials; ++t) {
          const double y =
              std::exp(scale * s[static_cast<size_t>(t) * probes + k]);
          if (!std::isfinite(y)) return false;
          acc.add(y);
        }
        const double se_log = acc.std_error() / acc.mean;
        if (!std::isfinite(se_log)) return false;
        if (std::log(acc.mean) > nu0 * nu0 * lam * lam / 2.0 + 3.0 * se_log)
          return false;
      }
    }
    return true;
  };

  ScaleEstimate out;
  constexpr double kFloor = 1e-12;
  if (max_abs == 0.0 || certified(kFloor)) {
    out.raw = 0.0;
    out.value = 1.0;
    out.floored = true;
    return out;
  }
  double lo = kFloor;
  double hi = 1.0;
  for (int guard = 0; !certified(hi); ++guard) {
    if (guard > 200)
      throw std::domain_error("estimate_omega0: MGF bound unsatisfiable");
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (certified(mid))
      hi = mid;
    else
      lo = mid;
  }
  out.raw = hi;
  out.value = hi;
  out.floored = false;
  return out;
}

}  // namespace concfield
