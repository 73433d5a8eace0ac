#pragma once

// Majorizing-measure machinery over Euclidean balls: covering ratios M_k at
// dyadic radii r_k = r0 2^{-k}, the entropy functional Q = sum c_k log(2 M_k),
// drifted-supremum log-probability bounds, the local quantile z0, multiscale
// admissible sets and the hitting-probability criterion.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace concfield {

enum class BallMeasure { kLebesgueEuclidean, kNumericGrid };

struct BallSpec {
  int p = 1;          // ambient dimension
  double r0 = 1.0;    // radius of the reference ball
  BallMeasure measure = BallMeasure::kLebesgueEuclidean;
  int grid_res = 4;   // lattice points per small-ball radius (numeric mode)
};

struct ChainingSpec {
  std::vector<double> m_k;  // covering ratios, k = 1..k_trunc
  double q = 0.0;           // entropy, tail included
  int k_trunc = 0;
  double tail_bound = 0.0;  // contribution accounted beyond k_trunc
};

// Entropy weights: c_1 = 1/3, c_k = 2^{-k+2}/3 for k >= 2; they sum to 1.
[[nodiscard]] inline double chain_weight(int k) {
  if (k < 1) throw std::invalid_argument("chain_weight: k >= 1 required");
  return k == 1 ? 1.0 / 3.0 : std::exp2(2 - k) / 3.0;
}

namespace detail {

[[nodiscard]] inline long long isqrt_ll(long long n) {
  if (n < 0) return -1;
  auto r = static_cast<long long>(std::sqrt(static_cast<double>(n)));
  while (r > 0 && r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

// #{z in Z^p : |z| <= R}, exact integer count (inclusive boundary).
[[nodiscard]] inline long long lattice_ball_count(int p, long long radius) {
  const long long r2 = radius * radius;
  if (p == 1) return 2 * radius + 1;
  long long count = 0;
  if (p == 2) {
    for (long long i = -radius; i <= radius; ++i)
      count += 2 * isqrt_ll(r2 - i * i) + 1;
    return count;
  }
  for (long long i = -radius; i <= radius; ++i) {
    const long long rem = r2 - i * i;
    const long long bj = isqrt_ll(rem);
    for (long long j = -bj; j <= bj; ++j)
      count += 2 * isqrt_ll(rem - j * j) + 1;
  }
  return count;
}

// Smallest #{z : |z| <= R, |z - m e1| <= s} over centers m e1, 0 <= m <= R.
// Centers on the first axis suffice: the worst intersection sits at the
// boundary and the count depends on the center through |m| alone up to the
// lattice orientation, which the conservative minimum absorbs.
[[nodiscard]] inline long long min_ball_intersection(int p, long long radius,
                                                     long long s) {
  const long long r2 = radius * radius;
  const long long s2 = s * s;
  long long best = std::numeric_limits<long long>::max();
  for (long long m = 0; m <= radius; ++m) {
    long long count = 0;
    for (long long i = m - s; i <= m + s; ++i) {
      const long long di = (i - m) * (i - m);
      if (p == 1) {
        count += (di <= s2 && i * i <= r2) ? 1 : 0;
        continue;
      }
      for (long long j = -s; j <= s; ++j) {
        const long long dj = di + j * j;
        if (dj > s2) continue;
        if (p == 2) {
          count += (i * i + j * j <= r2) ? 1 : 0;
          continue;
        }
        for (long long l = -s; l <= s; ++l)
          count += (dj + l * l <= s2 && i * i + j * j + l * l <= r2) ? 1 : 0;
      }
    }
    best = std::min(best, count);
  }
  return best;
}

}  // namespace detail

// Covering ratios M_k = max_v vol(ball r0) / vol(ball(v, r_k) ∩ ball r0) for
// k = 1..K.  Analytic mode returns the bound 2^{(k+1)p}: the worst center
// sits on the boundary, where the intersection still contains a ball of
// radius r_k/2.  Numeric mode counts lattice points with spacing r_k/grid_res
// and takes the worst center along an axis; exact integer arithmetic.
[[nodiscard]] inline std::vector<double> covering_ratios(const BallSpec& ball,
                                                         int k_levels) {
  if (ball.p < 1)
    throw std::invalid_argument("covering_ratios: p >= 1 required");
  if (!(ball.r0 > 0.0))
    throw std::invalid_argument("covering_ratios: r0 > 0 required");
  if (k_levels < 1)
    throw std::invalid_argument("covering_ratios: K >= 1 required");

  std::vector<double> m;
  m.reserve(static_cast<size_t>(k_levels));
  if (ball.measure == BallMeasure::kLebesgueEuclidean) {
    for (int k = 1; k <= k_levels; ++k) {
      const double value = std::exp2(static_cast<double>(k + 1) * ball.p);
      m.push_back(std::isfinite(value) ? value
                                       : std::numeric_limits<double>::max());
    }
    return m;
  }

  if (ball.p > 3) throw std::domain_error("grid oracle limited to p <= 3");
  if (ball.grid_res < 1)
    throw std::invalid_argument("covering_ratios: grid resolution >= 1");
  // Refuse infeasible levels before counting anything: the deepest level
  // bounds the lattice size for the whole run.
  for (int k = 1; k <= k_levels; ++k)
    if (k >= 40 || (static_cast<long long>(ball.grid_res) << k) > (1LL << 19))
      throw std::domain_error("grid oracle: grid_res * 2^k too large");
  for (int k = 1; k <= k_levels; ++k) {
    const long long radius = static_cast<long long>(ball.grid_res) << k;
    const long long total = detail::lattice_ball_count(ball.p, radius);
    const long long small =
        detail::min_ball_intersection(ball.p, radius, ball.grid_res);
    m.push_back(static_cast<double>(total) / static_cast<double>(small));
  }
  return m;
}

// Entropy for an explicit covering sequence.  Levels beyond the sequence are
// charged at the last supplied ratio, which closes the weight sum exactly:
// a constant sequence M_k = 1 yields Q = log 2.
[[nodiscard]] inline ChainingSpec chaining_entropy(
    const std::vector<double>& m_ks) {
  if (m_ks.empty())
    throw std::invalid_argument("chaining_entropy: empty covering sequence");
  for (double mk : m_ks)
    if (!(mk >= 1.0))
      throw std::domain_error("chaining_entropy: M_k >= 1 required");

  ChainingSpec spec;
  spec.m_k = m_ks;
  spec.k_trunc = static_cast<int>(m_ks.size());
  spec.tail_bound =
      (4.0 / 3.0) * std::exp2(-spec.k_trunc) * std::log(2.0 * m_ks.back());
  double q = spec.tail_bound;
  for (int k = 1; k <= spec.k_trunc; ++k)
    q += chain_weight(k) * std::log(2.0 * m_ks[static_cast<size_t>(k) - 1]);
  spec.q = q;
  return spec;
}

// Per-dimension entropy rate of the analytic ball family: Q(p) = c1(p) * p.
[[nodiscard]] inline double analytic_c1(int p) {
  if (p < 1) throw std::invalid_argument("analytic_c1: p >= 1 required");
  const double log2 = std::log(2.0);
  return (10.0 / 3.0) * log2 + log2 / static_cast<double>(p);
}

// Entropy of the analytic family M_k = 2^{(k+1)p}, truncated where the
// remaining geometric tail (4/3) 2^{-K} log2 (1 + p(K+3)) drops below 1e-12.
[[nodiscard]] inline ChainingSpec analytic_chaining(int p) {
  if (p < 1) throw std::invalid_argument("analytic_chaining: p >= 1 required");
  const double log2 = std::log(2.0);
  auto tail = [p, log2](int k) {
    return (4.0 / 3.0) * std::exp2(-k) * log2 *
           (1.0 + static_cast<double>(p) * (k + 3.0));
  };
  int k_trunc = 60;
  while (tail(k_trunc) >= 1e-12 && k_trunc < 400) ++k_trunc;

  ChainingSpec spec;
  spec.k_trunc = k_trunc;
  spec.tail_bound = tail(k_trunc);
  double q = spec.tail_bound;
  spec.m_k.reserve(static_cast<size_t>(k_trunc));
  for (int k = 1; k <= k_trunc; ++k) {
    const double log2_m = static_cast<double>(k + 1) * p;
    const double value = std::exp2(log2_m);
    spec.m_k.push_back(std::isfinite(value)
                           ? value
                           : std::numeric_limits<double>::max());
    q += chain_weight(k) * log2 * (1.0 + log2_m);  // log(2 M_k)
  }
  spec.q = q;
  return spec;
}

// Log-MGF bound lambda^2/2 + Q for the supremum of the increment field
// normalized by 3 nu0 r0; valid on 0 <= lambda <= g0.
[[nodiscard]] inline double chaining_mgf_bound(double lambda, double r0,
                                               double nu0, double q,
                                               double g0) {
  if (!(r0 > 0.0) || !(nu0 > 0.0))
    throw std::invalid_argument("chaining_mgf_bound: r0, nu0 > 0 required");
  if (!(lambda >= 0.0 && lambda <= g0))
    throw std::domain_error("outside MGF range");
  return lambda * lambda / 2.0 + q;
}

// Log of the drifted-supremum exceedance bound at drift rho and level z.
// The Gaussian branch applies while the optimal multiplier sqrt(2 rho z)
// stays inside the MGF range; beyond it the large-deviation branch takes
// over.  The value may be positive (vacuous) and is reported as-is.
[[nodiscard]] inline double drifted_sup_logprob(double rho, double z,
                                                double g0, double q) {
  if (!(rho > 0.0) || !(z > 1.0) || !(rho * (z - 1.0) >= 2.0))
    throw std::domain_error(
        "drift_cond: rho > 0, z > 1 and rho*(z-1) >= 2 required");
  const double common = std::log(4.0 * z) + q;
  if (std::sqrt(2.0 * rho * z) <= g0)
    return -rho * (z - 1.0) + common;
  return -g0 * std::sqrt(rho * (z - 1.0)) + g0 * g0 / 2.0 + common;
}

// Quantile z0(x) of the normalized local supremum: the drifted bound at
// z = z0 is at most e^{-x}.
[[nodiscard]] inline double local_quantile_z0(double x, double q, double g0) {
  if (!(x >= 0.0) || !(x + q >= 4.0) || !(g0 >= 2.0))
    throw std::domain_error(
        "z0_cond: x >= 0, x + Q >= 4 and g0 >= 2 required");
  const double s = 1.0 + std::sqrt(x + q);
  if (s <= g0) return s * s;
  const double t = 2.0 * (x + q) / g0 + g0;
  return 1.0 + t * t;
}

// z0 specialized to p-dimensional smooth fields: Q = c1(p) * p with c1 from
// the analytic ball family.
[[nodiscard]] inline double smooth_local_quantile(double x, int p, double g0) {
  return local_quantile_z0(x, analytic_c1(p) * p, g0);
}

struct MultiscaleSpec {
  double mu0 = 1.0;
  int k_max = 64;  // scales mu_k = mu0 2^{-k}, k = 0..k_max
};

struct Scale {
  int k = 0;
  double mu = 0.0;
};

// Sum of e^{-t(mu)} over the geometric scale set, tail completed; equals
// 1/(1 - 1/e) and in particular stays below 2.
[[nodiscard]] inline double multiscale_weight_sum(
    const MultiscaleSpec& ms = {}) {
  double sum = 0.0;
  for (int k = ms.k_max; k >= 0; --k) sum += std::exp(-static_cast<double>(k));
  sum += std::exp(-static_cast<double>(ms.k_max + 1)) /
         (1.0 - std::exp(-1.0));
  return sum;
}

// Scales mu_k with 1 + sqrt(x + Q + k) <= nu0 g(r) / mu_k; possibly empty.
[[nodiscard]] inline std::vector<Scale> multiscale_set(
    double r, double x, double q, double g_of_r, double nu0,
    const MultiscaleSpec& ms = {}) {
  (void)r;  // the radius enters through g_of_r = g(r)
  std::vector<Scale> admitted;
  for (int k = 0; k <= ms.k_max; ++k) {
    const double mu = ms.mu0 * std::exp2(-k);
    if (1.0 + std::sqrt(x + q + k) <= nu0 * g_of_r / mu)
      admitted.push_back({k, mu});
  }
  return admitted;
}

struct UpperFunction {
  double lstar = 0.0;
  double mu_star = 0.0;  // unconstrained continuous optimum, diagnostic only
};

// L*(v) = max over admitted mu of mu M(v)/(3 nu0) - mu^2 r^2/2 - 2 t(mu).
[[nodiscard]] inline UpperFunction upper_function_lstar(
    double mval, double r, const std::vector<Scale>& admitted, double nu0) {
  if (admitted.empty()) throw std::domain_error("no admissible scale");
  if (!(r > 0.0) || !(nu0 > 0.0))
    throw std::invalid_argument("upper_function_lstar: r, nu0 > 0 required");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& s : admitted) {
    const double term = s.mu * mval / (3.0 * nu0) -
                        s.mu * s.mu * r * r / 2.0 - 2.0 * s.k;
    best = std::max(best, term);
  }
  return {best, mval / (3.0 * nu0 * r * r)};
}

struct HittingCheck {
  bool ok = false;
  double margin = 0.0;
};

// The hitting probability is at most 2 e^{-x} once L* clears 2(x + Q).
[[nodiscard]] inline HittingCheck hitting_check(double lstar_min, double x,
                                                double q) {
  if (!(x + q >= 2.5))
    throw std::domain_error("hitting_cond: x + Q >= 2.5 required");
  const double margin = lstar_min - 2.0 * (x + q);
  return {margin >= 0.0, margin};
}

}  // namespace concfield
