#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "concfield/quadform.hpp"

using namespace concfield;

namespace {

SpdMatrix identity_b(int p) { return SpdMatrix::identity(p); }

// Frozen critical corner for B = I_p with g = 10 sqrt(p): the normalized
// problem has t = 10 independent of p, so x_c is exactly proportional to p.
constexpr double kXcPerDimAtG10 = 27.149573088631161;

}  // namespace

TEST_CASE("solve_critical_w hits reference roots", "[quadform]") {
  struct Case {
    double t, want;
  };
  const Case cases[] = {
      {3.0, 2.276645735596785},
      {10.0, 9.0607194912377487},
      {1000.0, 999.000501000874},
      {0.003162, 0.0031520800992069191},
  };
  for (const Case& c : cases) {
    INFO("t=" << c.t);
    const double w = solve_critical_w(c.t);
    CHECK(w == Catch::Approx(c.want).epsilon(1e-12));
    CHECK(std::abs(critical_w_equation(w) - c.t) <=
          1e-12 * std::max(1.0, c.t));
  }
  // t = sqrt(2) has the exact root w = 1.
  CHECK(solve_critical_w(std::sqrt(2.0)) == Catch::Approx(1.0).margin(1e-12));
  CHECK_THROWS_WITH(solve_critical_w(0.0),
                    Catch::Matchers::ContainsSubstring("t must be positive"));
}

TEST_CASE("normalized_quad divides out the top eigenvalue", "[quadform]") {
  Vector d(2);
  d << 2.0, 1.0;
  const NormalizedQuad q = normalized_quad(SpdMatrix::diagonal(d), 10.0);
  CHECK(q.lamstar == Catch::Approx(2.0).epsilon(1e-12));
  CHECK(q.trace == Catch::Approx(3.0).epsilon(1e-12));
  CHECK(q.p_app == Catch::Approx(1.5).epsilon(1e-12));
  CHECK(q.v_app == Catch::Approx(std::sqrt(10.0) / 2.0).epsilon(1e-12));
  CHECK(q.g_tilde == 10.0);
  REQUIRE(q.spectrum.size() == 2);
  CHECK(q.spectrum[0] == Catch::Approx(0.5).epsilon(1e-12));
  CHECK(q.spectrum[1] == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("MGF range condition gates the quantile", "[quadform]") {
  CHECK_THROWS_WITH(normalized_quad(identity_b(2), 1.9),
                    Catch::Matchers::ContainsSubstring("g_cond"));
  CHECK_NOTHROW(normalized_quad(identity_b(2), 2.0));  // boundary admitted
  Vector d(2);
  d << 0.0, 0.0;
  CHECK_THROWS_WITH(normalized_quad(SpdMatrix::diagonal(d), 1.0),
                    Catch::Matchers::ContainsSubstring(
                        "top eigenvalue must be positive"));
}

TEST_CASE("critical corner at the boundary g^2 = 2 tr B", "[quadform]") {
  // B = I_4, g = sqrt(8): t = sqrt(2), so w_c = 1 and mu_c = 1/2 exactly.
  const NormalizedQuad q = normalized_quad(identity_b(4), std::sqrt(8.0));
  const QuadCritical c = critical_params(q);
  CHECK(c.w_c == Catch::Approx(1.0).margin(1e-12));
  CHECK(c.mu_c == Catch::Approx(0.5).margin(1e-12));
  CHECK(c.y_c == Catch::Approx(std::sqrt(8.0)).epsilon(1e-12));
  CHECK(c.x_c == Catch::Approx(0.61370563888010938).epsilon(1e-12));
  CHECK(c.g_c == Catch::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("mu_c is capped at 2/3", "[quadform]") {
  // Large g drives w_c up; w^2/(1+w^2) -> 1 > 2/3 must be clipped.
  const NormalizedQuad q = normalized_quad(identity_b(2), 200.0);
  CHECK(critical_params(q).mu_c == Catch::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("large-deviation branch frozen value", "[quadform]") {
  const QuantileReport r =
      deviation_quantile_report(1.0, identity_b(4), std::sqrt(8.0));
  CHECK(r.branch == QuantileBranch::kLargeDeviation);
  CHECK(r.z_dev == Catch::Approx(7.3888015558251739).epsilon(1e-12));
  CHECK(r.z_total == Catch::Approx(11.388801555825174).epsilon(1e-12));
  CHECK(r.x_c == Catch::Approx(0.61370563888010938).epsilon(1e-12));
}

TEST_CASE("branch selection on the identity", "[quadform]") {
  const SpdMatrix b = identity_b(5);
  const double g = 10.0 * std::sqrt(5.0);
  // v_app = sqrt(10), so the sqrt branch ends at x = sqrt(10)/18.
  const QuantileReport small = deviation_quantile_report(0.1, b, g);
  CHECK(small.branch == QuantileBranch::kSqrt);
  CHECK(small.z_dev == Catch::Approx(2.0).epsilon(1e-12));

  const QuantileReport mid = deviation_quantile_report(1.0, b, g);
  CHECK(mid.branch == QuantileBranch::kLinear);
  CHECK(mid.z_dev == Catch::Approx(6.0).epsilon(1e-12));
  CHECK(mid.x_c == Catch::Approx(5.0 * kXcPerDimAtG10).epsilon(1e-12));

  const QuantileReport big = deviation_quantile_report(140.0, b, g);
  CHECK(big.branch == QuantileBranch::kLargeDeviation);

  CHECK_THROWS_WITH(deviation_quantile_report(0.0, b, g),
                    Catch::Matchers::ContainsSubstring("x_cond"));
}

TEST_CASE("raw quantile steps down at both handovers", "[quadform]") {
  const SpdMatrix b = identity_b(5);
  const double g = 10.0 * std::sqrt(5.0);
  const double sqrt_end = std::sqrt(10.0) / 18.0;
  const double x_c = 5.0 * kXcPerDimAtG10;
  // sqrt -> linear: 2 v sqrt(v/18) > 6 (v/18) when v > 10/9.
  CHECK(deviation_quantile(sqrt_end * (1.0 + 1e-9), b, g) <
        deviation_quantile(sqrt_end * (1.0 - 1e-9), b, g));
  // linear -> large deviation: 6 x_c > w_c^2 p_app at this geometry.
  CHECK(deviation_quantile(x_c * (1.0 + 1e-9), b, g) <
        deviation_quantile(x_c * (1.0 - 1e-9), b, g));
}

TEST_CASE("monotone envelope is nondecreasing and eventually raw",
          "[quadform]") {
  const SpdMatrix b = identity_b(5);
  const double g = 10.0 * std::sqrt(5.0);
  const double x_c = 5.0 * kXcPerDimAtG10;

  double prev = 0.0;
  for (double x = 0.01; x < 300.0; x *= 1.02) {
    const double z = monotone_quantile_envelope(x, b, g);
    INFO("x=" << x);
    REQUIRE(z >= prev - 1e-12 * std::max(1.0, prev));
    REQUIRE(z >= deviation_quantile(x, b, g) - 1e-12);
    prev = z;
  }
  // Just past the corner the envelope holds the last linear value.
  CHECK(monotone_quantile_envelope(x_c * (1.0 + 1e-9), b, g) ==
        Catch::Approx(6.0 * x_c).epsilon(1e-9));
  // Far out the large-deviation branch overtakes every held value.
  CHECK(monotone_quantile_envelope(500.0, b, g) ==
        Catch::Approx(deviation_quantile(500.0, b, g)).epsilon(1e-12));
}

TEST_CASE("total_quantile rescales by the top eigenvalue", "[quadform]") {
  Vector dd(2), dv(2);
  dd << 4.0, 1.0;
  dv << 8.0, 3.0;
  const EffectiveDims eff =
      effective_dims(SpdMatrix::diagonal(dd), SpdMatrix::diagonal(dv));
  // B = diag(2,3): linear branch at x = 1 gives z = 18, so (5 + 18)/3.
  CHECK(total_quantile(1.0, eff, 10.0) ==
        Catch::Approx(23.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("tail_bound inverts the quantile within its stated slack",
          "[quadform]") {
  const SpdMatrix b = identity_b(5);
  const double g = 10.0 * std::sqrt(5.0);
  const double x_c = 5.0 * kXcPerDimAtG10;

  CHECK(tail_bound(1.0, b, g) == 1.0);  // below sqrt(tr B)

  for (double x : {0.01, 0.05, 0.3, 1.0, 5.0, 20.0, 0.99 * x_c, 1.5 * x_c,
                   x_c + 5.0}) {
    const double y = std::sqrt(deviation_quantile_report(x, b, g).z_total);
    const double budget = 2.0 * std::exp(-x) + 8.4 * std::exp(-x_c);
    INFO("x=" << x);
    CHECK(tail_bound(y, b, g) <= budget * (1.0 + 1e-10) + 1e-300);
  }

  // In the linear region the inversion is exact.
  const double x_lin = 3.0;
  const double y_lin =
      std::sqrt(deviation_quantile_report(x_lin, b, g).z_total);
  CHECK(tail_bound(y_lin, b, g) ==
        Catch::Approx(2.0 * std::exp(-x_lin) + 8.4 * std::exp(-x_c))
            .epsilon(1e-10));

  // Monotone nonincreasing in y.
  double prev = 2.0;
  for (double y = 0.5; y < 40.0; y += 0.25) {
    const double t = tail_bound(y, b, g);
    REQUIRE(t <= prev + 1e-15);
    prev = t;
  }
}
