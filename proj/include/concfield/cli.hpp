#pragma once

// Command-line front end.  Every subcommand is a thin shell over the library:
// parse arguments, call one operation, serialize the result.  run_cli is
// shared by the installed binary and the test suite so reruns with the same
// seed can be checked for byte-identical output in-process.
//
// Exit codes: 0 success, 1 computational error (message names the violated
// condition), 2 usage error.

#include "concfield/bound.hpp"
#include "concfield/chaining.hpp"
#include "concfield/eigenmax.hpp"
#include "concfield/io.hpp"
#include "concfield/mc.hpp"
#include "concfield/model.hpp"
#include "concfield/quadform.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace concfield {

namespace detail {

inline void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty())
    std::fputs(content.c_str(), stdout);
  else
    atomic_write_file(out_path, content);
}

[[nodiscard]] inline std::vector<double> parse_x_arg(const std::string& text) {
  try {
    return parse_x_list(text);
  } catch (const std::invalid_argument& e) {
    throw CLI::ValidationError(e.what());
  }
}

[[nodiscard]] inline NoiseSpec parse_noise_arg(const std::string& text) {
  const auto fail = []() -> NoiseSpec {
    throw CLI::ValidationError(
        "--noise expects gaussian:<scale> or bounded:<scale>");
  };
  const size_t colon = text.find(':');
  if (colon == std::string::npos) return fail();
  const std::string kind = text.substr(0, colon);
  NoiseSpec noise;
  if (kind == "gaussian")
    noise.kind = NoiseKind::kGaussian;
  else if (kind == "bounded")
    noise.kind = NoiseKind::kBounded;
  else
    return fail();
  try {
    noise.scale = parse_double_strict(text.substr(colon + 1));
  } catch (const std::invalid_argument&) {
    return fail();
  }
  if (!(noise.scale > 0.0)) return fail();
  return noise;
}

// report.csv -> report.<tag>.csv
[[nodiscard]] inline std::string sibling_path(const std::string& path,
                                              const std::string& tag) {
  const std::filesystem::path p(path);
  std::filesystem::path out = p.parent_path();
  out /= p.stem().string() + "." + tag + p.extension().string();
  return out.string();
}

[[nodiscard]] inline std::string coverage_csv(const CoverageReport& r) {
  std::string out = "x,empirical,bound,wilson_hw,pass\n";
  for (const CoverageRow& row : r.rows) {
    out += fmt17(row.x) + "," + fmt17(row.empirical) + "," +
           fmt17(row.bound) + "," + fmt17(row.wilson_hw) + "," +
           (row.pass ? "1" : "0") + "\n";
  }
  return out;
}

inline void add_constants_options(CLI::App* cmd, ModelConstants& c) {
  cmd->add_option("--nu0", c.nu0, "declared noise scale (>= 1)");
  cmd->add_option("--omega0", c.omega0, "declared gradient-increment scale");
  cmd->add_option("--delta0", c.delta0, "declared cubic-remainder scale");
  cmd->add_option("--eps", c.eps,
                  "model eps; 0 derives 1/sqrt(lambda_min(V0^2))");
  cmd->add_option("--g", c.g, "MGF range g; 0 derives 10 sqrt(tr B)");
  cmd->add_option("--r0", c.r0, "local radius r0");
}

}  // namespace detail

inline int run_cli(std::vector<std::string> args) {
  CLI::App app{
      "concfield: explicit concentration bounds for smooth random fields "
      "with seeded Monte Carlo verification"};
  app.require_subcommand(1);

  // ---- bound ------------------------------------------------------------
  auto* bound_cmd = app.add_subcommand(
      "bound", "Supremum-bound offsets for a model loaded from JSON");
  std::string bound_model, bound_x, bound_out;
  bool bound_csv = false;
  double bound_mult = 5.0;
  bound_cmd->add_option("--model", bound_model, "model JSON file")->required();
  bound_cmd->add_option("--x", bound_x, "x grid: 'a,b,c' or 'a..b:step'")
      ->required();
  bound_cmd->add_flag("--csv", bound_csv, "CSV output instead of JSON");
  bound_cmd->add_option("--out", bound_out,
                        "output file (atomic); stdout if omitted");
  bound_cmd->add_option("--multiplier", bound_mult, "probability multiplier");
  bound_cmd->callback([&] {
    const FieldModel m = model_from_json(load_json_file(bound_model));
    const ValidationReport vr = validate_model(m);
    if (!vr.valid) {
      for (const ValidationCheck& check : vr.checks)
        if (!check.pass)
          throw std::domain_error("model validation failed: " + check.name +
                                  " (margin " + fmt17(check.margin) + ")");
    }
    const std::vector<double> xs = detail::parse_x_arg(bound_x);
    std::vector<BoundReport> reports;
    reports.reserve(xs.size());
    for (double x : xs) reports.push_back(sup_bound(m, x, bound_mult));
    std::string content;
    if (bound_csv) {
      content =
          "x,r0,tau,quantile_term,error_term,total_offset,implied_c,"
          "prob_multiplier\n";
      for (const BoundReport& r : reports) {
        content += fmt17(r.x) + "," + fmt17(r.r0_used) + "," + fmt17(r.tau) +
                   "," + fmt17(r.quantile_term) + "," + fmt17(r.error_term) +
                   "," + fmt17(r.total_offset) + "," + fmt17(r.implied_c) +
                   "," + fmt17(r.prob_multiplier) + "\n";
      }
    } else {
      Json arr = Json::array();
      for (const BoundReport& r : reports) {
        Json j;
        j["x"] = r.x;
        j["r0_used"] = r.r0_used;
        j["tau"] = r.tau;
        j["quantile_term"] = r.quantile_term;
        j["error_term"] = r.error_term;
        j["total_offset"] = r.total_offset;
        j["implied_c"] = r.implied_c;
        j["prob_multiplier"] = r.prob_multiplier;
        j["validity"] = {{"eps_cond", r.validity.eps_cond},
                         {"global_cond", r.validity.global_cond},
                         {"tau_cond", r.validity.tau_cond},
                         {"xc_cond", r.validity.xc_cond}};
        arr.push_back(std::move(j));
      }
      content = arr.dump(2) + "\n";
    }
    detail::emit(bound_out, content);
  });

  // ---- quadform z ---------------------------------------------------------
  auto* quad_cmd =
      app.add_subcommand("quadform", "Quadratic-form deviation quantiles");
  quad_cmd->require_subcommand(1);
  auto* quad_z = quad_cmd->add_subcommand(
      "z", "deviation quantile z(x) and its branch per x");
  std::string qz_b, qz_g = "auto", qz_x, qz_out;
  bool qz_env = false;
  quad_z->add_option("--b", qz_b, "matrix JSON file for B")->required();
  quad_z->add_option("--g", qz_g, "MGF range g, or 'auto' (10 sqrt(tr B))");
  quad_z->add_option("--x", qz_x, "x grid")->required();
  quad_z->add_flag("--monotone-envelope", qz_env,
                   "report the running-max envelope of z across branches");
  quad_z->add_option("--out", qz_out, "output file; stdout if omitted");
  quad_z->callback([&] {
    const SpdMatrix b = spd_from_json_file(qz_b);
    double g = 0.0;
    if (qz_g == "auto") {
      g = 10.0 * std::sqrt(b.trace());
    } else {
      try {
        g = detail::parse_double_strict(qz_g);
      } catch (const std::invalid_argument&) {
        throw CLI::ValidationError("--g expects a number or 'auto'");
      }
    }
    const std::vector<double> xs = detail::parse_x_arg(qz_x);
    std::string content = "x,z_dev,z_total,branch,x_c\n";
    for (double x : xs) {
      const QuantileReport rep = deviation_quantile_report(x, b, g);
      const double z_dev =
          qz_env ? monotone_quantile_envelope(x, b, g) : rep.z_dev;
      content += fmt17(x) + "," + fmt17(z_dev) + "," +
                 fmt17(b.trace() + z_dev) + "," + branch_name(rep.branch) +
                 "," + fmt17(rep.x_c) + "\n";
    }
    detail::emit(qz_out, content);
  });

  // ---- chaining q ---------------------------------------------------------
  auto* chain_cmd = app.add_subcommand(
      "chaining", "Dyadic covering masses and the entropy sum Q");
  chain_cmd->require_subcommand(1);
  auto* chain_q = chain_cmd->add_subcommand("q", "entropy sum for a ball");
  int cq_p = 1;
  double cq_r0 = 1.0;
  bool cq_numeric = false;
  int cq_grid = 4;
  std::string cq_out;
  chain_q->add_option("--p", cq_p, "dimension")->required();
  chain_q->add_option("--r0", cq_r0, "ball radius");
  chain_q->add_flag("--numeric", cq_numeric,
                    "integer-lattice covering oracle (p <= 3)");
  chain_q->add_option("--grid", cq_grid, "lattice resolution per unit radius");
  chain_q->add_option("--out", cq_out, "output file; stdout if omitted");
  chain_q->callback([&] {
    BallSpec ball;
    ball.p = cq_p;
    ball.r0 = cq_r0;
    ball.grid_res = cq_grid;
    ball.measure = cq_numeric ? BallMeasure::kNumericGrid
                              : BallMeasure::kLebesgueEuclidean;
    ChainingSpec spec;
    if (cq_numeric) {
      spec = chaining_entropy(covering_ratios(ball, 6));
    } else {
      if (cq_p < 1)
        throw std::invalid_argument("chaining q: p >= 1 required");
      if (!(cq_r0 > 0.0))
        throw std::invalid_argument("chaining q: r0 > 0 required");
      spec = analytic_chaining(cq_p);
    }
    Json j;
    j["p"] = cq_p;
    j["r0"] = cq_r0;
    j["numeric"] = cq_numeric;
    j["M_k"] = spec.m_k;
    j["Q"] = spec.q;
    j["c1"] = spec.q / cq_p;
    detail::emit(cq_out, j.dump(2) + "\n");
  });

  // ---- eigen compare ------------------------------------------------------
  auto* eigen_cmd = app.add_subcommand(
      "eigen", "Largest-eigenvalue application of the field bound");
  eigen_cmd->require_subcommand(1);
  auto* eigen_cmp = eigen_cmd->add_subcommand(
      "compare", "field bound vs matrix Bernstein on a common event scale");
  std::string ec_mean, ec_x, ec_noise = "bounded:1", ec_out;
  std::vector<int> ec_n, ec_p;
  uint64_t ec_seed = 0;
  ModelConstants ec_c;
  eigen_cmp->add_option("--mean", ec_mean, "summand mean matrix JSON file");
  eigen_cmp->add_option("--n-grid", ec_n, "ensemble sizes")
      ->required()
      ->delimiter(',');
  eigen_cmp->add_option("--p-grid", ec_p, "dimensions (synthetic mean)")
      ->delimiter(',');
  eigen_cmp->add_option("--x-grid", ec_x, "x grid")->required();
  eigen_cmp->add_option("--noise", ec_noise,
                        "noise model: bounded:<scale> (or gaussian:<scale>)");
  eigen_cmp->add_option("--seed", ec_seed, "stream seed");
  eigen_cmp->add_option("--out", ec_out, "output file; stdout if omitted");
  detail::add_constants_options(eigen_cmp, ec_c);
  eigen_cmp->callback([&] {
    EnsembleSpec proto;
    proto.noise = detail::parse_noise_arg(ec_noise);
    proto.seed = ec_seed;
    std::vector<int> p_grid = ec_p;
    if (!ec_mean.empty()) {
      proto.mean_summand = spd_from_json_file(ec_mean);
      if (p_grid.empty()) p_grid = {proto.mean_summand.dim()};
    } else if (p_grid.empty()) {
      throw CLI::ValidationError("eigen compare: need --mean or --p-grid");
    }
    const std::vector<double> xs = detail::parse_x_arg(ec_x);
    const std::vector<ComparisonRow> rows =
        compare_bounds(proto, ec_n, p_grid, xs, ec_c);
    std::string content =
        "n,p,x,paper_thresh,bernstein_thresh_mapped,ratio,winner\n";
    for (const ComparisonRow& r : rows) {
      content += std::to_string(r.n) + "," + std::to_string(r.p) + "," +
                 fmt17(r.x) + "," + fmt17(r.paper_mapped) + "," +
                 fmt17(r.bernstein_mapped) + "," + fmt17(r.ratio) + "," +
                 r.winner + "\n";
    }
    detail::emit(ec_out, content);
  });

  // ---- mc -----------------------------------------------------------------
  auto* mc_cmd = app.add_subcommand(
      "mc", "Seeded Monte Carlo coverage reports (byte-stable per seed)");
  mc_cmd->require_subcommand(1);

  auto* mc_quad = mc_cmd->add_subcommand(
      "quadform", "tail of xi' B xi for xi ~ N(0, Sigma)");
  std::string mq_b, mq_sigma, mq_x, mq_out;
  long long mq_trials = 100000;
  uint64_t mq_seed = 0;
  mc_quad->add_option("--b", mq_b, "matrix JSON file for B")->required();
  mc_quad->add_option("--sigma", mq_sigma,
                      "matrix JSON for Sigma (default: identity)");
  mc_quad->add_option("--trials", mq_trials, "replica count (>= 10000)");
  mc_quad->add_option("--seed", mq_seed, "stream seed");
  mc_quad->add_option("--x", mq_x, "x grid")->required();
  mc_quad->add_option("--out", mq_out, "output file; stdout if omitted");
  mc_quad->callback([&] {
    const SpdMatrix b = spd_from_json_file(mq_b);
    const SpdMatrix sigma = mq_sigma.empty() ? SpdMatrix::identity(b.dim())
                                             : spd_from_json_file(mq_sigma);
    const CoverageReport report = sample_quadform(
        b, sigma, detail::parse_x_arg(mq_x), mq_trials, mq_seed);
    detail::emit(mq_out, detail::coverage_csv(report));
  });

  auto* mc_field = mc_cmd->add_subcommand(
      "field", "supremum-bound coverage for an eigenvalue field ensemble");
  std::string mf_mean, mf_noise = "gaussian:1", mf_x, mf_out;
  int mf_n = 1;
  long long mf_trials = 2000;
  uint64_t mf_seed = 0;
  double mf_mult = 5.0;
  ModelConstants mf_c;
  mc_field->add_option("--mean", mf_mean, "summand mean matrix JSON file")
      ->required();
  mc_field->add_option("--n", mf_n, "ensemble size")->required();
  mc_field->add_option("--noise", mf_noise, "gaussian:<s> or bounded:<s>");
  mc_field->add_option("--trials", mf_trials, "replica count");
  mc_field->add_option("--seed", mf_seed, "stream seed");
  mc_field->add_option("--x", mf_x, "x grid")->required();
  mc_field->add_option("--out", mf_out, "output file; stdout if omitted");
  mc_field->add_option("--multiplier", mf_mult, "probability multiplier");
  detail::add_constants_options(mc_field, mf_c);
  mc_field->callback([&] {
    EnsembleSpec e;
    e.mean_summand = spd_from_json_file(mf_mean);
    e.n = mf_n;
    e.p = e.mean_summand.dim();
    e.noise = detail::parse_noise_arg(mf_noise);
    e.seed = mf_seed;
    const PenaltySpec f = PenaltySpec::quadratic(mf_n);
    const CoverageReport report =
        verify_field_bound(make_field_spec(e, f), detail::parse_x_arg(mf_x),
                           mf_trials, mf_seed, mf_c, mf_mult);
    detail::emit(mf_out, detail::coverage_csv(report));
  });

  auto* mc_eigen = mc_cmd->add_subcommand(
      "eigen", "eigenvalue-event coverage: field bound and matrix Bernstein");
  std::string me_mean, me_noise = "bounded:1", me_x, me_out;
  int me_n = 1, me_p = 5;
  long long me_trials = 2000;
  uint64_t me_seed = 0;
  double me_mult = 5.0;
  ModelConstants me_c;
  mc_eigen->add_option("--mean", me_mean,
                       "summand mean matrix JSON (default synthetic)");
  mc_eigen->add_option("--p", me_p, "dimension for the synthetic mean");
  mc_eigen->add_option("--n", me_n, "ensemble size")->required();
  mc_eigen->add_option("--noise", me_noise, "bounded:<scale>");
  mc_eigen->add_option("--trials", me_trials, "replica count");
  mc_eigen->add_option("--seed", me_seed, "stream seed");
  mc_eigen->add_option("--x", me_x, "x grid")->required();
  mc_eigen->add_option("--out", me_out,
                       "paper-event CSV; the Bernstein report goes to "
                       "<out-stem>.bernstein<ext>");
  mc_eigen->add_option("--multiplier", me_mult, "probability multiplier");
  detail::add_constants_options(mc_eigen, me_c);
  mc_eigen->callback([&] {
    EnsembleSpec e;
    e.mean_summand =
        me_mean.empty() ? default_mean(me_p) : spd_from_json_file(me_mean);
    e.n = me_n;
    e.p = e.mean_summand.dim();
    e.noise = detail::parse_noise_arg(me_noise);
    e.seed = me_seed;
    const EigenCoverage cov = verify_eigen_bounds(
        e, PenaltySpec::quadratic(me_n), detail::parse_x_arg(me_x), me_trials,
        me_seed, me_c, me_mult);
    if (me_out.empty()) {
      detail::emit("", "# paper\n" + detail::coverage_csv(cov.paper) +
                           "# bernstein\n" +
                           detail::coverage_csv(cov.bernstein));
    } else {
      detail::emit(me_out, detail::coverage_csv(cov.paper));
      detail::emit(detail::sibling_path(me_out, "bernstein"),
                   detail::coverage_csv(cov.bernstein));
    }
  });

  // ---- parse --------------------------------------------------------------
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.push_back("concfield");
  for (std::string& a : args) storage.push_back(std::move(a));
  std::vector<const char*> argv;
  argv.reserve(storage.size());
  for (const std::string& s : storage) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

inline int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  args.reserve(argc > 0 ? argc - 1 : 0);
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(std::move(args));
}

}  // namespace concfield
