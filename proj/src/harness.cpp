#include "gibbslab/harness.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <set>

#include "gibbslab/gibbs_sgld.hpp"
#include "gibbslab/mean_estimation.hpp"
#include "gibbslab/ssmle_logistic.hpp"
#include "gibbslab/svg.hpp"

namespace gibbslab {

namespace {

const std::set<std::string> kCommonKeys = {"seed", "out"};

std::set<std::string> with_common(std::set<std::string> keys) {
  keys.insert(kCommonKeys.begin(), kCommonKeys.end());
  return keys;
}

void write_artifacts(const ExperimentConfig& cfg, const SweepResult& sweep,
                     const PlotOptions& plot) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  std::string base = (fs::path(cfg.output_dir) / cfg.experiment).string();
  write_csv_file(base + ".csv", sweep);
  write_svg_file(base + ".svg", sweep, plot);
}

GaussianMixtureSpec axis_spec(const ExperimentConfig& cfg) {
  return GaussianMixtureSpec::axis_aligned(
      static_cast<int>(cfg.params.get_long("d", 2)),
      cfg.params.get_double("sigma", 1.0));
}

LogisticProblemSpec logistic_spec(const ExperimentConfig& cfg) {
  LogisticProblemSpec spec;
  spec.mixture = GaussianMixtureSpec::all_ones(
      static_cast<int>(cfg.params.get_long("d", 2)), 1.0,
      cfg.params.get_double("mu", 2.0));
  spec.nu = cfg.params.get_double("nu", 1e-3);
  spec.quadrature_size = cfg.params.get_long("quadrature_size", 1000000);
  spec.lambda = 0.0;
  return spec;
}

const std::vector<double> kDefaultLambdaGrid = {0, 0.5, 1, 3, 10, 30, 100};

// ---------------------------------------------------------------------------
// mean-gen-sweep: gen-error of mean estimation vs lambda. Exact formulas
// assembled from one high-precision cross-covariance run; E_n alongside.
// ---------------------------------------------------------------------------
int run_mean_gen_sweep(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.params.ensure_known(with_common(
      {"sigma", "d", "n", "trials", "en_samples", "lambda_grid"}));
  GaussianMixtureSpec spec = axis_spec(cfg);
  long n = cfg.params.get_long("n", 5);
  std::int64_t trials = cfg.params.get_long("trials", 1000000);
  std::int64_t en_samples = cfg.params.get_long("en_samples", trials);
  auto grid = cfg.params.get_grid("lambda_grid", kDefaultLambdaGrid);

  McEstimate cc = cross_cov_mc(spec, n, Labeler::sign(), trials,
                               RngStream(cfg.seed, 0));
  McEstimate en = e_n_mc(spec, n, en_samples, RngStream(cfg.seed, kStreamSpacing));
  log << cfg.experiment << ": cross_cov = " << cc.estimate << " +- "
      << cc.std_err << ", E_n = " << en.estimate << " +- " << en.std_err
      << "\n";

  SweepResult sweep;
  for (double lam : grid) {
    long m = std::llround(lam * static_cast<double>(n));
    GenErrorReport rep = make_gen_error_report(spec, n, m, cc, en);
    sweep.add(rep.lambda, "gen_ssl", rep.ssl_gen,
              m == 0 ? std::nullopt : std::optional<double>(rep.std_err), n, m);
    sweep.add(rep.lambda, "gen_sl_n", rep.sl_n_gen, std::nullopt, n, m);
    sweep.add(rep.lambda, "gen_sl_nm", rep.sl_nm_gen, std::nullopt, n, m);
    sweep.add(rep.lambda, "cross_cov", rep.cross_cov, cc.std_err, n, m);
    sweep.add(rep.lambda, "e_n", rep.e_n, en.std_err, n, m);
    log << cfg.experiment << ": lambda = " << rep.lambda
        << " gen_ssl = " << rep.ssl_gen << " gen_sl_n = " << rep.sl_n_gen
        << " gen_sl_nm = " << rep.sl_nm_gen << "\n";
  }
  sweep.sort_rows();
  write_artifacts(cfg, sweep,
                  {"gen-error of mean estimation vs lambda", "lambda = m/n",
                   "gen-error", true});
  return 0;
}

// ---------------------------------------------------------------------------
// crosscov-threshold-sweep: one cross_cov_mc call per threshold,
// all fed from the same base stream (common random numbers across T).
// ---------------------------------------------------------------------------
int run_threshold_sweep(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.params.ensure_known(with_common({"sigma", "d", "n", "trials", "t_grid"}));
  GaussianMixtureSpec spec = axis_spec(cfg);
  long n = cfg.params.get_long("n", 5);
  std::int64_t trials = cfg.params.get_long("trials", 1000000);
  auto grid = cfg.params.get_grid(
      "t_grid", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10});

  SweepResult sweep;
  for (double t : grid) {
    if (t < 0.0) throw ConfigError("t_grid entries must be >= 0");
    McEstimate cc = cross_cov_mc(spec, n, Labeler::thresholded(t), trials,
                                 RngStream(cfg.seed, 0));
    sweep.add(t, "cross_cov", cc.estimate, cc.std_err, n, 0);
    log << cfg.experiment << ": T = " << t << " cross_cov = " << cc.estimate
        << " +- " << cc.std_err << "\n";
  }
  sweep.sort_rows();
  double chosen = select_threshold(sweep);
  log << cfg.experiment << ": selected threshold T = " << chosen << "\n";
  write_artifacts(cfg, sweep,
                  {"cross-covariance vs confidence threshold", "threshold T",
                   "trace of cross-covariance", false});
  return 0;
}

// ---------------------------------------------------------------------------
// verify-theorem1: the symmetrized-KL assembly must reproduce the exact
// gen-error formula to 1e-10 relative on random parameter draws.
// ---------------------------------------------------------------------------
int run_verify_theorem1(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.params.ensure_known(with_common({"draws"}));
  long draws = cfg.params.get_long("draws", 100);
  RngStream rng(cfg.seed, 0);

  SweepResult sweep;
  double worst = 0.0;
  for (long i = 0; i < draws; ++i) {
    int d = 1 + static_cast<int>(rng.next_u64() % 8);
    GaussianMixtureSpec spec =
        GaussianMixtureSpec::axis_aligned(d, 0.1 + 3.0 * rng.uniform());
    long n = 1 + static_cast<long>(rng.next_u64() % 1000);
    long m = static_cast<long>(rng.next_u64() % 5000);
    double alpha = std::exp(3.0 * (rng.uniform() - 0.5));
    double cc = 2.0 * (rng.uniform() - 0.5);
    Theorem1Assembly ta = theorem1_assembly(spec, n, m, alpha, cc);
    double reference = gen_error_ssl(spec, n, m, cc);
    double residual = std::abs(ta.assembled_gen - reference) /
                      std::max(1.0, std::abs(reference));
    worst = std::max(worst, residual);
    sweep.add(static_cast<double>(i), "assembly_residual", residual,
              std::nullopt, n, m);
  }
  sweep.sort_rows();
  write_artifacts(cfg, sweep,
                  {"theorem-1 assembly residuals", "draw", "relative residual",
                   false});
  log << cfg.experiment << ": worst relative residual = " << worst << " over "
      << draws << " draws\n";
  if (worst > 1e-10) {
    log << cfg.experiment << ": FAIL (tolerance 1e-10)\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// verify-oracles: the oracle triangle. cross_cov_mc, e_n_mc and the
// definition-MC back-solved cross-covariance must agree pairwise within
// 3 combined std-errs.
// ---------------------------------------------------------------------------
int run_verify_oracles(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.params.ensure_known(with_common(
      {"trials", "d", "sigma_grid", "n_grid", "def_n", "def_m", "alpha"}));
  std::int64_t trials = cfg.params.get_long("trials", 400000);
  int d = static_cast<int>(cfg.params.get_long("d", 2));
  auto sigmas = cfg.params.get_grid("sigma_grid", {0.5, 1.0, 2.0});
  auto ns = cfg.params.get_grid("n_grid", {5, 100});

  SweepResult sweep;
  int violations = 0;
  std::uint64_t call = 0;
  auto next_stream = [&] { return RngStream(cfg.seed, (call++) * kStreamSpacing); };

  int cell = 0;
  for (double sigma : sigmas) {
    for (double n_real : ns) {
      long n = static_cast<long>(n_real);
      GaussianMixtureSpec spec = GaussianMixtureSpec::axis_aligned(d, sigma);
      McEstimate cc = cross_cov_mc(spec, n, Labeler::sign(), trials, next_stream());
      McEstimate en = e_n_mc(spec, n, trials, next_stream());
      double z = (cc.estimate - en.estimate) /
                 combined_std_err(cc.std_err, en.std_err);
      sweep.add(cell, "cross_cov", cc.estimate, cc.std_err, n, 0);
      sweep.add(cell, "e_n", en.estimate, en.std_err, n, 0);
      sweep.add(cell, "z_cc_vs_en", z, std::nullopt, n, 0);
      log << cfg.experiment << ": sigma = " << sigma << " n = " << n
          << " cross_cov = " << cc.estimate << " e_n = " << en.estimate
          << " z = " << z << "\n";
      if (std::abs(z) > 3.0) ++violations;
      if (en.estimate < -3.0 * en.std_err) ++violations;
      ++cell;
    }
  }

  // definition-route back-solve at one reference setting
  long def_n = cfg.params.get_long("def_n", 5);
  long def_m = cfg.params.get_long("def_m", 25);
  double alpha = cfg.params.get_double("alpha", 1.0);
  GaussianMixtureSpec spec = GaussianMixtureSpec::axis_aligned(d, 1.0);
  McEstimate def = gen_error_definition_mc(spec, def_n, def_m, alpha,
                                           Labeler::sign(), trials, next_stream());
  McEstimate cc = cross_cov_mc(spec, def_n, Labeler::sign(), trials, next_stream());
  double factor = 2.0 * static_cast<double>(def_m) / static_cast<double>(def_n + def_m);
  double cc_from_def = (def.estimate - gen_error_sl(spec, def_n + def_m)) / factor;
  double cc_from_def_se = def.std_err / factor;
  double z = (cc_from_def - cc.estimate) /
             combined_std_err(cc_from_def_se, cc.std_err);
  sweep.add(cell, "cross_cov_from_definition", cc_from_def, cc_from_def_se,
            def_n, def_m);
  sweep.add(cell, "cross_cov", cc.estimate, cc.std_err, def_n, def_m);
  sweep.add(cell, "z_def_vs_cc", z, std::nullopt, def_n, def_m);
  log << cfg.experiment << ": definition back-solved cross_cov = " << cc_from_def
      << " direct = " << cc.estimate << " z = " << z << "\n";
  if (std::abs(z) > 3.0) ++violations;

  sweep.sort_rows();
  write_artifacts(cfg, sweep,
                  {"oracle agreement", "cell", "estimate", false});
  if (violations > 0) {
    log << cfg.experiment << ": FAIL (" << violations << " violations)\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// sgld-check: the sampler must reproduce the closed-form Gaussian posterior
// moments on the quadratic risk.
// ---------------------------------------------------------------------------
int run_sgld_check(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.params.ensure_known(with_common({"sigma", "d", "n", "m", "alpha",
                                       "step_size", "iterations", "burn_in",
                                       "thin"}));
  GaussianMixtureSpec spec = axis_spec(cfg);
  long n = cfg.params.get_long("n", 5);
  long m = cfg.params.get_long("m", 25);
  double alpha = cfg.params.get_double("alpha", 1.0);

  LabeledSet labeled = sample_labeled(spec, n, RngStream(cfg.seed, 0));
  UnlabeledSet unlabeled = sample_unlabeled(spec, m, RngStream(cfg.seed, 1));
  PseudoLabeledSet pseudo =
      pseudo_label_sign(fit_w0(labeled), unlabeled.features);
  GaussianPosterior post = gibbs_posterior(labeled, pseudo, alpha);
  EmpiricalRiskFn risk = make_mean_est_risk(labeled, pseudo);

  SgldConfig sgld;
  sgld.step_size = cfg.params.get_double("step_size", 0.02 / alpha);
  sgld.inverse_temperature = alpha;
  sgld.iterations = cfg.params.get_long("iterations", 300000);
  sgld.burn_in = cfg.params.get_long("burn_in", 20000);
  sgld.thin = cfg.params.get_long("thin", 1);
  Eigen::MatrixXd samples = run_sgld(risk, sgld, Eigen::VectorXd::Zero(spec.dim),
                                     RngStream(cfg.seed, 2));

  SweepResult sweep;
  int violations = 0;
  for (int j = 0; j < spec.dim; ++j) {
    std::vector<double> series(samples.rows());
    for (long i = 0; i < samples.rows(); ++i) series[static_cast<std::size_t>(i)] = samples(i, j);
    double mean = samples.col(j).mean();
    double se = batch_means_std_err(series);
    double var = (samples.col(j).array() - mean).square().sum() /
                 static_cast<double>(samples.rows() - 1);
    sweep.add(j, "sample_mean", mean, se, n, m);
    sweep.add(j, "posterior_mean", post.mean(j), std::nullopt, n, m);
    sweep.add(j, "sample_variance", var, std::nullopt, n, m);
    sweep.add(j, "posterior_variance", post.variance, std::nullopt, n, m);
    bool mean_ok = std::abs(mean - post.mean(j)) <= 3.0 * se;
    bool var_ok = std::abs(var - post.variance) <= 0.10 * post.variance;
    log << cfg.experiment << ": coord " << j << " mean = " << mean << " (target "
        << post.mean(j) << ", 3se = " << 3.0 * se << ") variance = " << var
        << " (target " << post.variance << ")\n";
    if (!mean_ok || !var_ok) ++violations;
  }
  sweep.sort_rows();
  write_artifacts(cfg, sweep, {"sgld moment check", "coordinate", "value", false});
  if (violations > 0) {
    log << cfg.experiment << ": FAIL (" << violations << " coordinate checks)\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// logistic-theory-sweep: asymptotic n * gen-error vs lambda.
// ---------------------------------------------------------------------------
int run_logistic_theory(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.params.ensure_known(with_common({"mu", "d", "nu", "quadrature_size",
                                       "lambda_grid"}));
  LogisticProblemSpec spec = logistic_spec(cfg);
  auto grid = cfg.params.get_grid("lambda_grid", kDefaultLambdaGrid);

  QuadratureSample quad = draw_quadrature(spec, RngStream(cfg.seed, 0));
  Eigen::VectorXd w0 = solve_w_star_0(spec, quad);
  SweepResult sweep;
  for (double lam : grid) {
    LogisticProblemSpec at = spec;
    at.lambda = lam;
    AsymptoticReport rep = asymptotic_report(at, quad, w0);
    sweep.add(lam, "n_times_gen", rep.n_times_gen, std::nullopt, 0, 0);
    log << cfg.experiment << ": lambda = " << lam
        << " n*gen = " << rep.n_times_gen << "\n";
  }
  sweep.sort_rows();
  write_artifacts(cfg, sweep,
                  {"asymptotic n x gen-error vs lambda", "lambda = m/n",
                   "n x gen-error", true});
  return 0;
}

// ---------------------------------------------------------------------------
// logistic-excess-risk: bias / variance / total at sample size n.
// ---------------------------------------------------------------------------
int run_logistic_excess(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.params.ensure_known(with_common({"mu", "d", "nu", "quadrature_size",
                                       "lambda_grid", "n"}));
  LogisticProblemSpec spec = logistic_spec(cfg);
  long n = cfg.params.get_long("n", 1000);
  auto grid = cfg.params.get_grid("lambda_grid", kDefaultLambdaGrid);

  QuadratureSample quad = draw_quadrature(spec, RngStream(cfg.seed, 0));
  Eigen::VectorXd w0 = solve_w_star_0(spec, quad);
  SweepResult sweep;
  for (double lam : grid) {
    LogisticProblemSpec at = spec;
    at.lambda = lam;
    AsymptoticReport rep = asymptotic_report(at, quad, w0);
    auto [bias, variance] = excess_risk(rep, n);
    sweep.add(lam, "excess_bias", bias, std::nullopt, n, 0);
    sweep.add(lam, "excess_variance", variance, std::nullopt, n, 0);
    sweep.add(lam, "excess_total", bias + variance, std::nullopt, n, 0);
    log << cfg.experiment << ": lambda = " << lam << " bias = " << bias
        << " variance = " << variance << " total = " << bias + variance
        << "\n";
  }
  sweep.sort_rows();
  write_artifacts(cfg, sweep,
                  {"asymptotic excess risk vs lambda", "lambda = m/n",
                   "excess risk", true});
  return 0;
}

// ---------------------------------------------------------------------------
// logistic-empirical: finite-sample ERM gen-error vs lambda.
// ---------------------------------------------------------------------------
int run_logistic_empirical(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.params.ensure_known(with_common({"mu", "d", "nu", "n", "lambda_grid",
                                       "repetitions", "test_size"}));
  LogisticProblemSpec spec = logistic_spec(cfg);
  spec.quadrature_size = 2;  // unused by the empirical path

  EmpiricalGenOptions opts;
  opts.n = cfg.params.get_long("n", 1000);
  opts.repetitions = static_cast<int>(cfg.params.get_long("repetitions", 40));
  opts.test_size = cfg.params.get_long("test_size", 100000);
  opts.lambda_grid = cfg.params.get_grid("lambda_grid", kDefaultLambdaGrid);

  EmpiricalGenResult result =
      empirical_gen_experiment(spec, opts, RngStream(cfg.seed, 0));
  bool invalid = false;
  for (const auto& row : result.sweep.rows) {
    log << cfg.experiment << ": lambda = " << row.sweep_variable
        << " empirical_gen = " << row.value;
    if (row.std_err) log << " +- " << *row.std_err;
    log << "\n";
    if (std::isnan(row.value)) invalid = true;
  }
  write_artifacts(cfg, result.sweep,
                  {"empirical gen-error vs lambda", "lambda = m/n",
                   "gen-error", true});
  if (invalid) {
    log << cfg.experiment << ": FAIL (cells with >10% Newton failures)\n";
    return 1;
  }
  return 0;
}

}  // namespace

double select_threshold(const SweepResult& sweep) {
  const SweepRow* best = nullptr;
  for (const auto& row : sweep.rows) {
    if (row.quantity != "cross_cov") continue;
    if (!best || row.value < best->value ||
        (row.value == best->value && row.sweep_variable < best->sweep_variable))
      best = &row;
  }
  if (!best) throw std::invalid_argument("select_threshold: no cross_cov rows");
  return best->sweep_variable;
}

int run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.experiment == "mean-gen-sweep") return run_mean_gen_sweep(cfg, log);
  if (cfg.experiment == "crosscov-threshold-sweep") return run_threshold_sweep(cfg, log);
  if (cfg.experiment == "verify-theorem1") return run_verify_theorem1(cfg, log);
  if (cfg.experiment == "verify-oracles") return run_verify_oracles(cfg, log);
  if (cfg.experiment == "sgld-check") return run_sgld_check(cfg, log);
  if (cfg.experiment == "logistic-theory-sweep") return run_logistic_theory(cfg, log);
  if (cfg.experiment == "logistic-excess-risk") return run_logistic_excess(cfg, log);
  if (cfg.experiment == "logistic-empirical") return run_logistic_empirical(cfg, log);
  throw ConfigError("unknown experiment '" + cfg.experiment + "'");
}

}  // namespace gibbslab
