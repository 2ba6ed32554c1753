#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "gibbslab/gibbs_sgld.hpp"
#include "gibbslab/mean_estimation.hpp"
#include "gibbslab/stats.hpp"

using namespace gibbslab;

namespace {

struct Fixture {
  GaussianMixtureSpec spec = GaussianMixtureSpec::axis_aligned(2, 1.0);
  LabeledSet labeled;
  PseudoLabeledSet pseudo;
  GaussianPosterior post;

  Fixture() {
    labeled = sample_labeled(spec, 5, RngStream(101, 0));
    UnlabeledSet u = sample_unlabeled(spec, 25, RngStream(101, 1));
    pseudo = pseudo_label_sign(fit_w0(labeled), u.features);
    post = gibbs_posterior(labeled, pseudo, 1.0);
  }
};

}  // namespace

TEST_CASE("quadratic risk: gradient vanishes at the posterior mean") {
  Fixture f;
  EmpiricalRiskFn risk = make_mean_est_risk(f.labeled, f.pseudo);
  CHECK(risk.gradient(f.post.mean).norm() <= 1e-10);
  double at_mean = risk.value(f.post.mean);
  RngStream rs(55, 0);
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd w(2);
    w << 3.0 * rs.normal(), 3.0 * rs.normal();
    CHECK(risk.value(w) >= at_mean);
  }
}

TEST_CASE("risk gradients match central finite differences") {
  Fixture f;
  EmpiricalRiskFn quad = make_mean_est_risk(f.labeled, f.pseudo);
  CHECK(max_gradient_rel_error(quad, 10, 2.0, RngStream(7, 0)) <= 1e-5);

  EmpiricalRiskFn logi = make_logistic_risk(f.labeled, f.pseudo, 1e-3);
  CHECK(max_gradient_rel_error(logi, 10, 2.0, RngStream(7, 1)) <= 1e-5);

  // with abstentions in the pseudo set
  PseudoLabeledSet abstained = pseudo_label_threshold(
      fit_w0(f.labeled), f.pseudo.features, 1.0);
  EmpiricalRiskFn logi_abs = make_logistic_risk(f.labeled, abstained, 1e-3);
  CHECK(max_gradient_rel_error(logi_abs, 10, 2.0, RngStream(7, 2)) <= 1e-5);

  // labeled-only risk (empty pseudo set)
  PseudoLabeledSet empty;
  empty.features.resize(0, 2);
  empty.pseudo_labels.resize(0);
  EmpiricalRiskFn logi_l = make_logistic_risk(f.labeled, empty, 1e-3);
  CHECK(logi_l.eta == 0.0);
  CHECK(max_gradient_rel_error(logi_l, 10, 2.0, RngStream(7, 3)) <= 1e-5);
}

TEST_CASE("logistic risk value and gradient at the origin") {
  Fixture f;
  EmpiricalRiskFn risk = make_logistic_risk(f.labeled, f.pseudo, 0.0);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  CHECK(risk.value(zero) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // gradient at 0 is -(weighted mean of y x)/2
  double eta = risk.eta;
  Eigen::VectorXd mean_l = Eigen::VectorXd::Zero(2);
  for (long i = 0; i < f.labeled.n(); ++i)
    mean_l += f.labeled.labels(i) * f.labeled.features.row(i).transpose();
  mean_l /= static_cast<double>(f.labeled.n());
  Eigen::VectorXd mean_u = Eigen::VectorXd::Zero(2);
  for (long j = 0; j < f.pseudo.m(); ++j)
    mean_u += f.pseudo.pseudo_labels(j) * f.pseudo.features.row(j).transpose();
  mean_u /= static_cast<double>(f.pseudo.m());
  Eigen::VectorXd expected =
      -0.5 * (mean_l / (1.0 + eta) + eta / (1.0 + eta) * mean_u);
  CHECK((risk.gradient(zero) - expected).norm() <= 1e-12);
}

TEST_CASE("huge regularization pins the logistic minimizer at zero") {
  Fixture f;
  EmpiricalRiskFn risk = make_logistic_risk(f.labeled, f.pseudo, 1e6);
  // plain gradient descent is enough: the objective is 1e6-strongly convex
  Eigen::VectorXd w = Eigen::VectorXd::Ones(2);
  for (int it = 0; it < 200; ++it) w -= 1e-6 * risk.gradient(w);
  CHECK(w.norm() <= 1e-3);
  CHECK(risk.value(w) <= risk.value(Eigen::VectorXd::Ones(2)));
}

TEST_CASE("abstained rows are excluded from the pseudo term") {
  Fixture f;
  PseudoLabeledSet all_abstain = f.pseudo;
  all_abstain.pseudo_labels.setZero();
  EmpiricalRiskFn risk = make_logistic_risk(f.labeled, all_abstain, 0.0);
  // pseudo term contributes nothing; value reduces to the weighted labeled part
  EmpiricalRiskFn labeled_only = make_logistic_risk(
      f.labeled, PseudoLabeledSet{Eigen::MatrixXd(0, 2), Eigen::VectorXi(0)}, 0.0);
  Eigen::VectorXd w(2);
  w << 0.4, -0.7;
  double eta = risk.eta;
  CHECK(risk.value(w) ==
        doctest::Approx(labeled_only.value(w) / (1.0 + eta)).epsilon(1e-12));
}

TEST_CASE("sgld with zero noise is gradient descent onto the posterior mean") {
  Fixture f;
  EmpiricalRiskFn risk = make_mean_est_risk(f.labeled, f.pseudo);
  SgldConfig cfg;
  cfg.step_size = 0.1;
  cfg.inverse_temperature = 1.0;
  cfg.iterations = 300;
  cfg.burn_in = 299;
  cfg.thin = 1;
  cfg.noise_scale = 0.0;
  Eigen::MatrixXd kept = run_sgld(risk, cfg, Eigen::VectorXd::Zero(2),
                                  RngStream(1, 0));
  CHECK(kept.rows() == 1);
  CHECK((kept.row(0).transpose() - f.post.mean).norm() <= 1e-8);
}

TEST_CASE("sgld trajectories are bit-identical under a fixed seed") {
  Fixture f;
  EmpiricalRiskFn risk = make_mean_est_risk(f.labeled, f.pseudo);
  SgldConfig cfg;
  cfg.step_size = 0.05;
  cfg.inverse_temperature = 1.0;
  cfg.iterations = 2000;
  cfg.burn_in = 100;
  cfg.thin = 3;
  Eigen::MatrixXd a = run_sgld(risk, cfg, Eigen::VectorXd::Zero(2), RngStream(9, 4));
  Eigen::MatrixXd b = run_sgld(risk, cfg, Eigen::VectorXd::Zero(2), RngStream(9, 4));
  CHECK(a == b);
  CHECK(a.rows() == (cfg.iterations - cfg.burn_in) / cfg.thin);
}

TEST_CASE("sgld reproduces the closed-form posterior moments") {
  Fixture f;
  EmpiricalRiskFn risk = make_mean_est_risk(f.labeled, f.pseudo);
  SgldConfig cfg;
  cfg.step_size = 0.02;
  cfg.inverse_temperature = f.post.alpha;  // gamma = alpha = 1
  cfg.iterations = 200000;
  cfg.burn_in = 10000;
  Eigen::MatrixXd kept = run_sgld(risk, cfg, f.post.mean, RngStream(33, 0));
  for (int j = 0; j < 2; ++j) {
    std::vector<double> series(kept.rows());
    for (long i = 0; i < kept.rows(); ++i) series[static_cast<std::size_t>(i)] = kept(i, j);
    double mean = kept.col(j).mean();
    double se = batch_means_std_err(series);
    CHECK(std::abs(mean - f.post.mean(j)) <= 3.0 * se);
    double var = (kept.col(j).array() - mean).square().sum() /
                 static_cast<double>(kept.rows() - 1);
    CHECK(std::abs(var - f.post.variance) <= 0.10 * f.post.variance);
  }
}

TEST_CASE("sgld aborts with a diagnostic on a non-finite gradient") {
  EmpiricalRiskFn bad;
  bad.dim = 1;
  bad.n = 1;
  bad.m = 1;
  bad.eta = 1.0;
  bad.value = [](const Eigen::VectorXd&) { return 0.0; };
  bad.gradient = [](const Eigen::VectorXd& w) {
    Eigen::VectorXd g(1);
    g(0) = w(0) > 2.0 ? std::numeric_limits<double>::quiet_NaN() : -10.0;
    return g;
  };
  SgldConfig cfg;
  cfg.step_size = 0.5;
  cfg.inverse_temperature = 1.0;
  cfg.iterations = 100;
  cfg.burn_in = 0;
  cfg.noise_scale = 0.0;
  CHECK_THROWS_WITH_AS(
      run_sgld(bad, cfg, Eigen::VectorXd::Zero(1), RngStream(1, 0)),
      doctest::Contains("iteration"), std::runtime_error);
}

TEST_CASE("sgld config validation") {
  SgldConfig cfg;
  cfg.step_size = 0.1;
  cfg.inverse_temperature = 1.0;
  cfg.iterations = 10;
  cfg.burn_in = 10;  // must be < iterations
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.burn_in = 5;
  cfg.thin = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.thin = 1;
  cfg.step_size = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
