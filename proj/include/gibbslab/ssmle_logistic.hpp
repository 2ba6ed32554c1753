#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "gibbslab/rng.hpp"
#include "gibbslab/stats.hpp"
#include "gibbslab/sweep.hpp"
#include "gibbslab/synthdata.hpp"

namespace gibbslab {

struct LogisticProblemSpec {
  GaussianMixtureSpec mixture;  // mean vector mu * 1_d, unit noise
  double nu = 0.0;              // regularization strength, > 0
  long quadrature_size = 0;     // N_q
  double lambda = 0.0;          // m/n ratio
  void validate() const;
};

// Frozen common-random-numbers sample of (x, y) pairs from P_Z. When the mean
// direction is proportional to 1_d and d <= 4, the sample is augmented with
// all coordinate permutations of each base draw (the law is permutation
// invariant), which makes every quadrature objective exactly symmetric.
struct QuadratureSample {
  Eigen::MatrixXd x;  // N_q x d
  Eigen::VectorXd y;  // in {-1,+1}, stored as doubles for arithmetic
  long size() const { return x.rows(); }
};

QuadratureSample draw_quadrature(const LogisticProblemSpec& spec,
                                 RngStream rng);

// One weighted term of a mixed logistic objective sharing a feature matrix.
struct LogisticTerm {
  const Eigen::MatrixXd* x = nullptr;
  const Eigen::VectorXd* y = nullptr;
  double weight = 1.0;
};

struct NewtonOptions {
  double grad_tol = 1e-9;
  int max_iterations = 200;
  int max_halvings = 50;
};

struct NewtonResult {
  Eigen::VectorXd w;
  double objective = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Damped Newton (backtracking by halving) on
//   sum_t weight_t * mean_i softplus(-y_i w^T x_i) + (nu/2) |w|^2
// from the given start. The objective is nu-strongly convex.
NewtonResult newton_logistic(std::span<const LogisticTerm> terms, double nu,
                             const Eigen::VectorXd& init,
                             const NewtonOptions& opts = {});

// Population matrices at a point: j_mat is the expected Hessian of the
// unregularized log-loss, i_l_mat the expected gradient outer product. Both
// are symmetrized and PSD-checked.
struct PopulationMatrices {
  Eigen::MatrixXd j_mat;
  Eigen::MatrixXd i_l_mat;
  Eigen::VectorXd at_w;
  void validate() const;
};

PopulationMatrices compute_matrices(const LogisticProblemSpec& spec,
                                    const Eigen::VectorXd& w,
                                    const QuadratureSample& quad);

// Population minimizers. All three include the (nu/2)|w|^2 term. Throws
// std::runtime_error with the final gradient norm if Newton fails.
Eigen::VectorXd solve_w_star_0(const LogisticProblemSpec& spec,
                               const QuadratureSample& quad);
Eigen::VectorXd solve_w_star_lambda(const LogisticProblemSpec& spec,
                                    const Eigen::VectorXd& w_star_0,
                                    const QuadratureSample& quad);
Eigen::VectorXd solve_w_star_l(const LogisticProblemSpec& spec,
                               const QuadratureSample& quad);

// n * gen-error = tr((J(w*_lambda) + nu I)^{-1} I_l(w*_lambda)) / (1+lambda),
// evaluated with a symmetric solve.
double asymptotic_gen(const LogisticProblemSpec& spec,
                      const PopulationMatrices& at_w_star_lambda);

struct AsymptoticReport {
  Eigen::VectorXd w_star_0;
  Eigen::VectorXd w_star_lambda;
  Eigen::VectorXd w_star_l;
  double n_times_gen = 0.0;
  double excess_bias = 0.0;
  double excess_variance_times_n = 0.0;
  double lambda = 0.0;
};

// Full pipeline for one lambda on a shared quadrature sample. w_star_0 may be
// passed in to reuse one solve across a lambda grid.
AsymptoticReport asymptotic_report(const LogisticProblemSpec& spec,
                                   const QuadratureSample& quad);
AsymptoticReport asymptotic_report(const LogisticProblemSpec& spec,
                                   const QuadratureSample& quad,
                                   const Eigen::VectorXd& w_star_0);

// (bias, variance) of the excess risk at sample size n; bias is n-free,
// variance = excess_variance_times_n / n.
std::pair<double, double> excess_risk(const AsymptoticReport& report, long n);

struct EmpiricalGenOptions {
  long n = 1000;
  std::vector<double> lambda_grid;
  int repetitions = 40;
  long test_size = 100000;
};

// Finite-sample ERM experiment. Within one repetition the labeled set, a
// nested unlabeled pool, and the test sample are shared across the lambda
// grid (common random numbers), so adjacent cells differ only through the
// fitted hypotheses. Rows: (lambda, "empirical_gen", mean, std-err, n, m).
// Cells where more than 10% of repetitions fail to converge are marked
// invalid via a NaN value; failures are counted per cell.
struct EmpiricalGenResult {
  SweepResult sweep;
  std::vector<int> newton_failures;  // per lambda cell
};

EmpiricalGenResult empirical_gen_experiment(const LogisticProblemSpec& spec,
                                            const EmpiricalGenOptions& opts,
                                            RngStream rng);

}  // namespace gibbslab
