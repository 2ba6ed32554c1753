#pragma once

#include <Eigen/Dense>
#include <functional>

#include "gibbslab/rng.hpp"
#include "gibbslab/synthdata.hpp"

namespace gibbslab {

struct SgldConfig {
  double step_size = 0.0;            // beta
  double inverse_temperature = 0.0;  // gamma, matched to the Gibbs alpha
  long burn_in = 0;
  long thin = 1;
  long iterations = 0;
  double noise_scale = 1.0;          // test hook; 0 turns the sampler into GD
  void validate() const;
};

// Evaluatable normalized mixed empirical risk: value and gradient of
// L-bar(w) for fixed datasets, with the (n, m, eta) weighting recorded.
struct EmpiricalRiskFn {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  long n = 0;
  long m = 0;
  double eta = 0.0;
  int dim = 0;
};

// W_{k+1} = W_k - beta grad(W_k) + sqrt(2 beta / gamma) zeta_k.
// Returns the post-burn-in, thinned iterates (one per row). Throws
// std::runtime_error with the iteration index and |w| if the gradient stops
// being finite.
Eigen::MatrixXd run_sgld(const EmpiricalRiskFn& risk, const SgldConfig& cfg,
                         const Eigen::VectorXd& init, RngStream rng);

// eta-weighted quadratic risk of the mean-estimation example:
// 1/((1+eta) n) sum |y_i x_i - w|^2 + eta/((1+eta) m) sum |yhat_j x_j - w|^2,
// eta = m/n. Abstained rows keep their zero y*x contribution.
EmpiricalRiskFn make_mean_est_risk(const LabeledSet& labeled,
                                   const PseudoLabeledSet& pseudo);

// Mixed regularized logistic risk, eta = m/n with m the full pseudo count.
// Abstained rows (yhat = 0) are dropped from the pseudo average, which then
// divides by the number of surviving rows.
EmpiricalRiskFn make_logistic_risk(const LabeledSet& labeled,
                                   const PseudoLabeledSet& pseudo, double nu);

// Max relative error between the analytic gradient and central finite
// differences over `probes` random points with N(0, scale^2) coordinates.
double max_gradient_rel_error(const EmpiricalRiskFn& risk, int probes,
                              double scale, RngStream rng);

}  // namespace gibbslab
