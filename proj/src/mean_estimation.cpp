#include "gibbslab/mean_estimation.hpp"

#include <cmath>
#include <stdexcept>

namespace gibbslab {

namespace {
constexpr double kSqrt2Pi = 2.50662827463100050241;
}

void GaussianPosterior::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("GaussianPosterior: alpha must be > 0");
  if (std::abs(variance - 1.0 / (2.0 * alpha)) > 1e-12)
    throw std::invalid_argument("GaussianPosterior: variance != 1/(2 alpha)");
}

void GenErrorReport::validate() const {
  if (sl_nm_gen > sl_n_gen + 1e-15)
    throw std::invalid_argument("GenErrorReport: sl_nm_gen > sl_n_gen");
  if (n > 0 && std::abs(lambda - static_cast<double>(m) / static_cast<double>(n)) > 1e-12)
    throw std::invalid_argument("GenErrorReport: lambda != m/n");
  double assembled = sl_nm_gen + (n + m > 0 ? 2.0 * static_cast<double>(m) /
                                                  static_cast<double>(n + m) * cross_cov
                                            : 0.0);
  double scale = std::max({1.0, std::abs(ssl_gen), std::abs(assembled)});
  if (std::abs(ssl_gen - assembled) > 1e-10 * scale)
    throw std::invalid_argument("GenErrorReport: ssl_gen inconsistent with cross_cov");
}

Eigen::VectorXd fit_w0(const LabeledSet& labeled) {
  labeled.validate();
  if (labeled.n() < 1) throw std::invalid_argument("fit_w0: empty labeled set");
  Eigen::VectorXd w0 = Eigen::VectorXd::Zero(labeled.dim());
  for (long i = 0; i < labeled.n(); ++i)
    w0 += labeled.labels(i) * labeled.features.row(i).transpose();
  return w0 / static_cast<double>(labeled.n());
}

GaussianPosterior gibbs_posterior(const LabeledSet& labeled,
                                  const PseudoLabeledSet& pseudo,
                                  double alpha) {
  labeled.validate();
  pseudo.validate();
  if (labeled.n() < 1 || pseudo.m() < 1)
    throw std::invalid_argument("gibbs_posterior: need n >= 1 and m >= 1");
  if (labeled.dim() != pseudo.dim())
    throw std::invalid_argument("gibbs_posterior: dimension mismatch");
  if (!(alpha > 0.0)) throw std::invalid_argument("gibbs_posterior: alpha must be > 0");

  double n = static_cast<double>(labeled.n());
  double m = static_cast<double>(pseudo.m());
  double lambda = m / n;
  Eigen::VectorXd labeled_mean = fit_w0(labeled);
  Eigen::VectorXd pseudo_mean = Eigen::VectorXd::Zero(pseudo.dim());
  for (long j = 0; j < pseudo.m(); ++j)
    pseudo_mean += pseudo.pseudo_labels(j) * pseudo.features.row(j).transpose();
  pseudo_mean /= m;

  GaussianPosterior post;
  post.mean = labeled_mean / (1.0 + lambda) + (lambda / (1.0 + lambda)) * pseudo_mean;
  post.alpha = alpha;
  post.variance = 1.0 / (2.0 * alpha);
  return post;
}

double gen_error_sl(const GaussianMixtureSpec& spec, long n) {
  spec.validate();
  if (n < 1) throw std::invalid_argument("gen_error_sl: n must be >= 1");
  return 2.0 * spec.sigma * spec.sigma * spec.dim / static_cast<double>(n);
}

double gen_error_ssl(const GaussianMixtureSpec& spec, long n, long m,
                     double cross_cov) {
  spec.validate();
  if (n < 1) throw std::invalid_argument("gen_error_ssl: n must be >= 1");
  if (m < 0) throw std::invalid_argument("gen_error_ssl: m must be >= 0");
  if (m == 0) return gen_error_sl(spec, n);
  double nm = static_cast<double>(n + m);
  return 2.0 * spec.sigma * spec.sigma * spec.dim / nm +
         2.0 * static_cast<double>(m) / nm * cross_cov;
}

McEstimate cross_cov_mc(const GaussianMixtureSpec& spec, long n,
                        const Labeler& labeler, std::int64_t trials,
                        RngStream rng) {
  spec.validate();
  if (n < 1) throw std::invalid_argument("cross_cov_mc: n must be >= 1");
  if (labeler.kind == Labeler::Kind::threshold && !(labeler.threshold >= 0.0))
    throw std::invalid_argument("cross_cov_mc: threshold must be >= 0");
  const Eigen::VectorXd mu = spec.mean_vector();
  const int d = spec.dim;
  const double sigma = spec.sigma;

  return mc_mean(trials, rng, [&, d, sigma, n](std::int64_t, RngStream& rs) {
    thread_local Eigen::VectorXd w0, y1x1, x;
    w0.setZero(d);
    y1x1.resize(d);
    x.resize(d);
    for (long i = 0; i < n; ++i) {
      int y = rs.rademacher();
      for (int j = 0; j < d; ++j) {
        double xj = y * mu(j) + sigma * rs.normal();
        double yx = y * xj;
        w0(j) += yx;
        if (i == 0) y1x1(j) = yx;
      }
    }
    w0 /= static_cast<double>(n);
    int yf = rs.rademacher();
    for (int j = 0; j < d; ++j) x(j) = yf * mu(j) + sigma * rs.normal();
    int yhat = labeler.label(w0.dot(x));
    // (Y1 X1)^T (yhat x) - mu^T (yhat x); the mu^T mu' counter-terms cancel
    // in expectation because E[Y1 X1] = mu.
    return yhat == 0 ? 0.0 : yhat * (y1x1.dot(x) - mu.dot(x));
  });
}

double gaussian_tail_q(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double corr_kernel_j(double sigma, double x) {
  if (sigma == 0.0) return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
  return 1.0 - 2.0 * gaussian_tail_q(x / sigma) +
         (2.0 * sigma * x / kSqrt2Pi) * std::exp(-x * x / (2.0 * sigma * sigma));
}

double corr_kernel_k(double sigma, double x) {
  double s = 1.0 - x * x;
  if (s < 0.0) s = 0.0;
  return (2.0 * sigma * std::sqrt(s) / kSqrt2Pi) *
         std::exp(-x * x / (2.0 * sigma * sigma));
}

double gamma_n_prime(double sigma, long n, const CorrelationSample& s) {
  double root = std::sqrt(static_cast<double>(n - 1)) / static_cast<double>(n);
  double a = 1.0 + root * sigma * s.xi0_prime + sigma / static_cast<double>(n) * s.g_tilde;
  return a / std::hypot(a, sigma * s.perp_norm);
}

CorrelationSample draw_correlation_sample(const GaussianMixtureSpec& spec,
                                          long n, RngStream& rng) {
  const int d = spec.dim;
  const Eigen::VectorXd& mu_dir = spec.mu_direction;
  CorrelationSample s;
  s.xi0_prime = rng.normal();
  s.g_tilde = rng.normal();

  thread_local Eigen::VectorXd u_perp, v_perp, q;
  u_perp.resize(d);
  v_perp.resize(d);
  q.resize(d);
  for (int j = 0; j < d; ++j) u_perp(j) = rng.normal();
  u_perp -= mu_dir.dot(u_perp) * mu_dir;
  for (int j = 0; j < d; ++j) v_perp(j) = rng.normal();
  v_perp -= mu_dir.dot(v_perp) * mu_dir;

  s.norm_mu_prime_perp = u_perp.norm();
  s.norm_mu_i_perp = v_perp.norm();
  double root = std::sqrt(static_cast<double>(n - 1)) / static_cast<double>(n);
  q = root * u_perp + v_perp / static_cast<double>(n);
  s.perp_norm = q.norm();
  s.perp_overlap = s.perp_norm > 0.0 ? v_perp.dot(q) / s.perp_norm : 0.0;
  s.gamma_n_prime = gamma_n_prime(spec.sigma, n, s);
  return s;
}

McEstimate e_n_mc(const GaussianMixtureSpec& spec, long n,
                  std::int64_t samples, RngStream rng) {
  spec.validate();
  if (spec.dim < 2) throw std::invalid_argument("e_n_mc: requires d >= 2");
  if (n < 1) throw std::invalid_argument("e_n_mc: n must be >= 1");
  if (std::abs(spec.mu_scale - 1.0) > 1e-9)
    throw std::invalid_argument("e_n_mc: decomposition assumes a unit mean (mu_scale = 1)");
  const double sigma = spec.sigma;

  return mc_mean(samples, rng, [&spec, n, sigma](std::int64_t, RngStream& rs) {
    CorrelationSample s = draw_correlation_sample(spec, n, rs);
    return sigma * s.g_tilde * corr_kernel_j(sigma, s.gamma_n_prime) +
           sigma * s.perp_overlap * corr_kernel_k(sigma, s.gamma_n_prime);
  });
}

McEstimate gen_error_definition_mc(const GaussianMixtureSpec& spec, long n,
                                   long m, double alpha,
                                   const Labeler& labeler,
                                   std::int64_t trials, RngStream rng) {
  spec.validate();
  if (n < 1 || m < 1)
    throw std::invalid_argument("gen_error_definition_mc: need n >= 1 and m >= 1");
  if (!(alpha > 0.0))
    throw std::invalid_argument("gen_error_definition_mc: alpha must be > 0");
  const Eigen::VectorXd mu = spec.mean_vector();
  const int d = spec.dim;
  const double sigma = spec.sigma;
  const double lambda = static_cast<double>(m) / static_cast<double>(n);

  return mc_mean(trials, rng, [&, d, sigma, n, m, lambda](std::int64_t, RngStream& rs) {
    thread_local Eigen::VectorXd sum_yx, pseudo_sum, mu_nm, x;
    sum_yx.setZero(d);
    pseudo_sum.setZero(d);
    mu_nm.resize(d);
    x.resize(d);
    double sum_yx_sq = 0.0;
    for (long i = 0; i < n; ++i) {
      int y = rs.rademacher();
      for (int j = 0; j < d; ++j) {
        double yx = y * (y * mu(j) + sigma * rs.normal());
        sum_yx(j) += yx;
        sum_yx_sq += yx * yx;
      }
    }
    thread_local Eigen::VectorXd w0;
    w0 = sum_yx / static_cast<double>(n);
    for (long j = 0; j < m; ++j) {
      int y = rs.rademacher();
      for (int k = 0; k < d; ++k) x(k) = y * mu(k) + sigma * rs.normal();
      int yhat = labeler.label(w0.dot(x));
      if (yhat != 0) pseudo_sum += yhat * x;
    }
    mu_nm = sum_yx / (static_cast<double>(n) * (1.0 + lambda)) +
            (lambda / (1.0 + lambda)) * pseudo_sum / static_cast<double>(m);
    // sigma^2 d + |mu - mu_nm|^2 - (1/n) sum_i |y_i x_i - mu_nm|^2, expanded
    // so the labeled samples need not be stored.
    double dev = (mu - mu_nm).squaredNorm();
    double emp = (sum_yx_sq - 2.0 * sum_yx.dot(mu_nm) +
                  static_cast<double>(n) * mu_nm.squaredNorm()) /
                 static_cast<double>(n);
    return sigma * sigma * d + dev - emp;
  });
}

Theorem1Assembly theorem1_assembly(const GaussianMixtureSpec& spec, long n,
                                   long m, double alpha, double cross_cov) {
  spec.validate();
  if (n < 1) throw std::invalid_argument("theorem1_assembly: n must be >= 1");
  if (m < 0) throw std::invalid_argument("theorem1_assembly: m must be >= 0");
  if (!(alpha > 0.0)) throw std::invalid_argument("theorem1_assembly: alpha must be > 0");
  double lambda = static_cast<double>(m) / static_cast<double>(n);
  double one_plus = 1.0 + lambda;
  Theorem1Assembly out;
  out.skl_diff_term = 2.0 * alpha * spec.sigma * spec.sigma * spec.dim /
                      (one_plus * one_plus * static_cast<double>(n));
  out.log_lambda_term = 2.0 * alpha * lambda / (one_plus * one_plus) * cross_cov;
  out.assembled_gen = one_plus / alpha * (out.skl_diff_term + out.log_lambda_term);
  return out;
}

GenErrorReport make_gen_error_report(const GaussianMixtureSpec& spec, long n,
                                     long m, const McEstimate& cross_cov,
                                     const McEstimate& e_n) {
  GenErrorReport r;
  r.n = n;
  r.m = m;
  r.lambda = static_cast<double>(m) / static_cast<double>(n);
  r.sl_n_gen = gen_error_sl(spec, n);
  r.sl_nm_gen = gen_error_sl(spec, n + m);
  r.cross_cov = cross_cov.estimate;
  r.e_n = e_n.estimate;
  r.ssl_gen = gen_error_ssl(spec, n, m, cross_cov.estimate);
  r.std_err = m == 0 ? 0.0
                     : 2.0 * static_cast<double>(m) / static_cast<double>(n + m) *
                           cross_cov.std_err;
  r.validate();
  return r;
}

}  // namespace gibbslab
