#include "gibbslab/gibbs_sgld.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gibbslab {

namespace {

double softplus(double u) {
  // log(1 + e^u), stable for large |u|
  return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u)));
}

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  double e = std::exp(u);
  return e / (1.0 + e);
}

}  // namespace

void SgldConfig::validate() const {
  if (!(step_size > 0.0)) throw std::invalid_argument("SgldConfig: step_size must be > 0");
  if (!(inverse_temperature > 0.0))
    throw std::invalid_argument("SgldConfig: inverse_temperature must be > 0");
  if (burn_in < 0) throw std::invalid_argument("SgldConfig: burn_in must be >= 0");
  if (thin < 1) throw std::invalid_argument("SgldConfig: thin must be >= 1");
  if (iterations <= burn_in)
    throw std::invalid_argument("SgldConfig: iterations must exceed burn_in");
  if (!(noise_scale >= 0.0))
    throw std::invalid_argument("SgldConfig: noise_scale must be >= 0");
}

Eigen::MatrixXd run_sgld(const EmpiricalRiskFn& risk, const SgldConfig& cfg,
                         const Eigen::VectorXd& init, RngStream rng) {
  cfg.validate();
  if (init.size() != risk.dim)
    throw std::invalid_argument("run_sgld: init size != risk dimension");

  long kept = (cfg.iterations - cfg.burn_in) / cfg.thin;
  Eigen::MatrixXd samples(kept, risk.dim);
  Eigen::VectorXd w = init;
  double noise_coef =
      cfg.noise_scale * std::sqrt(2.0 * cfg.step_size / cfg.inverse_temperature);
  long row = 0;
  for (long k = 1; k <= cfg.iterations; ++k) {
    Eigen::VectorXd g = risk.gradient(w);
    if (!g.allFinite()) {
      std::ostringstream msg;
      msg << "run_sgld: non-finite gradient at iteration " << k
          << " (|w| = " << w.norm() << ")";
      throw std::runtime_error(msg.str());
    }
    for (int j = 0; j < risk.dim; ++j)
      w(j) += -cfg.step_size * g(j) + noise_coef * rng.normal();
    if (k > cfg.burn_in && (k - cfg.burn_in) % cfg.thin == 0 && row < kept)
      samples.row(row++) = w.transpose();
  }
  return samples;
}

EmpiricalRiskFn make_mean_est_risk(const LabeledSet& labeled,
                                   const PseudoLabeledSet& pseudo) {
  labeled.validate();
  pseudo.validate();
  if (labeled.n() < 1 || pseudo.m() < 1)
    throw std::invalid_argument("make_mean_est_risk: nonempty sets required");
  if (labeled.dim() != pseudo.dim())
    throw std::invalid_argument("make_mean_est_risk: dimension mismatch");

  long n = labeled.n();
  long m = pseudo.m();
  double eta = static_cast<double>(m) / static_cast<double>(n);
  double wl = 1.0 / (1.0 + eta);
  double wu = eta / (1.0 + eta);

  // Precompute the y*x rows once; the risk is quadratic around their means.
  Eigen::MatrixXd yx_l(n, labeled.dim());
  for (long i = 0; i < n; ++i)
    yx_l.row(i) = labeled.labels(i) * labeled.features.row(i);
  Eigen::MatrixXd yx_u(m, pseudo.dim());
  for (long j = 0; j < m; ++j)
    yx_u.row(j) = pseudo.pseudo_labels(j) * pseudo.features.row(j);

  EmpiricalRiskFn fn;
  fn.n = n;
  fn.m = m;
  fn.eta = eta;
  fn.dim = labeled.dim();
  fn.value = [yx_l, yx_u, wl, wu, n, m](const Eigen::VectorXd& w) {
    double vl = 0.0, vu = 0.0;
    for (long i = 0; i < n; ++i)
      vl += (yx_l.row(i).transpose() - w).squaredNorm();
    for (long j = 0; j < m; ++j)
      vu += (yx_u.row(j).transpose() - w).squaredNorm();
    return wl * vl / static_cast<double>(n) + wu * vu / static_cast<double>(m);
  };
  Eigen::VectorXd mean_l = yx_l.colwise().mean().transpose();
  Eigen::VectorXd mean_u = yx_u.colwise().mean().transpose();
  fn.gradient = [mean_l, mean_u, wl, wu](const Eigen::VectorXd& w) {
    return Eigen::VectorXd(2.0 * (w - wl * mean_l - wu * mean_u));
  };
  return fn;
}

EmpiricalRiskFn make_logistic_risk(const LabeledSet& labeled,
                                   const PseudoLabeledSet& pseudo, double nu) {
  labeled.validate();
  pseudo.validate();
  if (labeled.n() < 1)
    throw std::invalid_argument("make_logistic_risk: nonempty labeled set required");
  if (pseudo.m() >= 1 && labeled.dim() != pseudo.dim())
    throw std::invalid_argument("make_logistic_risk: dimension mismatch");
  if (!(nu >= 0.0)) throw std::invalid_argument("make_logistic_risk: nu must be >= 0");

  long n = labeled.n();
  long m = pseudo.m();
  double eta = static_cast<double>(m) / static_cast<double>(n);
  double wl = 1.0 / (1.0 + eta);
  double wu = eta / (1.0 + eta);

  Eigen::MatrixXd xl = labeled.features;
  Eigen::VectorXd yl(n);
  for (long i = 0; i < n; ++i) yl(i) = labeled.labels(i);

  // Abstentions drop out of the pseudo term; the inner average runs over the
  // surviving rows only.
  long m_active = 0;
  for (long j = 0; j < m; ++j)
    if (pseudo.pseudo_labels(j) != 0) ++m_active;
  Eigen::MatrixXd xu(m_active, labeled.dim());
  Eigen::VectorXd yu(m_active);
  long r = 0;
  for (long j = 0; j < m; ++j) {
    if (pseudo.pseudo_labels(j) == 0) continue;
    xu.row(r) = pseudo.features.row(j);
    yu(r) = pseudo.pseudo_labels(j);
    ++r;
  }

  EmpiricalRiskFn fn;
  fn.n = n;
  fn.m = m;
  fn.eta = eta;
  fn.dim = labeled.dim();
  fn.value = [xl, yl, xu, yu, wl, wu, nu](const Eigen::VectorXd& w) {
    double vl = 0.0;
    for (long i = 0; i < yl.size(); ++i)
      vl += softplus(-yl(i) * xl.row(i).dot(w));
    vl /= static_cast<double>(yl.size());
    double vu = 0.0;
    if (yu.size() > 0) {
      for (long j = 0; j < yu.size(); ++j)
        vu += softplus(-yu(j) * xu.row(j).dot(w));
      vu /= static_cast<double>(yu.size());
    }
    return wl * vl + wu * vu + 0.5 * nu * w.squaredNorm();
  };
  fn.gradient = [xl, yl, xu, yu, wl, wu, nu](const Eigen::VectorXd& w) {
    Eigen::VectorXd g = nu * w;
    for (long i = 0; i < yl.size(); ++i) {
      double t = yl(i) * xl.row(i).dot(w);
      g -= wl / static_cast<double>(yl.size()) * sigmoid(-t) * yl(i) *
           xl.row(i).transpose();
    }
    for (long j = 0; j < yu.size(); ++j) {
      double t = yu(j) * xu.row(j).dot(w);
      g -= wu / static_cast<double>(yu.size()) * sigmoid(-t) * yu(j) *
           xu.row(j).transpose();
    }
    return g;
  };
  return fn;
}

double max_gradient_rel_error(const EmpiricalRiskFn& risk, int probes,
                              double scale, RngStream rng) {
  if (probes < 1) throw std::invalid_argument("max_gradient_rel_error: probes >= 1");
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    Eigen::VectorXd w(risk.dim);
    for (int j = 0; j < risk.dim; ++j) w(j) = scale * rng.normal();
    Eigen::VectorXd g = risk.gradient(w);
    Eigen::VectorXd fd(risk.dim);
    double h = 1e-6 * std::max(1.0, w.norm());
    for (int j = 0; j < risk.dim; ++j) {
      Eigen::VectorXd wp = w, wm = w;
      wp(j) += h;
      wm(j) -= h;
      fd(j) = (risk.value(wp) - risk.value(wm)) / (2.0 * h);
    }
    double denom = std::max(g.norm(), 1e-12);
    worst = std::max(worst, (g - fd).norm() / denom);
  }
  return worst;
}

}  // namespace gibbslab
