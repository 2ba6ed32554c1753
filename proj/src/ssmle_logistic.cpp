#include "gibbslab/ssmle_logistic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace gibbslab {

namespace {

double softplus(double u) {
  return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u)));
}

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  double e = std::exp(u);
  return e / (1.0 + e);
}

double objective_value(std::span<const LogisticTerm> terms, double nu,
                       const Eigen::VectorXd& w) {
  double f = 0.5 * nu * w.squaredNorm();
  for (const auto& term : terms) {
    const Eigen::MatrixXd& x = *term.x;
    const Eigen::VectorXd& y = *term.y;
    if (y.size() == 0) continue;
    Eigen::VectorXd s = x * w;
    double acc = 0.0;
    for (long i = 0; i < y.size(); ++i) acc += softplus(-y(i) * s(i));
    f += term.weight * acc / static_cast<double>(y.size());
  }
  return f;
}

}  // namespace

void LogisticProblemSpec::validate() const {
  mixture.validate();
  if (!(nu > 0.0)) throw std::invalid_argument("LogisticProblemSpec: nu must be > 0");
  if (quadrature_size < 2)
    throw std::invalid_argument("LogisticProblemSpec: quadrature_size must be >= 2");
  if (!(lambda >= 0.0))
    throw std::invalid_argument("LogisticProblemSpec: lambda must be >= 0");
}

void PopulationMatrices::validate() const {
  auto check = [](const Eigen::MatrixXd& a, const char* name) {
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10)
      throw std::invalid_argument(std::string("PopulationMatrices: ") + name +
                                  " not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    if (es.eigenvalues().minCoeff() < -1e-8 * std::max(a.trace(), 1e-300))
      throw std::invalid_argument(std::string("PopulationMatrices: ") + name +
                                  " not PSD");
  };
  check(j_mat, "j_mat");
  check(i_l_mat, "i_l_mat");
}

QuadratureSample draw_quadrature(const LogisticProblemSpec& spec,
                                 RngStream rng) {
  spec.validate();
  const int d = spec.mixture.dim;

  bool symmetric_direction = true;
  for (int j = 0; j < d; ++j)
    if (std::abs(spec.mixture.mu_direction(j) - spec.mixture.mu_direction(0)) >
        1e-12)
      symmetric_direction = false;

  long perms = 1;
  if (symmetric_direction && d >= 2 && d <= 4) {
    for (int j = 2; j <= d; ++j) perms *= j;
    if (spec.quadrature_size % perms != 0) perms = 1;
  }

  long base = spec.quadrature_size / perms;
  LabeledSet drawn = sample_labeled(spec.mixture, base, rng);

  QuadratureSample quad;
  quad.x.resize(spec.quadrature_size, d);
  quad.y.resize(spec.quadrature_size);
  if (perms == 1) {
    quad.x = drawn.features;
    for (long i = 0; i < base; ++i) quad.y(i) = drawn.labels(i);
    return quad;
  }

  std::vector<int> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  long row = 0;
  do {
    for (long i = 0; i < base; ++i) {
      for (int j = 0; j < d; ++j) quad.x(row, j) = drawn.features(i, perm[static_cast<std::size_t>(j)]);
      quad.y(row) = drawn.labels(i);
      ++row;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return quad;
}

NewtonResult newton_logistic(std::span<const LogisticTerm> terms, double nu,
                             const Eigen::VectorXd& init,
                             const NewtonOptions& opts) {
  const int d = static_cast<int>(init.size());
  NewtonResult res;
  res.w = init;
  res.objective = objective_value(terms, nu, res.w);

  Eigen::VectorXd grad(d);
  Eigen::MatrixXd hess(d, d);
  for (res.iterations = 0; res.iterations < opts.max_iterations;
       ++res.iterations) {
    grad = nu * res.w;
    hess = nu * Eigen::MatrixXd::Identity(d, d);
    for (const auto& term : terms) {
      const Eigen::MatrixXd& x = *term.x;
      const Eigen::VectorXd& y = *term.y;
      if (y.size() == 0) continue;
      double inv = term.weight / static_cast<double>(y.size());
      Eigen::VectorXd s = x * res.w;
      Eigen::VectorXd gcoef(y.size()), hcoef(y.size());
      for (long i = 0; i < y.size(); ++i) {
        double t = y(i) * s(i);
        double sm = sigmoid(-t);
        gcoef(i) = -inv * y(i) * sm;
        hcoef(i) = inv * sm * (1.0 - sm);
      }
      grad.noalias() += x.transpose() * gcoef;
      hess.noalias() += x.transpose() * hcoef.asDiagonal() * x;
    }
    res.grad_norm = grad.norm();
    if (res.grad_norm <= opts.grad_tol) {
      res.converged = true;
      return res;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(hess);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("newton_logistic: Hessian factorization failed");
    Eigen::VectorXd step = llt.solve(grad);

    double scale = 1.0;
    bool accepted = false;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      Eigen::VectorXd cand = res.w - scale * step;
      double f = objective_value(terms, nu, cand);
      if (f <= res.objective) {
        res.w = cand;
        res.objective = f;
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) break;  // at the numerical floor of the objective
  }
  // final gradient norm at the returned point
  Eigen::VectorXd g = nu * res.w;
  for (const auto& term : terms) {
    const Eigen::MatrixXd& x = *term.x;
    const Eigen::VectorXd& y = *term.y;
    if (y.size() == 0) continue;
    double inv = term.weight / static_cast<double>(y.size());
    Eigen::VectorXd s = x * res.w;
    Eigen::VectorXd gcoef(y.size());
    for (long i = 0; i < y.size(); ++i)
      gcoef(i) = -inv * y(i) * sigmoid(-y(i) * s(i));
    g.noalias() += x.transpose() * gcoef;
  }
  res.grad_norm = g.norm();
  res.converged = res.grad_norm <= opts.grad_tol;
  return res;
}

PopulationMatrices compute_matrices(const LogisticProblemSpec& spec,
                                    const Eigen::VectorXd& w,
                                    const QuadratureSample& quad) {
  if (quad.size() < 1) throw std::invalid_argument("compute_matrices: empty quadrature");
  const int d = static_cast<int>(quad.x.cols());
  Eigen::VectorXd s = quad.x * w;
  Eigen::VectorXd jcoef(quad.size()), icoef(quad.size());
  for (long i = 0; i < quad.size(); ++i) {
    double sig_pos = sigmoid(s(i));
    double sig_neg = 1.0 - sig_pos;
    jcoef(i) = sig_pos * sig_neg;          // 1/(e^-s + e^s + 2)
    double sm = sigmoid(-quad.y(i) * s(i));
    icoef(i) = sm * sm;                    // e^{-2t}/(1+e^{-t})^2
  }
  PopulationMatrices out;
  out.j_mat = quad.x.transpose() * jcoef.asDiagonal() * quad.x /
              static_cast<double>(quad.size());
  out.i_l_mat = quad.x.transpose() * icoef.asDiagonal() * quad.x /
                static_cast<double>(quad.size());
  out.j_mat = ((out.j_mat + out.j_mat.transpose()) / 2.0).eval();
  out.i_l_mat = ((out.i_l_mat + out.i_l_mat.transpose()) / 2.0).eval();
  out.at_w = w;
  out.validate();
  (void)d;
  return out;
}

namespace {

Eigen::VectorXd solve_labeled_only(const LogisticProblemSpec& spec,
                                   const QuadratureSample& quad,
                                   const char* who) {
  LogisticTerm term{&quad.x, &quad.y, 1.0};
  NewtonResult res = newton_logistic({&term, 1}, spec.nu,
                                     Eigen::VectorXd::Zero(quad.x.cols()));
  if (!res.converged) {
    std::ostringstream msg;
    msg << who << ": Newton did not converge (final |grad| = " << res.grad_norm
        << " after " << res.iterations << " iterations)";
    throw std::runtime_error(msg.str());
  }
  return res.w;
}

}  // namespace

Eigen::VectorXd solve_w_star_0(const LogisticProblemSpec& spec,
                               const QuadratureSample& quad) {
  spec.validate();
  return solve_labeled_only(spec, quad, "solve_w_star_0");
}

Eigen::VectorXd solve_w_star_l(const LogisticProblemSpec& spec,
                               const QuadratureSample& quad) {
  spec.validate();
  // Same objective as solve_w_star_0: the population risk carries the nu term.
  return solve_labeled_only(spec, quad, "solve_w_star_l");
}

Eigen::VectorXd solve_w_star_lambda(const LogisticProblemSpec& spec,
                                    const Eigen::VectorXd& w_star_0,
                                    const QuadratureSample& quad) {
  spec.validate();
  if (spec.lambda == 0.0) return solve_w_star_0(spec, quad);

  // Deterministic pseudo-labels yhat = sgn(x^T w*_0) on the same sample.
  Eigen::VectorXd yhat(quad.size());
  Eigen::VectorXd s = quad.x * w_star_0;
  for (long i = 0; i < quad.size(); ++i) yhat(i) = s(i) >= 0.0 ? 1.0 : -1.0;

  double wl = 1.0 / (1.0 + spec.lambda);
  double wu = spec.lambda / (1.0 + spec.lambda);
  std::vector<LogisticTerm> terms = {{&quad.x, &quad.y, wl},
                                     {&quad.x, &yhat, wu}};
  NewtonResult res = newton_logistic(terms, spec.nu,
                                     Eigen::VectorXd::Zero(quad.x.cols()));
  if (!res.converged) {
    std::ostringstream msg;
    msg << "solve_w_star_lambda: Newton did not converge (final |grad| = "
        << res.grad_norm << " after " << res.iterations << " iterations)";
    throw std::runtime_error(msg.str());
  }
  return res.w;
}

double asymptotic_gen(const LogisticProblemSpec& spec,
                      const PopulationMatrices& at_w_star_lambda) {
  const Eigen::MatrixXd& j = at_w_star_lambda.j_mat;
  Eigen::MatrixXd a = j + spec.nu * Eigen::MatrixXd::Identity(j.rows(), j.cols());
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("asymptotic_gen: J + nu I not positive definite");
  return llt.solve(at_w_star_lambda.i_l_mat).trace() / (1.0 + spec.lambda);
}

AsymptoticReport asymptotic_report(const LogisticProblemSpec& spec,
                                   const QuadratureSample& quad) {
  return asymptotic_report(spec, quad, solve_w_star_0(spec, quad));
}

AsymptoticReport asymptotic_report(const LogisticProblemSpec& spec,
                                   const QuadratureSample& quad,
                                   const Eigen::VectorXd& w_star_0) {
  spec.validate();
  AsymptoticReport rep;
  rep.lambda = spec.lambda;
  rep.w_star_0 = w_star_0;
  rep.w_star_l = w_star_0;  // identical objective by design
  rep.w_star_lambda = solve_w_star_lambda(spec, w_star_0, quad);

  PopulationMatrices at_lambda = compute_matrices(spec, rep.w_star_lambda, quad);
  PopulationMatrices at_l = compute_matrices(spec, rep.w_star_l, quad);
  rep.n_times_gen = asymptotic_gen(spec, at_lambda);

  Eigen::VectorXd diff = rep.w_star_lambda - rep.w_star_l;
  rep.excess_bias = 0.5 * diff.dot(at_l.j_mat * diff);

  Eigen::MatrixXd a = at_lambda.j_mat +
                      spec.nu * Eigen::MatrixXd::Identity(diff.size(), diff.size());
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("asymptotic_report: J + nu I not positive definite");
  Eigen::MatrixXd inv_il = llt.solve(at_lambda.i_l_mat);     // A^{-1} I_l
  Eigen::MatrixXd inv_jl = llt.solve(at_l.j_mat);            // A^{-1} J_l
  // tr(J_l A^{-1} I_l A^{-1}) / (2 (1+lambda)^2), the variance term times n
  double one_plus = 1.0 + spec.lambda;
  rep.excess_variance_times_n =
      (inv_jl.transpose() * inv_il).trace() / (2.0 * one_plus * one_plus);
  return rep;
}

std::pair<double, double> excess_risk(const AsymptoticReport& report, long n) {
  if (n < 1) throw std::invalid_argument("excess_risk: n must be >= 1");
  return {report.excess_bias,
          report.excess_variance_times_n / static_cast<double>(n)};
}

EmpiricalGenResult empirical_gen_experiment(const LogisticProblemSpec& spec,
                                            const EmpiricalGenOptions& opts,
                                            RngStream rng) {
  spec.validate();
  if (opts.repetitions < 2)
    throw std::invalid_argument("empirical_gen_experiment: repetitions must be >= 2");
  if (opts.n < 1) throw std::invalid_argument("empirical_gen_experiment: n must be >= 1");
  if (opts.test_size < 2)
    throw std::invalid_argument("empirical_gen_experiment: test_size must be >= 2");
  if (opts.lambda_grid.empty())
    throw std::invalid_argument("empirical_gen_experiment: empty lambda grid");
  for (double lam : opts.lambda_grid)
    if (!(lam >= 0.0))
      throw std::invalid_argument("empirical_gen_experiment: lambda must be >= 0");

  const std::size_t cells = opts.lambda_grid.size();
  long m_max = 0;
  std::vector<long> m_of(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    m_of[c] = std::llround(opts.lambda_grid[c] * static_cast<double>(opts.n));
    m_max = std::max(m_max, m_of[c]);
  }

  std::vector<std::vector<double>> gen(cells);
  std::vector<int> failures(cells, 0);

  for (int rep = 0; rep < opts.repetitions; ++rep) {
    // One labeled set, one nested unlabeled pool and one test sample shared
    // by every lambda cell of this repetition (common random numbers).
    RngStream rep_base = rng.substream(static_cast<std::uint64_t>(rep) * 4);
    LabeledSet train = sample_labeled(spec.mixture, opts.n, rep_base.substream(0));
    UnlabeledSet pool =
        m_max > 0 ? sample_unlabeled(spec.mixture, m_max, rep_base.substream(1))
                  : UnlabeledSet{};
    LabeledSet test = sample_labeled(spec.mixture, opts.test_size, rep_base.substream(2));

    Eigen::VectorXd y_train(opts.n);
    for (long i = 0; i < opts.n; ++i) y_train(i) = train.labels(i);
    Eigen::VectorXd y_test(opts.test_size);
    for (long i = 0; i < opts.test_size; ++i) y_test(i) = test.labels(i);

    LogisticTerm labeled_term{&train.features, &y_train, 1.0};
    NewtonResult w0_fit = newton_logistic({&labeled_term, 1}, spec.nu,
                                          Eigen::VectorXd::Zero(spec.mixture.dim));

    Eigen::VectorXd pool_yhat;
    if (m_max > 0 && w0_fit.converged) {
      pool_yhat.resize(m_max);
      Eigen::VectorXd s = pool.features * w0_fit.w;
      for (long j = 0; j < m_max; ++j) pool_yhat(j) = s(j) >= 0.0 ? 1.0 : -1.0;
    }

    for (std::size_t c = 0; c < cells; ++c) {
      long m = m_of[c];
      Eigen::VectorXd w;
      bool ok = w0_fit.converged;
      if (ok && m == 0) {
        w = w0_fit.w;
      } else if (ok) {
        double lam = static_cast<double>(m) / static_cast<double>(opts.n);
        Eigen::MatrixXd xu = pool.features.topRows(m);
        Eigen::VectorXd yu = pool_yhat.head(m);
        std::vector<LogisticTerm> terms = {
            {&train.features, &y_train, 1.0 / (1.0 + lam)},
            {&xu, &yu, lam / (1.0 + lam)}};
        NewtonResult fit = newton_logistic(terms, spec.nu,
                                           Eigen::VectorXd::Zero(spec.mixture.dim));
        ok = fit.converged;
        if (ok) w = fit.w;
      }
      if (!ok) {
        ++failures[c];
        continue;
      }
      // gen estimate: population risk on the test sample minus empirical risk
      // on the labeled training set; the regularizer cancels in the gap.
      auto mean_loss = [&w](const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
        Eigen::VectorXd s = x * w;
        double acc = 0.0;
        for (long i = 0; i < y.size(); ++i) acc += softplus(-y(i) * s(i));
        return acc / static_cast<double>(y.size());
      };
      gen[c].push_back(mean_loss(test.features, y_test) -
                       mean_loss(train.features, y_train));
    }
  }

  EmpiricalGenResult out;
  out.newton_failures = failures;
  for (std::size_t c = 0; c < cells; ++c) {
    long m = m_of[c];
    double lam_actual = static_cast<double>(m) / static_cast<double>(opts.n);
    bool invalid =
        failures[c] * 10 > opts.repetitions || gen[c].size() < 2;
    if (invalid) {
      out.sweep.add(lam_actual, "empirical_gen",
                    std::numeric_limits<double>::quiet_NaN(), std::nullopt,
                    opts.n, m);
      continue;
    }
    MeanAccumulator acc;
    for (double v : gen[c]) acc.add(v);
    McEstimate est = acc.finish();
    out.sweep.add(lam_actual, "empirical_gen", est.estimate, est.std_err,
                  opts.n, m);
  }
  out.sweep.sort_rows();
  return out;
}

}  // namespace gibbslab
