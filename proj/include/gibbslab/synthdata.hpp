#pragma once

#include <Eigen/Dense>
#include <string>

#include "gibbslab/rng.hpp"

namespace gibbslab {

// Two-class Gaussian data law: Y uniform over {-1,+1},
// X | Y ~ N(Y * mu_scale * mu_direction, sigma^2 I_d).
struct GaussianMixtureSpec {
  Eigen::VectorXd mu_direction;  // unit vector
  double mu_scale = 1.0;
  double sigma = 1.0;
  int dim = 0;

  Eigen::VectorXd mean_vector() const { return mu_scale * mu_direction; }

  // Throws std::invalid_argument on violated invariants:
  // ||mu_direction|| = 1 within 1e-12, sigma >= 0, mu_scale >= 0, dim >= 1.
  // sigma = 0 is the exact zero-noise law used by degenerate-case tests.
  void validate() const;

  static GaussianMixtureSpec axis_aligned(int dim, double sigma,
                                          double mu_scale = 1.0);
  static GaussianMixtureSpec all_ones(int dim, double sigma, double mu_scale);
};

struct LabeledSet {
  Eigen::MatrixXd features;  // n x d, one sample per row
  Eigen::VectorXi labels;    // in {-1,+1}

  long n() const { return features.rows(); }
  int dim() const { return static_cast<int>(features.cols()); }
  void validate() const;
};

struct PseudoLabeledSet {
  Eigen::MatrixXd features;      // m x d
  Eigen::VectorXi pseudo_labels; // in {-1,0,+1}; 0 = abstained

  long m() const { return features.rows(); }
  int dim() const { return static_cast<int>(features.cols()); }
  void validate() const;
};

// Unlabeled draw. Learners may only look at features; hidden_labels exist for
// population-risk oracles and never reach a labeler.
struct UnlabeledSet {
  Eigen::MatrixXd features;     // m x d
  Eigen::VectorXi hidden_labels;

  long m() const { return features.rows(); }
  const Eigen::MatrixXd& learner_view() const { return features; }
};

LabeledSet sample_labeled(const GaussianMixtureSpec& spec, long n,
                          RngStream rng);
UnlabeledSet sample_unlabeled(const GaussianMixtureSpec& spec, long m,
                              RngStream rng);

// Hard labels sgn(w0^T x); the measure-zero tie w0^T x = 0 maps to +1.
PseudoLabeledSet pseudo_label_sign(const Eigen::VectorXd& w0,
                                   const Eigen::MatrixXd& features);

// sgn(w0^T x) when |w0^T x| >= T (closed comparison), 0 otherwise.
PseudoLabeledSet pseudo_label_threshold(const Eigen::VectorXd& w0,
                                        const Eigen::MatrixXd& features,
                                        double threshold);

// Comma-separated file with an optional header row. label_column selects by
// header name or by 0-based index; every other column is a numeric feature.
// Labels must be {-1,+1} or {0,1}; a 0/1 column is remapped to -1/+1.
LabeledSet ingest_csv_dataset(const std::string& path,
                              const std::string& label_column);

}  // namespace gibbslab
