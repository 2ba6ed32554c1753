#include "gibbslab/synthdata.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace gibbslab {

void GaussianMixtureSpec::validate() const {
  if (dim < 1) throw std::invalid_argument("GaussianMixtureSpec: dim must be >= 1");
  if (mu_direction.size() != dim)
    throw std::invalid_argument("GaussianMixtureSpec: mu_direction size != dim");
  if (std::abs(mu_direction.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("GaussianMixtureSpec: mu_direction must be a unit vector");
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("GaussianMixtureSpec: sigma must be >= 0");
  if (!(mu_scale >= 0.0) || !std::isfinite(mu_scale))
    throw std::invalid_argument("GaussianMixtureSpec: mu_scale must be >= 0");
}

GaussianMixtureSpec GaussianMixtureSpec::axis_aligned(int dim, double sigma,
                                                      double mu_scale) {
  GaussianMixtureSpec spec;
  spec.dim = dim;
  spec.sigma = sigma;
  spec.mu_scale = mu_scale;
  spec.mu_direction = Eigen::VectorXd::Zero(dim);
  if (dim >= 1) spec.mu_direction(0) = 1.0;
  return spec;
}

GaussianMixtureSpec GaussianMixtureSpec::all_ones(int dim, double sigma,
                                                  double mu_scale) {
  GaussianMixtureSpec spec;
  spec.dim = dim;
  spec.sigma = sigma;
  // mean vector = mu_scale * 1_d, stored as unit direction 1_d/sqrt(d) with
  // scale mu_scale*sqrt(d).
  spec.mu_scale = mu_scale * std::sqrt(static_cast<double>(dim));
  spec.mu_direction =
      Eigen::VectorXd::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  return spec;
}

void LabeledSet::validate() const {
  if (features.rows() != labels.size())
    throw std::invalid_argument("LabeledSet: row count != label count");
  for (long i = 0; i < labels.size(); ++i)
    if (labels(i) != 1 && labels(i) != -1)
      throw std::invalid_argument("LabeledSet: labels must be in {-1,+1}");
}

void PseudoLabeledSet::validate() const {
  if (features.rows() != pseudo_labels.size())
    throw std::invalid_argument("PseudoLabeledSet: row count != label count");
  for (long i = 0; i < pseudo_labels.size(); ++i)
    if (pseudo_labels(i) < -1 || pseudo_labels(i) > 1)
      throw std::invalid_argument("PseudoLabeledSet: labels must be in {-1,0,+1}");
}

LabeledSet sample_labeled(const GaussianMixtureSpec& spec, long n,
                          RngStream rng) {
  spec.validate();
  if (n < 1) throw std::invalid_argument("sample_labeled: n must be >= 1");
  LabeledSet out;
  out.features.resize(n, spec.dim);
  out.labels.resize(n);
  const Eigen::VectorXd mean = spec.mean_vector();
  for (long i = 0; i < n; ++i) {
    int y = rng.rademacher();
    out.labels(i) = y;
    for (int j = 0; j < spec.dim; ++j)
      out.features(i, j) = y * mean(j) + spec.sigma * rng.normal();
  }
  return out;
}

UnlabeledSet sample_unlabeled(const GaussianMixtureSpec& spec, long m,
                              RngStream rng) {
  spec.validate();
  if (m < 1) throw std::invalid_argument("sample_unlabeled: m must be >= 1");
  LabeledSet drawn = sample_labeled(spec, m, rng);
  return UnlabeledSet{std::move(drawn.features), std::move(drawn.labels)};
}

PseudoLabeledSet pseudo_label_sign(const Eigen::VectorXd& w0,
                                   const Eigen::MatrixXd& features) {
  if (w0.size() != features.cols())
    throw std::invalid_argument("pseudo_label_sign: w0 size != feature dim");
  if (w0.norm() == 0.0)
    throw std::invalid_argument("pseudo_label_sign: w0 must be nonzero");
  PseudoLabeledSet out;
  out.features = features;
  out.pseudo_labels.resize(features.rows());
  Eigen::VectorXd dots = features * w0;
  for (long i = 0; i < dots.size(); ++i)
    out.pseudo_labels(i) = dots(i) >= 0.0 ? 1 : -1;
  return out;
}

PseudoLabeledSet pseudo_label_threshold(const Eigen::VectorXd& w0,
                                        const Eigen::MatrixXd& features,
                                        double threshold) {
  if (w0.size() != features.cols())
    throw std::invalid_argument("pseudo_label_threshold: w0 size != feature dim");
  if (w0.norm() == 0.0)
    throw std::invalid_argument("pseudo_label_threshold: w0 must be nonzero");
  if (!(threshold >= 0.0))
    throw std::invalid_argument("pseudo_label_threshold: threshold must be >= 0");
  PseudoLabeledSet out;
  out.features = features;
  out.pseudo_labels.resize(features.rows());
  Eigen::VectorXd dots = features * w0;
  for (long i = 0; i < dots.size(); ++i) {
    if (std::abs(dots(i)) >= threshold)
      out.pseudo_labels(i) = dots(i) >= 0.0 ? 1 : -1;
    else
      out.pseudo_labels(i) = 0;
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

}  // namespace

LabeledSet ingest_csv_dataset(const std::string& path,
                              const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("ingest_csv_dataset: cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::vector<std::string> header;
  bool has_header = false;
  std::string line;
  long width = -1;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (first) {
      first = false;
      double tmp;
      for (const auto& f : fields)
        if (!parse_double(f, tmp)) {
          has_header = true;
          break;
        }
      if (has_header) {
        header = fields;
        width = static_cast<long>(fields.size());
        continue;
      }
    }
    if (width < 0) width = static_cast<long>(fields.size());
    if (static_cast<long>(fields.size()) != width)
      throw std::runtime_error("ingest_csv_dataset: inconsistent row width at data row " +
                               std::to_string(rows.size() + 1));
    std::vector<double> row(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j)
      if (!parse_double(fields[j], row[j]))
        throw std::runtime_error("ingest_csv_dataset: non-numeric value '" + fields[j] +
                                 "' at data row " + std::to_string(rows.size() + 1));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("ingest_csv_dataset: no data rows in " + path);

  long label_idx = -1;
  if (has_header) {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == label_column) label_idx = static_cast<long>(j);
  }
  if (label_idx < 0) {
    try {
      std::size_t pos = 0;
      long idx = std::stol(label_column, &pos);
      if (pos == label_column.size() && idx >= 0 && idx < width) label_idx = idx;
    } catch (const std::exception&) {
    }
  }
  if (label_idx < 0)
    throw std::runtime_error("ingest_csv_dataset: label column '" + label_column +
                             "' not found");

  std::set<long> label_values;
  for (const auto& row : rows) {
    double v = row[static_cast<std::size_t>(label_idx)];
    long lv = static_cast<long>(v);
    if (static_cast<double>(lv) != v)
      throw std::runtime_error("ingest_csv_dataset: non-integer label value");
    label_values.insert(lv);
  }
  bool pm_one = true, zero_one = true;
  for (long v : label_values) {
    if (v != -1 && v != 1) pm_one = false;
    if (v != 0 && v != 1) zero_one = false;
  }
  if (!pm_one && !zero_one)
    throw std::runtime_error(
        "ingest_csv_dataset: labels must be {-1,+1} or {0,1}");

  LabeledSet out;
  long n = static_cast<long>(rows.size());
  out.features.resize(n, width - 1);
  out.labels.resize(n);
  for (long i = 0; i < n; ++i) {
    long c = 0;
    for (long j = 0; j < width; ++j) {
      if (j == label_idx) continue;
      out.features(i, c++) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    long lv = static_cast<long>(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(label_idx)]);
    out.labels(i) = pm_one ? static_cast<int>(lv) : (lv == 0 ? -1 : 1);
  }
  out.validate();
  return out;
}

}  // namespace gibbslab
