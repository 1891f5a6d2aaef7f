#include "adfsa/baselines.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "adfsa/errors.hpp"

namespace adfsa {

std::vector<double> PcaModel::explained_variance_ratio() const {
  std::vector<double> out(explained_variance.size(), 0.0);
  if (total_variance <= 0.0) return out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = explained_variance[i] / total_variance;
  return out;
}

PcaModel pca_fit(const FeatureMatrix& x, std::size_t k) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (k < 1 || k > std::min(n, d)) {
    throw std::invalid_argument("pca_fit: k=" + std::to_string(k) + " outside [1, " + std::to_string(std::min(n, d)) +
                                "]");
  }
  for (double v : x.values()) {
    if (!std::isfinite(v)) throw DataError("pca_fit: non-finite data");
  }
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMatrix> X(x.values().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  const Eigen::RowVectorXd mean = X.colwise().mean();
  const Eigen::MatrixXd centered = X.rowwise() - mean;
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;

  // Tridiagonalization + implicit QR: deterministic, eigenvalues ascending.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw DataError("pca_fit: eigendecomposition failed");

  PcaModel model;
  model.n_features = d;
  model.n_components = k;
  model.mean.assign(mean.data(), mean.data() + d);
  model.total_variance = cov.trace();
  model.components.resize(k * d);
  model.explained_variance.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto col = static_cast<Eigen::Index>(d - 1 - i);
    Eigen::VectorXd v = solver.eigenvectors().col(col);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    std::copy(v.data(), v.data() + d, model.components.begin() + static_cast<std::ptrdiff_t>(i * d));
    model.explained_variance[i] = std::max(0.0, solver.eigenvalues()(col));
  }
  return model;
}

FeatureMatrix pca_project(const PcaModel& model, const FeatureMatrix& x) {
  if (x.cols() != model.n_features) {
    throw DataError("pca_project: input width " + std::to_string(x.cols()) + " != model width " +
                    std::to_string(model.n_features));
  }
  const std::size_t k = model.n_components;
  const std::size_t d = model.n_features;
  std::vector<double> out(x.rows() * k, 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    for (std::size_t c = 0; c < k; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += (row[j] - model.mean[j]) * model.component(c, j);
      out[r * k + c] = acc;
    }
  }
  std::vector<std::string> names;
  for (std::size_t c = 0; c < k; ++c) names.push_back("pc" + std::to_string(c));
  return FeatureMatrix(x.rows(), k, std::move(out), std::move(names));
}

void save_pca_model(const std::filesystem::path& path, const PcaModel& model) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write PCA model: " + path.string());
  auto write_row = [&](const double* v, std::size_t len) {
    for (std::size_t j = 0; j < len; ++j) {
      if (j) out << ',';
      out << format_double(v[j]);
    }
    out << '\n';
  };
  out << "# mean\n";
  write_row(model.mean.data(), model.n_features);
  out << "# explained_variance\n";
  write_row(model.explained_variance.data(), model.n_components);
  out << "# components\n";
  for (std::size_t i = 0; i < model.n_components; ++i) write_row(model.components.data() + i * model.n_features, model.n_features);
}

RfeResult rfe_select(const FeatureMatrix& x, const LabelVector& y, std::size_t k_target, std::size_t step,
                     const ClassifierSpec& spec) {
  if (!spec.is_linear()) throw std::invalid_argument("rfe_select needs a linear model (logreg or linear_svm)");
  const std::size_t d = x.cols();
  if (k_target < 1 || k_target > d) {
    throw std::invalid_argument("rfe_select: k_target=" + std::to_string(k_target) + " outside [1, " +
                                std::to_string(d) + "]");
  }
  RfeResult result;
  FeatureSubset active(d, true);
  result.path.push_back(active);
  while (active.count() > k_target) {
    const auto cols = active.indices();
    const TrainedModel model = fit(spec, x.select_columns(cols), y);
    std::vector<double> importance(cols.size(), 0.0);
    for (int c = 0; c < model.n_classes; ++c) {
      for (std::size_t j = 0; j < cols.size(); ++j) importance[j] += std::abs(model.weight(c, j));
    }
    std::vector<std::size_t> order(cols.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (importance[a] != importance[b]) return importance[a] < importance[b];
      return cols[a] > cols[b];
    });
    const std::size_t remaining = cols.size();
    std::size_t drop = step == kRfeAutoStep ? std::max<std::size_t>(1, remaining / 10) : step;
    drop = std::min(drop, remaining - k_target);
    for (std::size_t i = 0; i < drop; ++i) active.set(cols[order[i]], false);
    result.path.push_back(active);
  }
  result.selected = active;
  return result;
}

}  // namespace adfsa
