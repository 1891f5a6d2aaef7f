#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "adfsa/classifiers.hpp"
#include "adfsa/datamodel.hpp"
#include "adfsa/subset.hpp"

namespace adfsa {

struct PcaModel {
  std::vector<double> mean;                // d
  std::vector<double> components;          // k x d, row-major, orthonormal rows
  std::vector<double> explained_variance;  // k, non-increasing
  double total_variance = 0.0;             // trace of the covariance
  std::size_t n_features = 0;
  std::size_t n_components = 0;

  double component(std::size_t i, std::size_t j) const { return components[i * n_features + j]; }
  std::vector<double> explained_variance_ratio() const;
};

/// Top-k eigenvectors of the sample covariance (n-1 denominator) from a
/// deterministic symmetric eigensolver. Each component's largest-magnitude
/// entry is made positive.
PcaModel pca_fit(const FeatureMatrix& x, std::size_t k);

/// (x - mean) * components^T.
FeatureMatrix pca_project(const PcaModel& model, const FeatureMatrix& x);

/// CSV blocks: "# mean", "# explained_variance", "# components".
void save_pca_model(const std::filesystem::path& path, const PcaModel& model);

struct RfeResult {
  FeatureSubset selected;
  /// Active set after each elimination round, starting with the full set.
  std::vector<FeatureSubset> path;
};

/// Default step for RFE: max(1, 10% of the remaining features).
constexpr std::size_t kRfeAutoStep = 0;

/// Recursive feature elimination with a linear model. Importance of a
/// feature is the sum over classes of |weight|; the `step` least important
/// are dropped per round (ties: the higher index goes first).
RfeResult rfe_select(const FeatureMatrix& x, const LabelVector& y, std::size_t k_target,
                     std::size_t step = kRfeAutoStep,
                     const ClassifierSpec& spec = ClassifierSpec::make(ClassifierKind::logreg));

}  // namespace adfsa
