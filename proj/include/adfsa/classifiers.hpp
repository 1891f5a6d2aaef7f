#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "adfsa/datamodel.hpp"
#include "adfsa/subset.hpp"

namespace adfsa {

enum class ClassifierKind { knn, logreg, linear_svm };

std::string to_string(ClassifierKind kind);
/// Accepts "knn", "logreg", "linear_svm" (and "svm"). Throws std::invalid_argument.
ClassifierKind parse_classifier_kind(const std::string& name);

struct KnnParams {
  int k = 5;
};

struct LogRegParams {
  double learning_rate = 0.1;
  int epochs = 300;
  double l2 = 1e-4;
};

/// One-vs-rest hinge loss, full-batch subgradient descent with step
/// learning_rate / (1 + learning_rate * lambda * t).
struct LinearSvmParams {
  double lambda = 1e-3;
  int epochs = 300;
  double learning_rate = 0.1;
};

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::linear_svm;
  KnnParams knn;
  LogRegParams logreg;
  LinearSvmParams svm;

  static ClassifierSpec make(ClassifierKind kind) { return ClassifierSpec{kind, {}, {}, {}}; }
  static ClassifierSpec make_knn(int k) { return ClassifierSpec{ClassifierKind::knn, {k}, {}, {}}; }

  bool is_linear() const { return kind != ClassifierKind::knn; }
  /// Throws std::invalid_argument for non-positive parameters or an even k.
  void validate() const;
};

struct TrainedModel {
  ClassifierSpec spec;
  std::size_t n_features = 0;
  int n_classes = 0;
  double training_accuracy = 0.0;

  // knn
  FeatureMatrix train_x;
  std::vector<int> train_y;

  // linear models: weights is n_classes x n_features, row-major
  std::vector<double> weights;
  std::vector<double> bias;

  double weight(int cls, std::size_t feature) const {
    return weights[static_cast<std::size_t>(cls) * n_features + feature];
  }
};

TrainedModel fit(const ClassifierSpec& spec, const FeatureMatrix& x, const LabelVector& y);

/// One class id per row. Ties go to the smallest class id.
std::vector<int> predict(const TrainedModel& model, const FeatureMatrix& x);

/// Per-class scores (n_rows x n_classes, row-major) of a linear model.
std::vector<double> decision_scores(const TrainedModel& model, const FeatureMatrix& x);

/// Mean held-out accuracy over stratified folds, using only the subset's columns.
double cross_val_accuracy(const FeatureMatrix& x, const LabelVector& y, const FeatureSubset& subset,
                          const ClassifierSpec& spec, int k, std::uint64_t seed);
double cross_val_accuracy(const FeatureMatrix& x, const LabelVector& y, const FeatureSubset& subset,
                          const ClassifierSpec& spec, const FoldAssignment& folds);

double accuracy(const std::vector<int>& truth, const std::vector<int>& predicted);

/// JSON text file with a "format"/"version" header; see README.
void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace adfsa
