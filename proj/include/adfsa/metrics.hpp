#pragma once

#include <cstddef>
#include <vector>

#include "adfsa/classifiers.hpp"
#include "adfsa/datamodel.hpp"
#include "adfsa/subset.hpp"

namespace adfsa {

/// counts[t * n_classes + p] = samples of true class t predicted as p.
struct ConfusionMatrix {
  int n_classes = 0;
  std::vector<std::size_t> counts;

  std::size_t at(int truth, int predicted) const {
    return counts[static_cast<std::size_t>(truth) * static_cast<std::size_t>(n_classes) +
                  static_cast<std::size_t>(predicted)];
  }
  std::size_t total() const;
  std::size_t trace() const;
};

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& predicted, int n_classes);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricReport {
  double accuracy = 0.0;  // trace / total
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::vector<ClassScores> per_class;
};

/// One-vs-rest precision/recall/F1 per class and their unweighted means.
/// Undefined ratios (no predictions, no samples) count as 0.
MetricReport prf_scores(const ConfusionMatrix& cm);

/// Micro-averaged TP / (TP + FP + FN) over one-vs-rest counts.
double jaccard_micro(const ConfusionMatrix& cm);

struct InferenceTiming {
  double mean_ms = 0.0;
  std::vector<int> predictions;
};

/// Mean wall-clock milliseconds of predict() over x_test restricted to
/// `subset`, across `repeats` timed passes after one untimed warm-up.
InferenceTiming measure_inference_time(const TrainedModel& model, const FeatureMatrix& x_test,
                                       const FeatureSubset& subset, int repeats = 5);

/// n_samples * popcount * bytes_per_value / 1024.
double feature_memory_kb(std::size_t n_samples, std::size_t popcount, int bytes_per_value = 8);
double feature_memory_kb(std::size_t n_samples, const FeatureSubset& subset, int bytes_per_value = 8);

}  // namespace adfsa
