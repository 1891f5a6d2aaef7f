#include "adfsa/metrics.hpp"

#include <chrono>
#include <stdexcept>

#include "adfsa/errors.hpp"

namespace adfsa {

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (int c = 0; c < n_classes; ++c) t += at(c, c);
  return t;
}

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& predicted, int n_classes) {
  if (truth.size() != predicted.size()) throw DataError("confusion: length mismatch");
  if (n_classes < 1) throw std::invalid_argument("confusion: n_classes must be positive");
  ConfusionMatrix cm;
  cm.n_classes = n_classes;
  cm.counts.assign(static_cast<std::size_t>(n_classes) * static_cast<std::size_t>(n_classes), 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    const int p = predicted[i];
    if (t < 0 || t >= n_classes || p < 0 || p >= n_classes) {
      throw DataError("confusion: label out of range at position " + std::to_string(i));
    }
    ++cm.counts[static_cast<std::size_t>(t) * static_cast<std::size_t>(n_classes) + static_cast<std::size_t>(p)];
  }
  return cm;
}

MetricReport prf_scores(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (total == 0) throw std::invalid_argument("prf_scores: empty confusion matrix");
  MetricReport r;
  r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
  for (int c = 0; c < cm.n_classes; ++c) {
    const auto tp = static_cast<double>(cm.at(c, c));
    double predicted = 0.0;
    double actual = 0.0;
    for (int o = 0; o < cm.n_classes; ++o) {
      predicted += static_cast<double>(cm.at(o, c));
      actual += static_cast<double>(cm.at(c, o));
    }
    ClassScores s;
    s.precision = predicted > 0 ? tp / predicted : 0.0;
    s.recall = actual > 0 ? tp / actual : 0.0;
    s.f1 = predicted + actual > 0 ? 2.0 * tp / (predicted + actual) : 0.0;
    r.per_class.push_back(s);
    r.macro_precision += s.precision;
    r.macro_recall += s.recall;
    r.macro_f1 += s.f1;
  }
  const auto k = static_cast<double>(cm.n_classes);
  r.macro_precision /= k;
  r.macro_recall /= k;
  r.macro_f1 /= k;
  return r;
}

double jaccard_micro(const ConfusionMatrix& cm) {
  const auto tp = static_cast<double>(cm.trace());
  // Every off-diagonal count is one FP (for the predicted class) and one FN.
  const double off = static_cast<double>(cm.total()) - tp;
  const double denom = tp + 2.0 * off;
  return denom > 0 ? tp / denom : 0.0;
}

InferenceTiming measure_inference_time(const TrainedModel& model, const FeatureMatrix& x_test,
                                       const FeatureSubset& subset, int repeats) {
  if (repeats < 1) throw std::invalid_argument("measure_inference_time: repeats must be >= 1");
  if (subset.size() != x_test.cols()) throw DataError("subset length does not match test width");
  const FeatureMatrix sliced = x_test.select_columns(subset.indices());
  InferenceTiming out;
  out.predictions = predict(model, sliced);
  double total_ms = 0.0;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto pred = predict(model, sliced);
    const auto t1 = std::chrono::steady_clock::now();
    total_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
    if (pred != out.predictions) throw std::logic_error("predict is not deterministic");
  }
  out.mean_ms = total_ms / repeats;
  return out;
}

double feature_memory_kb(std::size_t n_samples, std::size_t popcount, int bytes_per_value) {
  if (bytes_per_value != 4 && bytes_per_value != 8) {
    throw std::invalid_argument("bytes_per_value must be 4 or 8");
  }
  return static_cast<double>(n_samples) * static_cast<double>(popcount) * bytes_per_value / 1024.0;
}

double feature_memory_kb(std::size_t n_samples, const FeatureSubset& subset, int bytes_per_value) {
  return feature_memory_kb(n_samples, subset.count(), bytes_per_value);
}

}  // namespace adfsa
