#include "adfsa/fitness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "adfsa/errors.hpp"

namespace adfsa {

double combine(const FitnessWeights& w, double f_acc, double f_red, double f_uni, double f_comp) {
  return w.alpha * f_acc - w.beta * f_red + w.gamma * f_uni - w.delta * f_comp;
}

FitnessBreakdown make_breakdown(const FitnessWeights& w, double f_acc, double f_red, double f_uni,
                                double f_comp) {
  return {f_acc, f_red, f_uni, f_comp, combine(w, f_acc, f_red, f_uni, f_comp), w};
}

bool EvaluationHistory::insert(const FeatureSubset& s, int generation) {
  return seen_.emplace(s, generation).second;
}

int EvaluationHistory::generation_of(const FeatureSubset& s) const {
  auto it = seen_.find(s);
  return it == seen_.end() ? -1 : it->second;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
  if (x.size() < 2) throw std::invalid_argument("pearson: need at least two values");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  const double r = sxy / (std::sqrt(sxx) * std::sqrt(syy));
  return std::clamp(r, -1.0, 1.0);
}

CorrelationMatrix::CorrelationMatrix(const FeatureMatrix& x) : n_(x.cols()), r_(n_ * n_, 0.0) {
  std::vector<std::vector<double>> cols(n_);
  for (std::size_t c = 0; c < n_; ++c) cols[c] = x.column(c);
  for (std::size_t i = 0; i < n_; ++i) {
    r_[i * n_ + i] = 1.0;
    for (std::size_t j = i + 1; j < n_; ++j) {
      const double r = x.rows() < 2 ? 0.0 : pearson(cols[i], cols[j]);
      r_[i * n_ + j] = r;
      r_[j * n_ + i] = r;
    }
  }
}

double redundancy_score(const CorrelationMatrix& corr, const FeatureSubset& subset, double threshold) {
  if (subset.size() != corr.size()) throw DataError("subset length does not match feature count");
  const auto idx = subset.indices();
  const std::size_t m = idx.size();
  if (m <= 1) return 0.0;
  std::size_t hits = 0;
  for (std::size_t a = 0; a + 1 < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      if (std::abs(corr(idx[a], idx[b])) > threshold) ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(m * (m - 1));
}

double redundancy_score(const FeatureMatrix& x, const FeatureSubset& subset, double threshold) {
  if (subset.size() != x.cols()) throw DataError("subset length does not match feature count");
  const auto idx = subset.indices();
  const std::size_t m = idx.size();
  if (m <= 1) return 0.0;
  std::vector<std::vector<double>> cols;
  for (std::size_t c : idx) cols.push_back(x.column(c));
  std::size_t hits = 0;
  for (std::size_t a = 0; a + 1 < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      if (std::abs(pearson(cols[a], cols[b])) > threshold) ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(m * (m - 1));
}

double uniqueness_score(const FeatureSubset& subset, const EvaluationHistory& history) {
  return history.contains(subset) ? 0.0 : 1.0;
}

double complexity_score(const FeatureSubset& subset, std::size_t n_total) {
  if (n_total == 0) throw std::invalid_argument("complexity_score: n_total must be >= 1");
  return static_cast<double>(subset.count()) / static_cast<double>(n_total);
}

FitnessWeights schedule_weights(int generation, int total_generations) {
  if (total_generations < 1 || generation < 1 || generation > total_generations) {
    throw std::invalid_argument("schedule_weights: generation " + std::to_string(generation) +
                                " outside [1, " + std::to_string(total_generations) + "]");
  }
  const double p = static_cast<double>(generation) / static_cast<double>(total_generations);
  return {0.4 + 0.6 * p, 0.3 - 0.2 * p, 0.3 - 0.2 * p, 0.2 + 0.1 * p};
}

FitnessBreakdown ensemble_fitness(const FeatureMatrix& x, const LabelVector& y, const FeatureSubset& subset,
                                  const FitnessWeights& weights, const EvaluationHistory& history,
                                  const ClassifierSpec& evaluator, int k_folds, double threshold,
                                  std::uint64_t seed) {
  if (subset.none()) throw DataError("empty feature subset");
  const double f_acc = cross_val_accuracy(x, y, subset, evaluator, k_folds, seed);
  const double f_red = redundancy_score(x, subset, threshold);
  const double f_uni = uniqueness_score(subset, history);
  const double f_comp = complexity_score(subset, x.cols());
  return make_breakdown(weights, f_acc, f_red, f_uni, f_comp);
}

FitnessEvaluator::FitnessEvaluator(const FeatureMatrix& x, const LabelVector& y, ClassifierSpec evaluator,
                                   int k_folds, double threshold, std::uint64_t seed, bool use_cache)
    : x_(x),
      y_(y),
      spec_(evaluator),
      folds_(stratified_kfold(y, k_folds, seed)),
      corr_(x),
      threshold_(threshold),
      use_cache_(use_cache) {
  spec_.validate();
  if (x.rows() != y.size()) throw DataError("feature and label lengths differ");
}

double FitnessEvaluator::accuracy(const FeatureSubset& subset) const {
  if (use_cache_) {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(subset); it != cache_.end()) return it->second;
  }
  const double acc = cross_val_accuracy(x_, y_, subset, spec_, folds_);
  std::lock_guard lock(mutex_);
  ++computed_;
  if (use_cache_) cache_.emplace(subset, acc);
  return acc;
}

FitnessBreakdown FitnessEvaluator::evaluate(const FeatureSubset& subset, const FitnessWeights& weights,
                                            double f_uni) const {
  if (subset.none()) throw DataError("empty feature subset");
  return make_breakdown(weights, accuracy(subset), redundancy(subset), f_uni,
                        complexity_score(subset, x_.cols()));
}

std::size_t FitnessEvaluator::accuracy_evaluations() const {
  std::lock_guard lock(mutex_);
  return computed_;
}

}  // namespace adfsa
