#pragma once

#include <cstdint>
#include <mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "adfsa/classifiers.hpp"
#include "adfsa/datamodel.hpp"
#include "adfsa/subset.hpp"

namespace adfsa {

/// Weights of the four ensemble-fitness terms. Not renormalized.
struct FitnessWeights {
  double alpha = 0.4;  // accuracy
  double beta = 0.3;   // redundancy penalty
  double gamma = 0.3;  // uniqueness boost
  double delta = 0.2;  // complexity penalty

  static constexpr FitnessWeights initial() { return {0.4, 0.3, 0.3, 0.2}; }
  bool operator==(const FitnessWeights&) const = default;
};

struct FitnessBreakdown {
  double f_acc = 0.0;
  double f_red = 0.0;
  double f_uni = 0.0;
  double f_comp = 0.0;
  double total = 0.0;
  FitnessWeights weights_used;
};

/// alpha*acc - beta*red + gamma*uni - delta*comp.
double combine(const FitnessWeights& w, double f_acc, double f_red, double f_uni, double f_comp);
FitnessBreakdown make_breakdown(const FitnessWeights& w, double f_acc, double f_red, double f_uni, double f_comp);

/// Subsets evaluated so far in a run, with the generation that first saw each.
class EvaluationHistory {
 public:
  bool contains(const FeatureSubset& s) const { return seen_.contains(s); }
  /// No-op when already present; returns whether the subset was new.
  bool insert(const FeatureSubset& s, int generation);
  std::size_t size() const { return seen_.size(); }
  /// Generation of first insertion, or -1.
  int generation_of(const FeatureSubset& s) const;
  void clear() { seen_.clear(); }

 private:
  std::unordered_map<FeatureSubset, int> seen_;
};

/// Pearson correlation; 0 when either input has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Column-pair Pearson correlations of a matrix, computed once.
class CorrelationMatrix {
 public:
  CorrelationMatrix() = default;
  explicit CorrelationMatrix(const FeatureMatrix& x);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return r_[i * n_ + j]; }

 private:
  std::size_t n_ = 0;
  std::vector<double> r_;
};

/// Count of selected pairs i<j with |r_ij| > t, divided by m(m-1) where m is
/// the popcount. Zero when m <= 1, so the maximum is 0.5.
double redundancy_score(const FeatureMatrix& x, const FeatureSubset& subset, double threshold);
double redundancy_score(const CorrelationMatrix& corr, const FeatureSubset& subset, double threshold);

/// 1 when the subset is absent from the history, else 0. Read-only.
double uniqueness_score(const FeatureSubset& subset, const EvaluationHistory& history);

/// popcount / n_total.
double complexity_score(const FeatureSubset& subset, std::size_t n_total);

/// Linear schedules over progress p = g / G, 1 <= g <= G.
FitnessWeights schedule_weights(int generation, int total_generations);

/// Full ensemble fitness of one subset; f_acc from stratified k-fold CV.
FitnessBreakdown ensemble_fitness(const FeatureMatrix& x, const LabelVector& y, const FeatureSubset& subset,
                                  const FitnessWeights& weights, const EvaluationHistory& history,
                                  const ClassifierSpec& evaluator, int k_folds, double threshold,
                                  std::uint64_t seed);

/// Binds data, folds and correlations for repeated evaluation during a run.
/// Cross-validated accuracy depends only on the subset (folds are fixed), so
/// it is memoized; results are identical with the cache disabled.
class FitnessEvaluator {
 public:
  FitnessEvaluator(const FeatureMatrix& x, const LabelVector& y, ClassifierSpec evaluator, int k_folds,
                   double threshold, std::uint64_t seed, bool use_cache = true);

  double accuracy(const FeatureSubset& subset) const;
  double redundancy(const FeatureSubset& subset) const { return redundancy_score(corr_, subset, threshold_); }

  FitnessBreakdown evaluate(const FeatureSubset& subset, const FitnessWeights& weights, double f_uni) const;

  std::size_t n_features() const { return x_.cols(); }
  std::size_t accuracy_evaluations() const;

 private:
  const FeatureMatrix& x_;
  const LabelVector& y_;
  ClassifierSpec spec_;
  FoldAssignment folds_;
  CorrelationMatrix corr_;
  double threshold_;
  bool use_cache_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<FeatureSubset, double> cache_;
  mutable std::size_t computed_ = 0;
};

}  // namespace adfsa
