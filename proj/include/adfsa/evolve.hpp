#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "adfsa/classifiers.hpp"
#include "adfsa/datamodel.hpp"
#include "adfsa/fitness.hpp"
#include "adfsa/subset.hpp"

namespace adfsa {

/// Stagnation-triggered adaptation constants.
struct StagnationParams {
  int min_generation = 5;  // adapt only when generation > min_generation
  double epsilon = 0.001;
  double alpha_step = 0.05;
  double alpha_cap = 1.0;
  double beta_step = 0.05;
  double beta_floor = 0.1;
  double mutation_step = 0.01;
  double mutation_cap = 0.2;
};

/// How per-generation weights are derived.
///  - linear_schedule: schedule_weights(g, G) only.
///  - stagnation_adaptive: initial_weights plus stagnation adjustments.
///  - combined: schedule as base, stagnation offsets accumulated on top, caps last.
///  - fixed: initial_weights every generation, no adaptation.
enum class WeightMode { linear_schedule, stagnation_adaptive, combined, fixed };

std::string to_string(WeightMode mode);
WeightMode parse_weight_mode(const std::string& name);

struct AblationFlags {
  bool use_uniqueness = true;
  bool use_complexity = true;
};

struct GAConfig {
  int population_size = 50;
  int n_generations = 30;
  double mutation_rate = 0.05;
  double init_density = 0.5;
  StagnationParams stagnation;
  WeightMode weight_mode = WeightMode::stagnation_adaptive;
  FitnessWeights initial_weights = FitnessWeights::initial();
  int elitism_count = 1;
  ClassifierSpec evaluator = ClassifierSpec::make(ClassifierKind::linear_svm);
  int k_folds = 5;
  double redundancy_threshold = 0.7;
  AblationFlags ablation;
  /// Hold the uniqueness term at 1 for every subset (oracle comparisons).
  bool fix_uniqueness = false;
  bool cache_accuracy = true;
  /// Worker threads for generation evaluation; 0 = hardware concurrency.
  int threads = 0;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on violated invariants.
  void validate() const;
};

using Population = std::vector<FeatureSubset>;

struct GenerationRecord {
  int generation = 0;  // 1-based
  double best_total = 0.0;
  double mean_total = 0.0;
  FitnessBreakdown best;  // breakdown of the generation's best individual
  std::size_t popcount_best = 0;
  double mutation_rate = 0.0;
  bool stagnation_triggered = false;
};

struct GAResult {
  FeatureSubset best_subset;
  FitnessBreakdown best_breakdown;
  std::vector<GenerationRecord> trace;
  std::size_t history_size = 0;
  std::size_t total_evaluations = 0;
  /// Evaluations of a subset that had already been evaluated earlier in the run
  /// or earlier in the same generation (total_evaluations - history_size).
  std::size_t repeated_evaluations = 0;
  std::size_t accuracy_fits = 0;  // cross-validations actually run
  FitnessWeights final_weights;
  double final_mutation_rate = 0.0;
  Population final_population;
  double wall_time_ms = 0.0;
};

/// Deterministic RNG stream for (seed, generation, index).
std::mt19937_64 derive_rng(std::uint64_t seed, std::uint64_t generation, std::uint64_t index);

/// Sets one uniformly chosen bit when the subset is empty.
void repair(FeatureSubset& s, std::mt19937_64& rng);

Population init_population(std::size_t n_features, const GAConfig& config);

struct GenerationEvaluation {
  std::vector<FitnessBreakdown> breakdowns;
  std::vector<double> fitness;
};

/// Scores every individual against the history as it was on entry, then
/// records all of them in `history` under `generation`.
GenerationEvaluation evaluate_generation(const Population& population, const FitnessEvaluator& evaluator,
                                         const FitnessWeights& weights, EvaluationHistory& history,
                                         int generation, const GAConfig& config);

/// Weights after ablation flags are applied (disabled terms weighted 0).
FitnessWeights effective_weights(const FitnessWeights& w, const AblationFlags& ablation);

/// Indices sorted best first: fitness descending, then smaller popcount,
/// then lexicographically smaller bits.
std::vector<std::size_t> rank_population(const Population& population, std::span<const double> fitness);

/// Children of single-point crossover: prefix [0, point) from the first parent.
std::pair<FeatureSubset, FeatureSubset> crossover(const FeatureSubset& a, const FeatureSubset& b,
                                                  std::size_t point);

/// Top-half truncation selection, elitism, crossover, one-bit mutation, repair.
Population evolve_step(const Population& population, std::span<const double> fitness, const GAConfig& config,
                       double mutation_rate, std::mt19937_64& rng);

struct StagnationOutcome {
  FitnessWeights weights;
  double mutation_rate = 0.0;
  bool triggered = false;
};

StagnationOutcome stagnation_adjust(const FitnessWeights& weights, double mutation_rate, double best_now,
                                    double best_prev, int generation, const StagnationParams& params);

GAResult run_adfsa(const FeatureMatrix& x, const LabelVector& y, const GAConfig& config);

struct BruteForceResult {
  FeatureSubset best_subset;
  FitnessBreakdown best_breakdown;
  /// Total of every non-empty subset; entry mask-1 holds subset `mask`.
  std::vector<double> totals;
};

/// Exhaustive search over all non-empty subsets with the uniqueness term held
/// at 1. At most 20 features.
BruteForceResult brute_force_best(const FeatureMatrix& x, const LabelVector& y, const FitnessWeights& weights,
                                  const ClassifierSpec& evaluator, int k_folds, double threshold,
                                  std::uint64_t seed);

}  // namespace adfsa
