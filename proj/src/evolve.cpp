#include "adfsa/evolve.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "adfsa/errors.hpp"

namespace adfsa {

namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers. The first exception
// thrown by any worker is rethrown on the caller.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn fn) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

bool better(double total_a, const FeatureSubset& a, double total_b, const FeatureSubset& b) {
  if (total_a != total_b) return total_a > total_b;
  const auto pa = a.count();
  const auto pb = b.count();
  if (pa != pb) return pa < pb;
  return a < b;
}

}  // namespace

std::string to_string(WeightMode mode) {
  switch (mode) {
    case WeightMode::linear_schedule: return "linear_schedule";
    case WeightMode::stagnation_adaptive: return "stagnation_adaptive";
    case WeightMode::combined: return "combined";
    case WeightMode::fixed: return "fixed";
  }
  return "unknown";
}

WeightMode parse_weight_mode(const std::string& name) {
  if (name == "linear_schedule") return WeightMode::linear_schedule;
  if (name == "stagnation_adaptive") return WeightMode::stagnation_adaptive;
  if (name == "combined") return WeightMode::combined;
  if (name == "fixed") return WeightMode::fixed;
  throw std::invalid_argument("unknown weight_mode '" + name +
                              "' (expected linear_schedule, stagnation_adaptive, combined or fixed)");
}

void GAConfig::validate() const {
  if (population_size < 4 || population_size % 2 != 0) {
    throw std::invalid_argument("population_size must be even and at least 4");
  }
  if (n_generations < 1) throw std::invalid_argument("n_generations must be at least 1");
  if (!(mutation_rate > 0.0 && mutation_rate <= stagnation.mutation_cap && stagnation.mutation_cap <= 1.0)) {
    throw std::invalid_argument("mutation_rate must satisfy 0 < rate <= mutation_cap <= 1");
  }
  if (!(init_density > 0.0 && init_density < 1.0)) throw std::invalid_argument("init_density must lie in (0, 1)");
  if (elitism_count < 0 || elitism_count >= population_size / 2) {
    throw std::invalid_argument("elitism_count must be in [0, population_size/2)");
  }
  if (k_folds < 2) throw std::invalid_argument("k_folds must be at least 2");
  if (!(redundancy_threshold >= 0.0 && redundancy_threshold < 1.0)) {
    throw std::invalid_argument("redundancy_threshold must lie in [0, 1)");
  }
  evaluator.validate();
}

std::mt19937_64 derive_rng(std::uint64_t seed, std::uint64_t generation, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(generation), static_cast<std::uint32_t>(index)};
  return std::mt19937_64(seq);
}

void repair(FeatureSubset& s, std::mt19937_64& rng) {
  if (s.size() == 0 || !s.none()) return;
  std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
  s.set(pick(rng));
}

Population init_population(std::size_t n_features, const GAConfig& config) {
  if (n_features < 2) throw std::invalid_argument("init_population needs at least 2 features");
  Population pop;
  pop.reserve(static_cast<std::size_t>(config.population_size));
  for (int i = 0; i < config.population_size; ++i) {
    auto rng = derive_rng(config.seed, 0, static_cast<std::uint64_t>(i));
    std::bernoulli_distribution bit(config.init_density);
    FeatureSubset s(n_features);
    for (std::size_t j = 0; j < n_features; ++j) s.set(j, bit(rng));
    repair(s, rng);
    pop.push_back(std::move(s));
  }
  return pop;
}

FitnessWeights effective_weights(const FitnessWeights& w, const AblationFlags& ablation) {
  FitnessWeights out = w;
  if (!ablation.use_uniqueness) out.gamma = 0.0;
  if (!ablation.use_complexity) out.delta = 0.0;
  return out;
}

GenerationEvaluation evaluate_generation(const Population& population, const FitnessEvaluator& evaluator,
                                         const FitnessWeights& weights, EvaluationHistory& history,
                                         int generation, const GAConfig& config) {
  if (population.empty()) throw std::invalid_argument("evaluate_generation: empty population");
  const FitnessWeights w = effective_weights(weights, config.ablation);

  // Distinct subsets in first-occurrence order; duplicates share one score.
  std::unordered_map<FeatureSubset, std::size_t> slot_of;
  std::vector<std::size_t> unique_members;
  std::vector<std::size_t> slot(population.size());
  for (std::size_t i = 0; i < population.size(); ++i) {
    auto [it, inserted] = slot_of.emplace(population[i], unique_members.size());
    if (inserted) unique_members.push_back(i);
    slot[i] = it->second;
  }

  std::vector<FitnessBreakdown> unique_scores(unique_members.size());
  parallel_for(unique_members.size(), config.threads, [&](std::size_t u) {
    const FeatureSubset& s = population[unique_members[u]];
    const double f_uni = config.fix_uniqueness ? 1.0 : uniqueness_score(s, history);
    unique_scores[u] = evaluator.evaluate(s, w, f_uni);
  });

  GenerationEvaluation out;
  out.breakdowns.reserve(population.size());
  out.fitness.reserve(population.size());
  for (std::size_t i = 0; i < population.size(); ++i) {
    out.breakdowns.push_back(unique_scores[slot[i]]);
    out.fitness.push_back(unique_scores[slot[i]].total);
  }
  for (const auto& s : population) history.insert(s, generation);
  return out;
}

std::vector<std::size_t> rank_population(const Population& population, std::span<const double> fitness) {
  if (population.size() != fitness.size()) throw std::invalid_argument("fitness list not aligned with population");
  std::vector<std::size_t> order(population.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return better(fitness[a], population[a], fitness[b], population[b]);
  });
  return order;
}

std::pair<FeatureSubset, FeatureSubset> crossover(const FeatureSubset& a, const FeatureSubset& b,
                                                  std::size_t point) {
  if (a.size() != b.size()) throw std::invalid_argument("crossover: parent lengths differ");
  if (point < 1 || point >= a.size()) throw std::invalid_argument("crossover point out of range");
  FeatureSubset c1 = a;
  FeatureSubset c2 = b;
  for (std::size_t i = point; i < a.size(); ++i) {
    c1.set(i, b.test(i));
    c2.set(i, a.test(i));
  }
  return {std::move(c1), std::move(c2)};
}

Population evolve_step(const Population& population, std::span<const double> fitness, const GAConfig& config,
                       double mutation_rate, std::mt19937_64& rng) {
  const auto order = rank_population(population, fitness);
  const auto target = static_cast<std::size_t>(config.population_size);
  const std::size_t n = population.front().size();
  const std::size_t n_survivors = std::max<std::size_t>(1, population.size() / 2);

  Population next;
  next.reserve(target);
  for (int e = 0; e < config.elitism_count && static_cast<std::size_t>(e) < order.size(); ++e) {
    next.push_back(population[order[static_cast<std::size_t>(e)]]);
  }

  std::uniform_int_distribution<std::size_t> pick_parent(0, n_survivors - 1);
  std::uniform_int_distribution<std::size_t> pick_point(1, n - 1);
  std::uniform_int_distribution<std::size_t> pick_bit(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (next.size() < target) {
    const FeatureSubset& p1 = population[order[pick_parent(rng)]];
    const FeatureSubset& p2 = population[order[pick_parent(rng)]];
    auto [c1, c2] = crossover(p1, p2, pick_point(rng));
    for (FeatureSubset* child : {&c1, &c2}) {
      if (unit(rng) < mutation_rate) child->flip(pick_bit(rng));
      repair(*child, rng);
      if (next.size() < target) next.push_back(std::move(*child));
    }
  }
  return next;
}

StagnationOutcome stagnation_adjust(const FitnessWeights& weights, double mutation_rate, double best_now,
                                    double best_prev, int generation, const StagnationParams& params) {
  if (generation < 1) throw std::invalid_argument("stagnation_adjust: generation must be >= 1");
  StagnationOutcome out{weights, mutation_rate, false};
  if (generation > params.min_generation && best_now - best_prev < params.epsilon) {
    out.triggered = true;
    out.weights.alpha = std::min(weights.alpha + params.alpha_step, params.alpha_cap);
    out.weights.beta = std::max(weights.beta - params.beta_step, params.beta_floor);
    out.mutation_rate = std::min(mutation_rate + params.mutation_step, params.mutation_cap);
  }
  return out;
}

GAResult run_adfsa(const FeatureMatrix& x, const LabelVector& y, const GAConfig& config) {
  config.validate();
  if (x.rows() != y.size()) throw DataError("feature and label lengths differ");
  const auto start = std::chrono::steady_clock::now();

  const FitnessEvaluator evaluator(x, y, config.evaluator, config.k_folds, config.redundancy_threshold,
                                   config.seed, config.cache_accuracy);
  EvaluationHistory history;
  Population population = init_population(x.cols(), config);

  GAResult result;
  bool have_best = false;
  FitnessWeights adaptive = config.initial_weights;
  double alpha_offset = 0.0;
  double beta_offset = 0.0;
  double mutation_rate = config.mutation_rate;
  double previous_best = 0.0;
  const StagnationParams& stag = config.stagnation;

  for (int g = 1; g <= config.n_generations; ++g) {
    FitnessWeights weights;
    switch (config.weight_mode) {
      case WeightMode::linear_schedule: weights = schedule_weights(g, config.n_generations); break;
      case WeightMode::stagnation_adaptive: weights = adaptive; break;
      case WeightMode::fixed: weights = config.initial_weights; break;
      case WeightMode::combined: {
        weights = schedule_weights(g, config.n_generations);
        weights.alpha = std::min(weights.alpha + alpha_offset, stag.alpha_cap);
        weights.beta = std::max(weights.beta - beta_offset, stag.beta_floor);
        break;
      }
    }

    const auto eval = evaluate_generation(population, evaluator, weights, history, g, config);
    result.total_evaluations += population.size();

    const auto order = rank_population(population, eval.fitness);
    const std::size_t top = order.front();
    GenerationRecord rec;
    rec.generation = g;
    rec.best_total = eval.fitness[top];
    double sum = 0.0;
    for (double f : eval.fitness) sum += f;
    rec.mean_total = sum / static_cast<double>(eval.fitness.size());
    rec.best = eval.breakdowns[top];
    rec.popcount_best = population[top].count();
    rec.mutation_rate = mutation_rate;

    if (!have_best || better(rec.best_total, population[top], result.best_breakdown.total, result.best_subset)) {
      result.best_subset = population[top];
      result.best_breakdown = rec.best;
      have_best = true;
    }

    if (config.weight_mode == WeightMode::stagnation_adaptive || config.weight_mode == WeightMode::combined) {
      const auto adj = stagnation_adjust(adaptive, mutation_rate, rec.best_total, previous_best, g, stag);
      rec.stagnation_triggered = adj.triggered;
      mutation_rate = adj.mutation_rate;
      if (config.weight_mode == WeightMode::stagnation_adaptive) {
        adaptive = adj.weights;
      } else if (adj.triggered) {
        alpha_offset += stag.alpha_step;
        beta_offset += stag.beta_step;
      }
    }
    previous_best = rec.best_total;
    result.trace.push_back(rec);
    result.final_weights = weights;

    if (g < config.n_generations) {
      auto rng = derive_rng(config.seed, static_cast<std::uint64_t>(g), 0x6272656564ULL);
      population = evolve_step(population, eval.fitness, config, mutation_rate, rng);
    }
  }

  result.history_size = history.size();
  result.repeated_evaluations = result.total_evaluations - history.size();
  result.accuracy_fits = evaluator.accuracy_evaluations();
  result.final_mutation_rate = mutation_rate;
  result.final_population = std::move(population);
  result.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

BruteForceResult brute_force_best(const FeatureMatrix& x, const LabelVector& y, const FitnessWeights& weights,
                                  const ClassifierSpec& evaluator, int k_folds, double threshold,
                                  std::uint64_t seed) {
  const std::size_t n = x.cols();
  if (n > 20) throw std::invalid_argument("brute_force_best supports at most 20 features, got " + std::to_string(n));
  const FitnessEvaluator eval(x, y, evaluator, k_folds, threshold, seed, false);
  BruteForceResult out;
  const std::uint64_t n_masks = (std::uint64_t{1} << n) - 1;
  out.totals.reserve(n_masks);
  bool have = false;
  for (std::uint64_t mask = 1; mask <= n_masks; ++mask) {
    FeatureSubset s(n);
    for (std::size_t i = 0; i < n; ++i) s.set(i, (mask >> i) & 1u);
    const auto b = eval.evaluate(s, weights, 1.0);
    out.totals.push_back(b.total);
    if (!have || better(b.total, s, out.best_breakdown.total, out.best_subset)) {
      out.best_subset = s;
      out.best_breakdown = b;
      have = true;
    }
  }
  return out;
}

}  // namespace adfsa
