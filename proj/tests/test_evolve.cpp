#include <algorithm>
#include <cmath>
#include <random>

#include "adfsa/errors.hpp"
#include "adfsa/evolve.hpp"
#include "doctest.h"

using namespace adfsa;

namespace {

GAConfig small_config(std::uint64_t seed) {
  GAConfig cfg;
  cfg.population_size = 12;
  cfg.n_generations = 6;
  cfg.evaluator = ClassifierSpec::make_knn(3);
  cfg.threads = 1;
  cfg.seed = seed;
  return cfg;
}

SyntheticData small_data(std::uint64_t seed) {
  return generate_synthetic({90, 12, 3, 3, 3, 1.0, 0.9, 2.5}, seed);
}

}  // namespace

TEST_SUITE("evolve") {

TEST_CASE("init_population") {
  GAConfig cfg;
  cfg.seed = 3;
  const auto pop = init_population(128, cfg);
  REQUIRE(pop.size() == 50);
  double mean = 0.0;
  for (const auto& s : pop) {
    CHECK(s.size() == 128);
    CHECK(s.count() >= 1);
    mean += static_cast<double>(s.count());
  }
  mean /= 50.0;
  // Binomial(128, 0.5): mean 64, sd of the population mean ~0.8.
  CHECK(std::abs(mean - 64.0) <= 10.0);
  CHECK(init_population(128, cfg) == pop);

  cfg.init_density = 1e-9;  // every draw is all-zero and gets repaired
  for (const auto& s : init_population(16, cfg)) CHECK(s.count() == 1);
  CHECK_THROWS_AS(init_population(1, cfg), std::invalid_argument);
}

TEST_CASE("crossover and repair") {
  const auto a = FeatureSubset::from_string("11110000");
  const auto b = FeatureSubset::from_string("00001111");
  auto [c1, c2] = crossover(a, b, 4);
  CHECK(c1.to_string() == "11111111");
  CHECK(c2.to_string() == "00000000");
  std::mt19937_64 rng(1);
  repair(c2, rng);
  CHECK(c2.count() == 1);
  CHECK_THROWS_AS(crossover(a, b, 0), std::invalid_argument);
  CHECK_THROWS_AS(crossover(a, b, 8), std::invalid_argument);

  SUBCASE("property: every child bit comes from a parent at that position") {
    std::mt19937_64 g(5);
    for (int t = 0; t < 200; ++t) {
      FeatureSubset p(30), q(30);
      for (std::size_t i = 0; i < 30; ++i) {
        p.set(i, g() & 1u);
        q.set(i, g() & 1u);
      }
      const std::size_t point = 1 + g() % 29;
      auto [x, y] = crossover(p, q, point);
      for (std::size_t i = 0; i < 30; ++i) {
        CHECK((x.test(i) == p.test(i) || x.test(i) == q.test(i)));
        CHECK(x.test(i) == (i < point ? p.test(i) : q.test(i)));
        CHECK(y.test(i) == (i < point ? q.test(i) : p.test(i)));
      }
    }
  }
}

TEST_CASE("rank_population tie-breaks") {
  const Population pop{FeatureSubset::from_string("1100"), FeatureSubset::from_string("1000"),
                       FeatureSubset::from_string("0100"), FeatureSubset::from_string("1111")};
  const std::vector<double> fit{0.5, 0.5, 0.5, 0.9};
  // 0.9 first; then popcount 1 ("0100" < "1000"), then popcount 2.
  CHECK(rank_population(pop, fit) == std::vector<std::size_t>{3, 2, 1, 0});
}

TEST_CASE("evolve_step") {
  GAConfig cfg;
  cfg.population_size = 10;
  cfg.elitism_count = 1;
  std::mt19937_64 g(2);
  Population pop;
  std::vector<double> fit;
  for (int i = 0; i < 10; ++i) {
    FeatureSubset s(16);
    for (std::size_t j = 0; j < 16; ++j) s.set(j, g() & 1u);
    repair(s, g);
    pop.push_back(s);
    fit.push_back(static_cast<double>(g() % 1000) / 1000.0);
  }
  const auto best = pop[rank_population(pop, fit).front()];

  SUBCASE("elite survives with zero mutation") {
    auto rng = derive_rng(9, 1, 0);
    const auto next = evolve_step(pop, fit, cfg, 0.0, rng);
    CHECK(next.size() == 10);
    CHECK(std::find(next.begin(), next.end(), best) != next.end());
    CHECK(next.front() == best);
  }
  SUBCASE("deterministic given the stream") {
    auto r1 = derive_rng(9, 1, 0);
    auto r2 = derive_rng(9, 1, 0);
    CHECK(evolve_step(pop, fit, cfg, 0.2, r1) == evolve_step(pop, fit, cfg, 0.2, r2));
  }
  SUBCASE("children are built from survivors only") {
    // Without mutation, a bit set in no survivor can never appear in a child.
    cfg.elitism_count = 0;
    const auto order = rank_population(pop, fit);
    FeatureSubset survivors_union(16);
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j : pop[order[i]].indices()) survivors_union.set(j);
    }
    auto rng = derive_rng(4, 2, 0);
    for (const auto& child : evolve_step(pop, fit, cfg, 0.0, rng)) {
      for (std::size_t j : child.indices()) {
        // Repair may set any bit, but only on an otherwise empty child.
        if (child.count() > 1) CHECK(survivors_union.test(j));
      }
    }
  }
  SUBCASE("no empty individuals") {
    auto rng = derive_rng(4, 3, 0);
    for (const auto& child : evolve_step(pop, fit, cfg, 0.2, rng)) CHECK(child.count() >= 1);
  }
}

TEST_CASE("stagnation_adjust") {
  const StagnationParams p;
  const FitnessWeights w{0.4, 0.3, 0.3, 0.2};
  const auto hit = stagnation_adjust(w, 0.05, 0.5005, 0.5, 7, p);
  CHECK(hit.triggered);
  CHECK(hit.weights.alpha == doctest::Approx(0.45).epsilon(1e-15));
  CHECK(hit.weights.beta == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(hit.weights.gamma == 0.3);
  CHECK(hit.weights.delta == 0.2);
  CHECK(hit.mutation_rate == doctest::Approx(0.06).epsilon(1e-15));

  const auto early = stagnation_adjust(w, 0.05, 0.5, 0.5, 3, p);
  CHECK_FALSE(early.triggered);
  CHECK(early.weights == w);
  CHECK(early.mutation_rate == 0.05);

  const auto improving = stagnation_adjust(w, 0.05, 0.6, 0.5, 9, p);
  CHECK_FALSE(improving.triggered);

  const auto capped = stagnation_adjust({0.98, 0.12, 0.3, 0.2}, 0.195, 0.5, 0.5, 8, p);
  CHECK(capped.weights.alpha == 1.0);
  CHECK(capped.weights.beta == 0.1);
  CHECK(capped.mutation_rate == 0.2);
}

TEST_CASE("evaluate_generation uses a snapshot") {
  const auto data = small_data(1);
  const auto cfg = small_config(1);
  const FitnessEvaluator ev(data.features, data.labels, cfg.evaluator, cfg.k_folds, 0.7, cfg.seed);
  EvaluationHistory h;
  const auto s = FeatureSubset::from_indices(12, data.informative);
  const Population twins{s, s};
  const auto first = evaluate_generation(twins, ev, FitnessWeights::initial(), h, 1, cfg);
  CHECK(first.breakdowns[0].f_uni == 1.0);
  CHECK(first.breakdowns[1].f_uni == 1.0);
  CHECK(first.fitness[0] == first.fitness[1]);
  CHECK(h.size() == 1);
  const auto second = evaluate_generation(Population{s}, ev, FitnessWeights::initial(), h, 2, cfg);
  CHECK(second.breakdowns[0].f_uni == 0.0);
  CHECK(first.fitness[0] - second.fitness[0] == doctest::Approx(0.3));

  SUBCASE("order independence") {
    EvaluationHistory h1, h2;
    Population pop = init_population(12, cfg);
    Population rev(pop.rbegin(), pop.rend());
    const auto a = evaluate_generation(pop, ev, FitnessWeights::initial(), h1, 1, cfg);
    const auto b = evaluate_generation(rev, ev, FitnessWeights::initial(), h2, 1, cfg);
    for (std::size_t i = 0; i < pop.size(); ++i) CHECK(a.fitness[i] == b.fitness[pop.size() - 1 - i]);
  }
}

TEST_CASE("an added redundant copy lowers the total") {
  // Column 2 duplicates column 0; accuracy of {0,1} and {0,1,2} is equal for
  // 1-NN up to the duplicated weight, so pin f_acc by using an exact copy of
  // a column that the classifier already sees.
  const auto base = generate_synthetic({90, 3, 2, 1, 3, 1.0, 1.0, 4.0}, 2);
  const std::size_t src = base.source_of_redundant.at(0);
  const std::size_t copy = base.redundant.at(0);
  const std::size_t other = base.informative[0] == src ? base.informative[1] : base.informative[0];
  const auto without = FeatureSubset::from_indices(3, {src, other});
  const auto with = FeatureSubset::from_indices(3, {src, other, copy});
  const FitnessEvaluator ev(base.features, base.labels, ClassifierSpec::make(ClassifierKind::logreg), 5, 0.7, 1);
  const auto w = FitnessWeights::initial();
  const auto b0 = ev.evaluate(without, w, 1.0);
  const auto b1 = ev.evaluate(with, w, 1.0);
  CHECK(b1.f_red > b0.f_red);
  CHECK(b1.f_comp > b0.f_comp);
  if (b1.f_acc <= b0.f_acc) CHECK(b1.total < b0.total);
}

TEST_CASE("run_adfsa") {
  const auto data = small_data(2);

  SUBCASE("single generation returns the best of the initial population") {
    GAConfig cfg = small_config(5);
    cfg.n_generations = 1;
    cfg.population_size = 4;
    const auto r = run_adfsa(data.features, data.labels, cfg);
    REQUIRE(r.trace.size() == 1);
    const auto pop = init_population(12, cfg);
    const FitnessEvaluator ev(data.features, data.labels, cfg.evaluator, cfg.k_folds, 0.7, cfg.seed);
    EvaluationHistory h;
    const auto eval = evaluate_generation(pop, ev, FitnessWeights::initial(), h, 1, cfg);
    const auto top = rank_population(pop, eval.fitness).front();
    CHECK(r.best_subset == pop[top]);
    CHECK(r.best_breakdown.total == eval.fitness[top]);
  }

  SUBCASE("deterministic, constant population size") {
    const auto cfg = small_config(7);
    const auto a = run_adfsa(data.features, data.labels, cfg);
    const auto b = run_adfsa(data.features, data.labels, cfg);
    CHECK(a.best_subset == b.best_subset);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
      CHECK(a.trace[i].best_total == b.trace[i].best_total);
      CHECK(a.trace[i].mean_total == b.trace[i].mean_total);
    }
    CHECK(a.final_population.size() == static_cast<std::size_t>(cfg.population_size));
    for (const auto& s : a.final_population) CHECK(s.count() >= 1);
    CHECK(a.total_evaluations == 6u * 12u);
    CHECK(a.repeated_evaluations == a.total_evaluations - a.history_size);
  }

  SUBCASE("cache is invisible") {
    auto cfg = small_config(8);
    const auto a = run_adfsa(data.features, data.labels, cfg);
    cfg.cache_accuracy = false;
    const auto b = run_adfsa(data.features, data.labels, cfg);
    CHECK(a.best_subset == b.best_subset);
    for (std::size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i].best_total == b.trace[i].best_total);
    CHECK(a.accuracy_fits <= b.accuracy_fits);
  }

  SUBCASE("thread count does not change results") {
    auto cfg = small_config(9);
    cfg.threads = 1;
    const auto a = run_adfsa(data.features, data.labels, cfg);
    cfg.threads = 4;
    const auto b = run_adfsa(data.features, data.labels, cfg);
    CHECK(a.best_subset == b.best_subset);
    for (std::size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i].best_total == b.trace[i].best_total);
  }

  SUBCASE("frozen weights and fixed uniqueness give a non-decreasing best trace") {
    auto cfg = small_config(10);
    cfg.weight_mode = WeightMode::fixed;
    cfg.fix_uniqueness = true;
    cfg.n_generations = 10;
    const auto r = run_adfsa(data.features, data.labels, cfg);
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].best_total >= r.trace[i - 1].best_total);
    CHECK(r.best_breakdown.total == r.trace.back().best_total);
  }

  SUBCASE("linear schedule ends at the final weights") {
    auto cfg = small_config(11);
    cfg.weight_mode = WeightMode::linear_schedule;
    const auto r = run_adfsa(data.features, data.labels, cfg);
    CHECK(r.final_weights.alpha == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.final_weights.delta == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(r.trace.front().best.weights_used == schedule_weights(1, cfg.n_generations));
  }

  SUBCASE("stagnation respects caps") {
    auto cfg = small_config(12);
    cfg.n_generations = 30;
    cfg.population_size = 6;
    const auto r = run_adfsa(data.features, data.labels, cfg);
    for (const auto& rec : r.trace) {
      CHECK(rec.best.weights_used.alpha <= 1.0);
      CHECK(rec.best.weights_used.beta >= 0.1);
      CHECK(rec.mutation_rate <= 0.2);
    }
  }

  SUBCASE("ablation zeroes the weights of disabled terms") {
    auto cfg = small_config(13);
    cfg.ablation = {false, false};
    const auto r = run_adfsa(data.features, data.labels, cfg);
    for (const auto& rec : r.trace) {
      CHECK(rec.best.weights_used.gamma == 0.0);
      CHECK(rec.best.weights_used.delta == 0.0);
    }
  }

  SUBCASE("config validation") {
    auto cfg = small_config(1);
    cfg.population_size = 5;
    CHECK_THROWS_AS(run_adfsa(data.features, data.labels, cfg), std::invalid_argument);
    cfg = small_config(1);
    cfg.elitism_count = 6;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_config(1);
    cfg.mutation_rate = 0.3;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
}

TEST_CASE("brute_force_best") {
  SUBCASE("informative feature beats noise") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<std::vector<double>> rows;
    LabelVector y;
    y.n_classes = 2;
    for (int i = 0; i < 60; ++i) {
      const int c = i % 2;
      rows.push_back({(c ? 4.0 : -4.0) + z(rng), z(rng)});
      y.labels.push_back(c);
    }
    const auto x = FeatureMatrix::from_rows(rows);
    const auto r = brute_force_best(x, y, FitnessWeights::initial(), ClassifierSpec::make_knn(3), 5, 0.7, 1);
    CHECK(r.best_subset.to_string() == "10");
    CHECK(r.totals.size() == 3);
  }
  SUBCASE("agrees with an independent enumeration") {
    const auto data = generate_synthetic({80, 4, 2, 1, 2, 1.0, 0.9, 2.0}, 6);
    const auto spec = ClassifierSpec::make_knn(3);
    const auto w = FitnessWeights::initial();
    const auto r = brute_force_best(data.features, data.labels, w, spec, 5, 0.7, 2);
    const EvaluationHistory empty;
    double best = -1e9;
    for (unsigned mask = 1; mask < 16; ++mask) {
      FeatureSubset s(4);
      for (std::size_t i = 0; i < 4; ++i) s.set(i, (mask >> i) & 1u);
      const double t = ensemble_fitness(data.features, data.labels, s, w, empty, spec, 5, 0.7, 2).total;
      CHECK(t == r.totals[mask - 1]);
      best = std::max(best, t);
    }
    CHECK(r.best_breakdown.total == best);
  }
  SUBCASE("too many features") {
    const auto data = generate_synthetic({40, 21, 2, 0, 2, 1.0, 0.9, 2.0}, 1);
    CHECK_THROWS_AS(brute_force_best(data.features, data.labels, FitnessWeights::initial(),
                                     ClassifierSpec::make_knn(3), 5, 0.7, 1),
                    std::invalid_argument);
  }
}

}  // TEST_SUITE
