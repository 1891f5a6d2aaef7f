#include <algorithm>
#include <numeric>
#include <random>

#include "adfsa/classifiers.hpp"
#include "adfsa/errors.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace adfsa;
using adfsa::testing::blobs;

namespace {

// Exhaustive check: fraction of rows whose prediction equals the label.
double training_accuracy_by_enumeration(const TrainedModel& m, const Dataset& d) {
  const auto pred = predict(m, d.features);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) ok += pred[i] == d.labels[i];
  return static_cast<double>(ok) / static_cast<double>(pred.size());
}

}  // namespace

TEST_SUITE("classifiers") {

TEST_CASE("linear models separate blobs") {
  // Centers 6 apart with unit spread: margin of at least 2 sigma on each side.
  const auto d = blobs(40, 6.0, 11);
  for (auto kind : {ClassifierKind::logreg, ClassifierKind::linear_svm}) {
    CAPTURE(to_string(kind));
    const auto m = fit(ClassifierSpec::make(kind), d.features, d.labels);
    CHECK(training_accuracy_by_enumeration(m, d) >= 0.99);
    CHECK(m.training_accuracy == training_accuracy_by_enumeration(m, d));
    CHECK(m.weights.size() == 2 * 2);
    CHECK(m.bias.size() == 2);
  }
}

TEST_CASE("1-NN fits distinct rows exactly") {
  const auto d = blobs(60, 1.0, 3, 3);
  const auto m = fit(ClassifierSpec::make_knn(1), d.features, d.labels);
  CHECK(m.training_accuracy == 1.0);
}

TEST_CASE("knn voting and ties") {
  SUBCASE("majority") {
    // Three nearest to 0.2 carry labels [2, 2, 5].
    const auto train = FeatureMatrix::from_rows({{0.0}, {0.4}, {0.5}, {50.0}, {60.0}, {70.0}});
    const auto m = fit(ClassifierSpec::make_knn(3), train, LabelVector{{2, 2, 5, 0, 1, 3}, 6});
    CHECK(predict(m, FeatureMatrix::from_rows({{0.2}})).at(0) == 2);
  }
  SUBCASE("even split goes to the smaller class id") {
    const auto train = FeatureMatrix::from_rows({{0.0}, {2.0}, {100.0}, {101.0}});
    LabelVector y{{3, 1, 0, 2}, 4};
    const auto m = fit(ClassifierSpec::make_knn(2), train, y);
    CHECK(predict(m, FeatureMatrix::from_rows({{1.0}})).at(0) == 1);
  }
}

TEST_CASE("linear argmax and ties") {
  TrainedModel m;
  m.spec = ClassifierSpec::make(ClassifierKind::logreg);
  m.n_features = 2;
  m.n_classes = 3;
  m.weights = {1.0, 0.0, 0.0, 1.0, -1.0, -1.0};
  m.bias = {0.0, 0.0, 0.0};
  CHECK(predict(m, FeatureMatrix::from_rows({{2.0, 1.0}})).at(0) == 0);
  CHECK(predict(m, FeatureMatrix::from_rows({{1.0, 1.0}})).at(0) == 0);  // tie 0 vs 1
  CHECK(predict(m, FeatureMatrix::from_rows({{-1.0, -1.0}})).at(0) == 2);

  SUBCASE("property: adding a constant to every class score keeps the argmax") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> z(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
      TrainedModel a = m;
      for (double& w : a.weights) w = z(rng);
      for (double& b : a.bias) b = z(rng);
      TrainedModel shifted = a;
      const double shift = 10.0 * z(rng);
      for (double& b : shifted.bias) b += shift;
      const auto q = FeatureMatrix::from_rows({{z(rng), z(rng)}, {z(rng), z(rng)}});
      CHECK(predict(a, q) == predict(shifted, q));
    }
  }
}

TEST_CASE("fit and predict errors") {
  const auto x = FeatureMatrix::from_rows({{0.0}, {1.0}, {2.0}});
  CHECK_THROWS_AS(fit(ClassifierSpec::make(ClassifierKind::logreg), x, LabelVector{{0, 0, 0}, 1}), DataError);
  CHECK_THROWS_AS(fit(ClassifierSpec::make_knn(5), x, LabelVector{{0, 1, 0}, 2}), DataError);
  const auto m = fit(ClassifierSpec::make_knn(1), x, LabelVector{{0, 1, 0}, 2});
  CHECK_THROWS_AS(predict(m, FeatureMatrix::from_rows({{0.0, 1.0}})), DataError);
  auto bad = ClassifierSpec::make(ClassifierKind::linear_svm);
  bad.svm.lambda = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("knn is invariant to training row order") {
  const auto d = blobs(50, 1.5, 21, 3);
  const auto queries = blobs(30, 1.5, 22, 3).features;
  const auto spec = ClassifierSpec::make_knn(5);
  const auto base = predict(fit(spec, d.features, d.labels), queries);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 10; ++t) {
    std::vector<std::size_t> perm(d.labels.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto m = fit(spec, d.features.select_rows(perm), d.labels.select(perm));
    CHECK(predict(m, queries) == base);
  }
}

TEST_CASE("cross_val_accuracy") {
  SUBCASE("separable blobs with 1-NN score 1") {
    const auto d = blobs(100, 30.0, 5);
    const FeatureSubset all(2, true);
    CHECK(cross_val_accuracy(d.features, d.labels, all, ClassifierSpec::make_knn(1), 5, 1) == 1.0);
  }
  SUBCASE("permuted labels sit near chance") {
    const auto d = blobs(200, 30.0, 6);
    const FeatureSubset all(2, true);
    double sum = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      LabelVector y = d.labels;
      std::mt19937_64 rng(100 + s);
      std::shuffle(y.labels.begin(), y.labels.end(), rng);
      const double acc = cross_val_accuracy(d.features, y, all, ClassifierSpec::make_knn(5), 5, s);
      CHECK(acc >= 0.0);
      CHECK(acc <= 1.0);
      sum += acc;
    }
    CHECK(std::abs(sum / 20.0 - 0.5) <= 0.15);
  }
  SUBCASE("a pure-noise column does no better than the full set") {
    auto d = blobs(100, 8.0, 9);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < d.features.rows(); ++r) rows.push_back({d.features(r, 0), d.features(r, 1), z(rng)});
    const auto x = FeatureMatrix::from_rows(rows);
    const auto spec = ClassifierSpec::make(ClassifierKind::logreg);
    const double full = cross_val_accuracy(x, d.labels, FeatureSubset(3, true), spec, 5, 1);
    const double noise = cross_val_accuracy(x, d.labels, FeatureSubset::from_indices(3, {2}), spec, 5, 1);
    CHECK(noise <= full);
  }
  SUBCASE("repeatable and rejects empty subsets") {
    const auto d = blobs(60, 2.0, 7, 3);
    const FeatureSubset all(2, true);
    const auto spec = ClassifierSpec::make(ClassifierKind::linear_svm);
    CHECK(cross_val_accuracy(d.features, d.labels, all, spec, 5, 3) ==
          cross_val_accuracy(d.features, d.labels, all, spec, 5, 3));
    CHECK_THROWS_AS(cross_val_accuracy(d.features, d.labels, FeatureSubset(2), spec, 5, 3), DataError);
  }
}

TEST_CASE("subset restriction equals physical slicing") {
  const auto data = generate_synthetic({90, 10, 3, 2, 3, 1.0, 0.9, 2.0}, 31);
  const auto subset = FeatureSubset::from_indices(10, {1, 4, 7});
  const auto sliced = data.features.select_columns(subset.indices());
  const auto spec = ClassifierSpec::make_knn(3);
  const auto folds = stratified_kfold(data.labels, 5, 2);
  CHECK(cross_val_accuracy(data.features, data.labels, subset, spec, folds) ==
        cross_val_accuracy(sliced, data.labels, FeatureSubset(3, true), spec, folds));
}

TEST_CASE("zero column keeps zero weight") {
  std::vector<std::vector<double>> rows;
  const auto d = blobs(40, 4.0, 8);
  for (std::size_t r = 0; r < d.features.rows(); ++r) rows.push_back({d.features(r, 0), d.features(r, 1), 0.0});
  const auto x = FeatureMatrix::from_rows(rows);
  for (auto kind : {ClassifierKind::logreg, ClassifierKind::linear_svm}) {
    const auto m = fit(ClassifierSpec::make(kind), x, d.labels);
    for (int c = 0; c < m.n_classes; ++c) CHECK(m.weight(c, 2) == 0.0);
  }
}

TEST_CASE("model files round trip") {
  const auto dir = adfsa::testing::scratch_dir("model_io");
  const auto d = blobs(30, 3.0, 2, 3);
  for (auto spec : {ClassifierSpec::make(ClassifierKind::linear_svm), ClassifierSpec::make_knn(3)}) {
    const auto m = fit(spec, d.features, d.labels);
    save_model(dir / "m.json", m);
    const auto back = load_model(dir / "m.json");
    CHECK(predict(back, d.features) == predict(m, d.features));
  }
  adfsa::testing::spit(dir / "bad.json", "{\"format\":\"other\"}");
  CHECK_THROWS_AS(load_model(dir / "bad.json"), DataError);
}

}  // TEST_SUITE
