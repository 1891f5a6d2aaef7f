#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "adfsa/baselines.hpp"
#include "adfsa/datamodel.hpp"
#include "adfsa/evolve.hpp"
#include "json.hpp"

namespace adfsa {

enum class Method { none, pca, rfe, adfsa };

std::string to_string(Method m);
Method parse_method(const std::string& name);

/// Named GA variants for the ablation table.
struct AblationVariant {
  std::string name;
  AblationFlags flags;
};

/// "full", "no_complexity", "no_uniqueness", "no_uniq_no_complexity".
AblationVariant parse_ablation(const std::string& name);

struct DataSource {
  // Either a CSV source (features_csv set) or a synthetic one.
  std::filesystem::path features_csv;
  std::filesystem::path labels_csv;  // empty: labels live in features_csv
  std::string label_column = "label";
  SyntheticSpec synthetic;

  bool is_csv() const { return !features_csv.empty(); }
};

struct ExperimentConfig {
  DataSource data;
  bool standardize = true;
  std::vector<Method> methods{Method::none, Method::pca, Method::rfe, Method::adfsa};
  std::vector<ClassifierKind> classifiers{ClassifierKind::knn, ClassifierKind::logreg,
                                          ClassifierKind::linear_svm};
  ClassifierSpec knn = ClassifierSpec::make(ClassifierKind::knn);
  ClassifierSpec logreg = ClassifierSpec::make(ClassifierKind::logreg);
  ClassifierSpec linear_svm = ClassifierSpec::make(ClassifierKind::linear_svm);
  std::size_t pca_components = 50;
  std::size_t rfe_features = 50;
  std::size_t rfe_step = kRfeAutoStep;
  GAConfig adfsa;
  /// Extra ADFSA runs with different ablation flags; empty disables the table.
  std::vector<std::string> ablations;
  double test_fraction = 0.2;
  int k_folds = 5;
  int timing_repeats = 5;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "results";

  const ClassifierSpec& classifier(ClassifierKind kind) const;
  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Unknown keys and wrong types raise ConfigError naming the key; syntax
/// errors carry the line and column.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& c);

Dataset load_dataset(const DataSource& source, std::uint64_t seed);

nlohmann::json to_json(const FitnessBreakdown& b);
nlohmann::json to_json(const GAResult& r, const GAConfig& config);

/// generation, best_total, mean_total, f_acc, f_red, f_uni, f_comp, alpha,
/// beta, gamma, delta, popcount_best
void write_trace_csv(const std::filesystem::path& path, const std::vector<GenerationRecord>& trace);

struct ReportRow {
  std::string classifier;
  std::string setting;
  double cv_accuracy = 0.0;    // percent
  double test_accuracy = 0.0;  // percent
  std::size_t n_features = 0;
  double memory_kb = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  // Timing, kept out of the deterministic files.
  double inference_ms = 0.0;
  double train_ms = 0.0;
};

struct AblationRow {
  std::string variant;
  std::size_t n_features = 0;
  double cv_accuracy = 0.0;  // percent, GA evaluator on the training split
  double best_total = 0.0;
  std::size_t history_size = 0;
  std::size_t repeated_evaluations = 0;
  std::size_t stagnation_events = 0;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;
  std::vector<AblationRow> ablation;
};

/// 100 * (value - baseline) / baseline; NaN when the baseline is 0.
double percent_change(double value, double baseline);

/// Mean distance between class centroids minus mean distance of samples to
/// their own centroid.
double centroid_separation(const FeatureMatrix& x, const LabelVector& y);

struct SynthOptions {
  SyntheticSpec spec;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
};

/// features.csv, labels.csv, ground_truth.json.
void cmd_synth(const SynthOptions& options);

/// Runs one selection method on the whole (optionally standardized) data set.
/// Writes selection.json, and trace.csv for adfsa or pca_model.csv for pca.
void cmd_select(const ExperimentConfig& config, Method method);

ExperimentReport cmd_bench(const ExperimentConfig& config);

/// Reads run.json and selection files from `result_dir`; writes
/// embedding.csv and summary.md there.
void cmd_report(const std::filesystem::path& result_dir);

}  // namespace adfsa
