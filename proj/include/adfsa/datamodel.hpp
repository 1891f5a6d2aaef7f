#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace adfsa {

/// Dense row-major table of finite reals, rows = samples, columns = features.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  /// Zero-filled matrix. Both dimensions must be >= 1.
  FeatureMatrix(std::size_t rows, std::size_t cols);
  /// Takes ownership of `values` (size rows*cols). Throws DataError on
  /// non-finite entries or a size mismatch.
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                std::vector<std::string> names = {});
  /// Builds from nested rows; throws DataError when ragged.
  static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::vector<double> column(std::size_t c) const;

  const std::vector<double>& values() const { return values_; }
  const std::vector<std::string>& feature_names() const { return names_; }
  void set_feature_names(std::vector<std::string> names);

  /// Copies the listed rows, in order.
  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
  /// Copies the listed columns, in order. Names follow the columns.
  FeatureMatrix select_columns(std::span<const std::size_t> cols) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
  std::vector<std::string> names_;
};

/// Class ids 0..n_classes-1 with every class present.
struct LabelVector {
  std::vector<int> labels;
  int n_classes = 0;

  std::size_t size() const { return labels.size(); }
  int operator[](std::size_t i) const { return labels[i]; }
  std::vector<std::size_t> class_counts() const;
  LabelVector select(std::span<const std::size_t> rows) const;
  /// Throws DataError unless every id is in range and every class occurs.
  void validate() const;
};

/// Ids are assigned by first appearance; `names[id]` is the source string.
struct LabelMapping {
  std::vector<std::string> names;
};

struct Dataset {
  FeatureMatrix features;
  LabelVector labels;
  LabelMapping mapping;
};

/// Reads a header-first CSV and pulls the label column out by name. A purely
/// numeric `label_column` that is not a header name is read as a 0-based index.
Dataset load_features_csv(const std::filesystem::path& path, const std::string& label_column);
/// Features and labels in separate files; the labels file has one column.
Dataset load_split_csv(const std::filesystem::path& features_path,
                       const std::filesystem::path& labels_path);

void write_features_csv(const std::filesystem::path& path, const FeatureMatrix& x);
void write_labels_csv(const std::filesystem::path& path, const LabelVector& y,
                      const LabelMapping& mapping);
/// Two columns: label_string, class_id.
void write_label_mapping_csv(const std::filesystem::path& path, const LabelMapping& mapping);

/// Shortest round-trip decimal form; locale independent.
std::string format_double(double v);

struct SplitPart {
  FeatureMatrix x;
  LabelVector y;
  std::vector<std::size_t> indices;  // rows of the source matrix
};

struct TrainTestSplit {
  SplitPart train;
  SplitPart test;
};

/// Stratified split. The total test size is round(n * test_fraction); classes
/// get their share by largest remainder so each is within 1 of its quota.
TrainTestSplit train_test_split(const FeatureMatrix& x, const LabelVector& y, double test_fraction,
                                std::uint64_t seed);

struct FoldAssignment {
  std::vector<int> fold_of_sample;
  int k = 0;

  std::vector<std::size_t> train_indices(int fold) const;
  std::vector<std::size_t> test_indices(int fold) const;
};

FoldAssignment stratified_kfold(const LabelVector& y, int k, std::uint64_t seed);

/// Column-wise z-score transform using the population standard deviation.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> std;  // 1 for zero-variance columns

  static Standardizer fit(const FeatureMatrix& train);
  FeatureMatrix apply(const FeatureMatrix& x) const;
  FeatureMatrix invert(const FeatureMatrix& z) const;
};

struct Standardized {
  Standardizer transform;
  FeatureMatrix train;
  std::vector<FeatureMatrix> others;
};

Standardized standardize(const FeatureMatrix& train, std::span<const FeatureMatrix> others = {});

struct SyntheticSpec {
  std::size_t n_samples = 400;
  std::size_t n_features = 128;
  std::size_t n_informative = 7;
  std::size_t n_redundant = 20;
  int n_classes = 11;
  double noise_std = 1.0;        // within-class spread of informative columns
  double redundancy_rho = 0.85;  // target |corr| of a redundant copy with its source
  double class_separation = 2.0; // scale of the per-class mean offsets

  void validate() const;
};

struct SyntheticData {
  FeatureMatrix features;
  LabelVector labels;
  std::vector<std::size_t> informative;  // sorted
  std::vector<std::size_t> redundant;    // sorted
  /// source_of_redundant[i] is the informative column copied into redundant[i].
  std::vector<std::size_t> source_of_redundant;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace adfsa
