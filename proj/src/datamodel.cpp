#include "adfsa/datamodel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "adfsa/errors.hpp"

namespace adfsa {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (ch != '\r') {
      cell.push_back(ch);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool parse_finite(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("missing header row: " + path.string());
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError("ragged row at line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " cells, found " +
                      std::to_string(cells.size()));
    }
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw DataError("no data rows: " + path.string());
  return rows;
}

LabelVector encode_labels(const std::vector<std::string>& raw, LabelMapping& mapping) {
  std::unordered_map<std::string, int> ids;
  LabelVector y;
  y.labels.reserve(raw.size());
  for (const auto& r : raw) {
    const std::string key = trim(r);
    auto [it, inserted] = ids.emplace(key, static_cast<int>(mapping.names.size()));
    if (inserted) mapping.names.push_back(key);
    y.labels.push_back(it->second);
  }
  y.n_classes = static_cast<int>(mapping.names.size());
  y.validate();
  return y;
}

}  // namespace

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {
  if (rows == 0 || cols == 0) throw DataError("feature matrix needs at least one row and column");
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                             std::vector<std::string> names)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows == 0 || cols == 0) throw DataError("feature matrix needs at least one row and column");
  if (values_.size() != rows * cols) throw DataError("feature matrix value count mismatch");
  for (double v : values_) {
    if (!std::isfinite(v)) throw DataError("feature matrix contains a non-finite value");
  }
  set_feature_names(std::move(names));
}

FeatureMatrix FeatureMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) throw DataError("feature matrix needs at least one row and column");
  const std::size_t cols = rows.front().size();
  std::vector<double> values;
  values.reserve(rows.size() * cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw DataError("ragged row " + std::to_string(r));
    values.insert(values.end(), rows[r].begin(), rows[r].end());
  }
  return FeatureMatrix(rows.size(), cols, std::move(values));
}

std::vector<double> FeatureMatrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = values_[r * cols_ + c];
  return out;
}

void FeatureMatrix::set_feature_names(std::vector<std::string> names) {
  if (!names.empty() && names.size() != cols_) throw DataError("feature name count mismatch");
  names_ = std::move(names);
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
  std::vector<double> values;
  values.reserve(rows.size() * cols_);
  for (std::size_t r : rows) {
    const auto src = row(r);
    values.insert(values.end(), src.begin(), src.end());
  }
  FeatureMatrix out;
  out.rows_ = rows.size();
  out.cols_ = cols_;
  out.values_ = std::move(values);
  out.names_ = names_;
  return out;
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::size_t> cols) const {
  FeatureMatrix out;
  out.rows_ = rows_;
  out.cols_ = cols.size();
  out.values_.resize(rows_ * cols.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    const double* src = values_.data() + r * cols_;
    double* dst = out.values_.data() + r * cols.size();
    for (std::size_t j = 0; j < cols.size(); ++j) dst[j] = src[cols[j]];
  }
  if (!names_.empty()) {
    for (std::size_t c : cols) out.names_.push_back(names_[c]);
  }
  return out;
}

std::vector<std::size_t> LabelVector::class_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(n_classes, 0)), 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

LabelVector LabelVector::select(std::span<const std::size_t> rows) const {
  LabelVector out;
  out.n_classes = n_classes;
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) out.labels.push_back(labels[r]);
  return out;
}

void LabelVector::validate() const {
  if (n_classes <= 0) throw DataError("label vector needs at least one class");
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
  for (int l : labels) {
    if (l < 0 || l >= n_classes) throw DataError("class id " + std::to_string(l) + " out of range");
    ++counts[static_cast<std::size_t>(l)];
  }
  for (int c = 0; c < n_classes; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) {
      throw DataError("class " + std::to_string(c) + " has zero samples");
    }
  }
}

Dataset load_features_csv(const std::filesystem::path& path, const std::string& label_column) {
  std::vector<std::string> header;
  const auto rows = read_csv(path, header);

  std::size_t label_idx = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == label_column) {
      label_idx = i;
      break;
    }
  }
  if (label_idx == header.size()) {
    std::size_t idx = 0;
    auto [ptr, ec] = std::from_chars(label_column.data(), label_column.data() + label_column.size(), idx);
    if (ec == std::errc() && ptr == label_column.data() + label_column.size() && idx < header.size()) {
      label_idx = idx;
    } else {
      throw DataError("label column '" + label_column + "' not found in " + path.string());
    }
  }
  if (header.size() < 2) throw DataError("no feature columns besides the label");

  const std::size_t n = rows.size();
  const std::size_t d = header.size() - 1;
  std::vector<double> values;
  values.reserve(n * d);
  std::vector<std::string> raw_labels;
  raw_labels.reserve(n);
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_idx) names.push_back(header[c]);
  }
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == label_idx) {
        raw_labels.push_back(rows[r][c]);
        continue;
      }
      double v = 0.0;
      if (!parse_finite(rows[r][c], v)) {
        throw DataError("non-numeric cell at row " + std::to_string(r + 1) + ", column " +
                        std::to_string(c + 1) + " ('" + header[c] + "')");
      }
      values.push_back(v);
    }
  }
  Dataset ds;
  ds.features = FeatureMatrix(n, d, std::move(values), std::move(names));
  ds.labels = encode_labels(raw_labels, ds.mapping);
  return ds;
}

Dataset load_split_csv(const std::filesystem::path& features_path,
                       const std::filesystem::path& labels_path) {
  std::vector<std::string> header;
  const auto rows = read_csv(features_path, header);
  std::vector<std::string> label_header;
  const auto label_rows = read_csv(labels_path, label_header);
  if (label_header.size() != 1) throw DataError("labels file must have exactly one column");
  if (label_rows.size() != rows.size()) {
    throw DataError("labels file has " + std::to_string(label_rows.size()) + " rows, features file has " +
                    std::to_string(rows.size()));
  }
  const std::size_t n = rows.size();
  const std::size_t d = header.size();
  std::vector<double> values;
  values.reserve(n * d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      double v = 0.0;
      if (!parse_finite(rows[r][c], v)) {
        throw DataError("non-numeric cell at row " + std::to_string(r + 1) + ", column " +
                        std::to_string(c + 1) + " ('" + header[c] + "')");
      }
      values.push_back(v);
    }
  }
  std::vector<std::string> raw_labels;
  raw_labels.reserve(n);
  for (const auto& lr : label_rows) raw_labels.push_back(lr.front());

  Dataset ds;
  ds.features = FeatureMatrix(n, d, std::move(values), header);
  ds.labels = encode_labels(raw_labels, ds.mapping);
  return ds;
}

std::string format_double(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path.string());
  return out;
}

}  // namespace

void write_features_csv(const std::filesystem::path& path, const FeatureMatrix& x) {
  auto out = open_for_write(path);
  for (std::size_t c = 0; c < x.cols(); ++c) {
    if (c) out << ',';
    out << (x.feature_names().empty() ? "f" + std::to_string(c) : x.feature_names()[c]);
  }
  out << '\n';
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      if (c) out << ',';
      out << format_double(x(r, c));
    }
    out << '\n';
  }
}

void write_labels_csv(const std::filesystem::path& path, const LabelVector& y,
                      const LabelMapping& mapping) {
  auto out = open_for_write(path);
  out << "label\n";
  for (int l : y.labels) {
    out << (mapping.names.empty() ? std::to_string(l) : mapping.names[static_cast<std::size_t>(l)]) << '\n';
  }
}

void write_label_mapping_csv(const std::filesystem::path& path, const LabelMapping& mapping) {
  auto out = open_for_write(path);
  out << "label_string,class_id\n";
  for (std::size_t i = 0; i < mapping.names.size(); ++i) out << mapping.names[i] << ',' << i << '\n';
}

TrainTestSplit train_test_split(const FeatureMatrix& x, const LabelVector& y, double test_fraction,
                                std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test_fraction must lie in (0, 1)");
  }
  if (x.rows() != y.size()) throw DataError("feature and label lengths differ");
  y.validate();
  const auto counts = y.class_counts();
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] < 2) throw DataError("class " + std::to_string(c) + " has fewer than 2 samples");
  }

  // Largest-remainder apportionment of the global test size across classes.
  const std::size_t n = y.size();
  const auto total_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
  std::vector<std::size_t> quota(counts.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    const double exact = static_cast<double>(counts[c]) * test_fraction;
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    assigned += quota[c];
    remainders.emplace_back(exact - std::floor(exact), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < total_test && i < remainders.size(); ++i, ++assigned) {
    ++quota[remainders[i].second];
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    quota[c] = std::clamp<std::size_t>(quota[c], 1, counts[c] - 1);
  }

  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> by_class(counts.size());
  for (std::size_t i = 0; i < n; ++i) by_class[static_cast<std::size_t>(y[i])].push_back(i);

  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    std::shuffle(members.begin(), members.end(), rng);
    test_idx.insert(test_idx.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(quota[c]));
    train_idx.insert(train_idx.end(), members.begin() + static_cast<std::ptrdiff_t>(quota[c]), members.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  TrainTestSplit split;
  split.train = {x.select_rows(train_idx), y.select(train_idx), train_idx};
  split.test = {x.select_rows(test_idx), y.select(test_idx), test_idx};
  return split;
}

std::vector<std::size_t> FoldAssignment::train_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of_sample.size(); ++i) {
    if (fold_of_sample[i] != fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldAssignment::test_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of_sample.size(); ++i) {
    if (fold_of_sample[i] == fold) out.push_back(i);
  }
  return out;
}

FoldAssignment stratified_kfold(const LabelVector& y, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("k must be at least 2");
  y.validate();
  const auto counts = y.class_counts();
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] < static_cast<std::size_t>(k)) {
      throw DataError("class " + std::to_string(c) + " has " + std::to_string(counts[c]) +
                      " samples, fewer than k=" + std::to_string(k));
    }
  }
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> by_class(counts.size());
  for (std::size_t i = 0; i < y.size(); ++i) by_class[static_cast<std::size_t>(y[i])].push_back(i);

  FoldAssignment folds;
  folds.k = k;
  folds.fold_of_sample.assign(y.size(), 0);
  // Dealing each class round-robin, continuing where the previous class
  // stopped, keeps both per-class and total fold sizes within one.
  std::size_t offset = 0;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t j = 0; j < members.size(); ++j) {
      folds.fold_of_sample[members[j]] = static_cast<int>((offset + j) % static_cast<std::size_t>(k));
    }
    offset += members.size();
  }
  return folds;
}

Standardizer Standardizer::fit(const FeatureMatrix& train) {
  if (train.empty()) throw DataError("cannot standardize an empty matrix");
  const std::size_t n = train.rows();
  const std::size_t d = train.cols();
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.std.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) s.mean[c] += train(r, c);
  }
  for (double& m : s.mean) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double dv = train(r, c) - s.mean[c];
      s.std[c] += dv * dv;
    }
  }
  for (std::size_t c = 0; c < d; ++c) {
    const double sd = std::sqrt(s.std[c] / static_cast<double>(n));
    // Relative cutoff so rounding residue on a constant column counts as zero.
    if (sd <= 1e-12 * std::max(1.0, std::abs(s.mean[c]))) {
      s.mean[c] = train(0, c);  // exact, so the column maps to exact zeros
      s.std[c] = 1.0;
    } else {
      s.std[c] = sd;
    }
  }
  return s;
}

FeatureMatrix Standardizer::apply(const FeatureMatrix& x) const {
  if (x.cols() != mean.size()) throw DataError("standardizer width mismatch");
  std::vector<double> values(x.values());
  const std::size_t d = x.cols();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t c = i % d;
    values[i] = (values[i] - mean[c]) / std[c];
  }
  return FeatureMatrix(x.rows(), d, std::move(values), x.feature_names());
}

FeatureMatrix Standardizer::invert(const FeatureMatrix& z) const {
  if (z.cols() != mean.size()) throw DataError("standardizer width mismatch");
  std::vector<double> values(z.values());
  const std::size_t d = z.cols();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t c = i % d;
    values[i] = values[i] * std[c] + mean[c];
  }
  return FeatureMatrix(z.rows(), d, std::move(values), z.feature_names());
}

Standardized standardize(const FeatureMatrix& train, std::span<const FeatureMatrix> others) {
  Standardized out;
  out.transform = Standardizer::fit(train);
  out.train = out.transform.apply(train);
  for (const auto& m : others) out.others.push_back(out.transform.apply(m));
  return out;
}

void SyntheticSpec::validate() const {
  if (n_samples == 0 || n_features == 0) throw std::invalid_argument("synthetic spec needs samples and features");
  if (n_informative == 0) throw std::invalid_argument("synthetic spec needs at least one informative feature");
  if (n_informative + n_redundant > n_features) {
    throw std::invalid_argument("informative + redundant (" + std::to_string(n_informative + n_redundant) +
                                ") must not exceed features (" + std::to_string(n_features) + ")");
  }
  if (n_classes < 2) throw std::invalid_argument("synthetic spec needs at least 2 classes");
  if (n_samples < static_cast<std::size_t>(n_classes)) {
    throw std::invalid_argument("synthetic spec needs at least one sample per class");
  }
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw std::invalid_argument("noise_std must be >= 0");
  if (!(redundancy_rho > 0.0 && redundancy_rho <= 1.0)) {
    throw std::invalid_argument("redundancy_rho must lie in (0, 1]");
  }
  if (!(class_separation >= 0.0) || !std::isfinite(class_separation)) {
    throw std::invalid_argument("class_separation must be >= 0");
  }
}

SyntheticData generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const std::size_t n = spec.n_samples;
  const std::size_t d = spec.n_features;
  const auto n_classes = static_cast<std::size_t>(spec.n_classes);

  std::vector<std::size_t> columns(d);
  std::iota(columns.begin(), columns.end(), std::size_t{0});
  std::shuffle(columns.begin(), columns.end(), rng);

  SyntheticData out;
  out.informative.assign(columns.begin(), columns.begin() + static_cast<std::ptrdiff_t>(spec.n_informative));
  out.redundant.assign(columns.begin() + static_cast<std::ptrdiff_t>(spec.n_informative),
                       columns.begin() + static_cast<std::ptrdiff_t>(spec.n_informative + spec.n_redundant));
  std::sort(out.informative.begin(), out.informative.end());
  std::sort(out.redundant.begin(), out.redundant.end());

  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % n_classes);
  std::shuffle(labels.begin(), labels.end(), rng);

  // Per-class mean offsets for every informative column.
  std::vector<double> class_means(n_classes * spec.n_informative);
  for (double& m : class_means) m = spec.class_separation * normal(rng);

  std::vector<double> values(n * d, 0.0);
  for (std::size_t j = 0; j < spec.n_informative; ++j) {
    const std::size_t col = out.informative[j];
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(labels[i]);
      values[i * d + col] = class_means[c * spec.n_informative + j] + spec.noise_std * normal(rng);
    }
  }

  const double rho = spec.redundancy_rho;
  const double mix = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  for (std::size_t r = 0; r < out.redundant.size(); ++r) {
    const std::size_t col = out.redundant[r];
    const std::size_t src = out.informative[r % spec.n_informative];
    out.source_of_redundant.push_back(src);
    double mean = 0.0;
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += values[i * d + src];
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) var += (values[i * d + src] - mean) * (values[i * d + src] - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const double z = normal(rng);
      values[i * d + col] = mix == 0.0 ? values[i * d + src] : rho * values[i * d + src] + mix * sd * z;
    }
  }

  std::vector<bool> used(d, false);
  for (std::size_t c : out.informative) used[c] = true;
  for (std::size_t c : out.redundant) used[c] = true;
  for (std::size_t col = 0; col < d; ++col) {
    if (used[col]) continue;
    for (std::size_t i = 0; i < n; ++i) values[i * d + col] = normal(rng);
  }

  std::vector<std::string> names;
  names.reserve(d);
  for (std::size_t c = 0; c < d; ++c) names.push_back("f" + std::to_string(c));
  out.features = FeatureMatrix(n, d, std::move(values), std::move(names));
  out.labels.labels = std::move(labels);
  out.labels.n_classes = spec.n_classes;
  out.labels.validate();
  return out;
}

}  // namespace adfsa
