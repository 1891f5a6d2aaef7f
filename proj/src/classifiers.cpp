#include "adfsa/classifiers.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "adfsa/errors.hpp"
#include "json.hpp"

namespace adfsa {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMatrix>;

ConstRowMap as_eigen(const FeatureMatrix& x) {
  return ConstRowMap(x.values().data(), static_cast<Eigen::Index>(x.rows()),
                     static_cast<Eigen::Index>(x.cols()));
}

int argmax_smallest_id(const double* scores, int n) {
  int best = 0;
  for (int c = 1; c < n; ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  return best;
}

void train_softmax(const LogRegParams& p, const FeatureMatrix& x, const LabelVector& y, TrainedModel& m) {
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto d = static_cast<Eigen::Index>(x.cols());
  const auto c = static_cast<Eigen::Index>(y.n_classes);
  const RowMatrixF X = as_eigen(x).cast<float>();
  RowMatrixF onehot = RowMatrixF::Zero(n, c);
  for (Eigen::Index i = 0; i < n; ++i) onehot(i, y.labels[static_cast<std::size_t>(i)]) = 1.0f;

  RowMatrixF W = RowMatrixF::Zero(c, d);
  Eigen::RowVectorXf b = Eigen::RowVectorXf::Zero(c);
  RowMatrixF S(n, c);
  RowMatrixF grad_w(c, d);
  const float inv_n = 1.0f / static_cast<float>(n);
  const auto lr = static_cast<float>(p.learning_rate);
  for (int epoch = 0; epoch < p.epochs; ++epoch) {
    S.noalias() = X * W.transpose();
    S.rowwise() += b;
    S.colwise() -= S.rowwise().maxCoeff();
    S = S.array().exp();
    S.array().colwise() /= S.rowwise().sum().array();
    S -= onehot;
    S *= inv_n;
    grad_w.noalias() = S.transpose() * X;
    grad_w += static_cast<float>(p.l2) * W;
    b -= lr * S.colwise().sum();
    W -= lr * grad_w;
  }
  const RowMatrix Wd = W.cast<double>();
  m.weights.assign(Wd.data(), Wd.data() + Wd.size());
  m.bias.assign(b.data(), b.data() + b.size());
}

void train_ovr_svm(const LinearSvmParams& p, const FeatureMatrix& x, const LabelVector& y, TrainedModel& m) {
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto d = static_cast<Eigen::Index>(x.cols());
  const auto c = static_cast<Eigen::Index>(y.n_classes);
  const RowMatrixF X = as_eigen(x).cast<float>();
  RowMatrixF sign = RowMatrixF::Constant(n, c, -1.0f);
  for (Eigen::Index i = 0; i < n; ++i) sign(i, y.labels[static_cast<std::size_t>(i)]) = 1.0f;

  RowMatrixF W = RowMatrixF::Zero(c, d);
  Eigen::RowVectorXf b = Eigen::RowVectorXf::Zero(c);
  RowMatrixF S(n, c);
  RowMatrixF grad_w(c, d);
  const RowMatrixF neg_sign_over_n = -sign / static_cast<float>(n);
  for (int epoch = 0; epoch < p.epochs; ++epoch) {
    S.noalias() = X * W.transpose();
    S.rowwise() += b;
    // Subgradient of the mean hinge loss: -y_i / n for every margin violator.
    S = ((sign.array() * S.array()) < 1.0f).select(neg_sign_over_n, 0.0f);
    const auto eta = static_cast<float>(p.learning_rate / (1.0 + p.learning_rate * p.lambda * epoch));
    grad_w.noalias() = S.transpose() * X;
    grad_w += static_cast<float>(p.lambda) * W;
    b -= eta * S.colwise().sum();
    W -= eta * grad_w;
  }
  const RowMatrix Wd = W.cast<double>();
  m.weights.assign(Wd.data(), Wd.data() + Wd.size());
  m.bias.assign(b.data(), b.data() + b.size());
}

struct Neighbor {
  double dist;
  int label;
  bool operator<(const Neighbor& o) const { return dist < o.dist || (dist == o.dist && label < o.label); }
};

std::vector<int> predict_knn(const TrainedModel& m, const FeatureMatrix& x) {
  const std::size_t n_train = m.train_x.rows();
  const std::size_t d = m.n_features;
  const auto k = static_cast<std::size_t>(m.spec.knn.k);
  std::vector<int> out(x.rows());
  std::vector<Neighbor> nb(n_train);
  std::vector<int> votes(static_cast<std::size_t>(m.n_classes));
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double* q = x.row(r).data();
    for (std::size_t t = 0; t < n_train; ++t) {
      const double* p = m.train_x.row(t).data();
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = q[j] - p[j];
        acc += diff * diff;
      }
      nb[t] = {acc, m.train_y[t]};
    }
    std::nth_element(nb.begin(), nb.begin() + static_cast<std::ptrdiff_t>(k - 1), nb.end());
    std::fill(votes.begin(), votes.end(), 0);
    // nth_element leaves the k smallest (by distance, then label) in front.
    for (std::size_t i = 0; i < k; ++i) ++votes[static_cast<std::size_t>(nb[i].label)];
    out[r] = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
  }
  return out;
}

void check_fit_inputs(const ClassifierSpec& spec, const FeatureMatrix& x, const LabelVector& y) {
  spec.validate();
  if (x.empty()) throw DataError("cannot fit on an empty matrix");
  if (x.rows() != y.size()) throw DataError("feature and label lengths differ");
  if (y.n_classes < 2) throw DataError("fit needs at least two classes");
  int seen_first = y.labels.front();
  bool multi = false;
  for (int l : y.labels) {
    if (l < 0 || l >= y.n_classes) throw DataError("class id out of range");
    if (l != seen_first) multi = true;
  }
  if (!multi) throw DataError("fit needs samples from at least two classes");
  if (spec.kind == ClassifierKind::knn && static_cast<std::size_t>(spec.knn.k) > x.rows()) {
    throw DataError("knn k=" + std::to_string(spec.knn.k) + " exceeds training size " +
                    std::to_string(x.rows()));
  }
}

}  // namespace

std::string to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::knn: return "knn";
    case ClassifierKind::logreg: return "logreg";
    case ClassifierKind::linear_svm: return "linear_svm";
  }
  return "unknown";
}

ClassifierKind parse_classifier_kind(const std::string& name) {
  if (name == "knn") return ClassifierKind::knn;
  if (name == "logreg") return ClassifierKind::logreg;
  if (name == "linear_svm" || name == "svm") return ClassifierKind::linear_svm;
  throw std::invalid_argument("unknown classifier '" + name + "' (expected knn, logreg or linear_svm)");
}

void ClassifierSpec::validate() const {
  switch (kind) {
    case ClassifierKind::knn:
      if (knn.k < 1) throw std::invalid_argument("knn.k must be positive");
      break;
    case ClassifierKind::logreg:
      if (!(logreg.learning_rate > 0) || logreg.epochs < 1 || !(logreg.l2 >= 0)) {
        throw std::invalid_argument("logreg parameters must be positive");
      }
      break;
    case ClassifierKind::linear_svm:
      if (!(svm.lambda > 0) || svm.epochs < 1 || !(svm.learning_rate > 0)) {
        throw std::invalid_argument("linear_svm parameters must be positive");
      }
      break;
  }
}

TrainedModel fit(const ClassifierSpec& spec, const FeatureMatrix& x, const LabelVector& y) {
  check_fit_inputs(spec, x, y);
  TrainedModel m;
  m.spec = spec;
  m.n_features = x.cols();
  m.n_classes = y.n_classes;
  switch (spec.kind) {
    case ClassifierKind::knn:
      m.train_x = x;
      m.train_y = y.labels;
      break;
    case ClassifierKind::logreg:
      train_softmax(spec.logreg, x, y, m);
      break;
    case ClassifierKind::linear_svm:
      train_ovr_svm(spec.svm, x, y, m);
      break;
  }
  m.training_accuracy = accuracy(y.labels, predict(m, x));
  return m;
}

std::vector<double> decision_scores(const TrainedModel& model, const FeatureMatrix& x) {
  if (!model.spec.is_linear()) throw std::invalid_argument("decision_scores needs a linear model");
  if (x.cols() != model.n_features) {
    throw DataError("dimension mismatch: model has " + std::to_string(model.n_features) + " features, input has " +
                    std::to_string(x.cols()));
  }
  const auto c = static_cast<Eigen::Index>(model.n_classes);
  const auto d = static_cast<Eigen::Index>(model.n_features);
  Eigen::Map<const RowMatrix> W(model.weights.data(), c, d);
  Eigen::Map<const Eigen::RowVectorXd> b(model.bias.data(), c);
  RowMatrix S = as_eigen(x) * W.transpose();
  S.rowwise() += b;
  return {S.data(), S.data() + S.size()};
}

std::vector<int> predict(const TrainedModel& model, const FeatureMatrix& x) {
  if (x.cols() != model.n_features) {
    throw DataError("dimension mismatch: model has " + std::to_string(model.n_features) + " features, input has " +
                    std::to_string(x.cols()));
  }
  if (model.spec.kind == ClassifierKind::knn) return predict_knn(model, x);
  const auto scores = decision_scores(model, x);
  std::vector<int> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    out[r] = argmax_smallest_id(scores.data() + r * static_cast<std::size_t>(model.n_classes), model.n_classes);
  }
  return out;
}

double accuracy(const std::vector<int>& truth, const std::vector<int>& predicted) {
  if (truth.size() != predicted.size()) throw DataError("label length mismatch");
  if (truth.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += truth[i] == predicted[i];
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

double cross_val_accuracy(const FeatureMatrix& x, const LabelVector& y, const FeatureSubset& subset,
                          const ClassifierSpec& spec, int k, std::uint64_t seed) {
  if (subset.none()) throw DataError("empty feature subset");
  return cross_val_accuracy(x, y, subset, spec, stratified_kfold(y, k, seed));
}

double cross_val_accuracy(const FeatureMatrix& x, const LabelVector& y, const FeatureSubset& subset,
                          const ClassifierSpec& spec, const FoldAssignment& folds) {
  if (subset.none()) throw DataError("empty feature subset");
  if (subset.size() != x.cols()) throw DataError("subset length does not match feature count");
  if (folds.fold_of_sample.size() != y.size() || x.rows() != y.size()) {
    throw DataError("fold assignment does not match the data");
  }
  const auto cols = subset.indices();
  const FeatureMatrix sliced = x.select_columns(cols);
  double total = 0.0;
  for (int f = 0; f < folds.k; ++f) {
    const auto train_idx = folds.train_indices(f);
    const auto test_idx = folds.test_indices(f);
    const LabelVector train_y = y.select(train_idx);
    const TrainedModel model = fit(spec, sliced.select_rows(train_idx), train_y);
    const auto pred = predict(model, sliced.select_rows(test_idx));
    total += accuracy(y.select(test_idx).labels, pred);
  }
  return total / folds.k;
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
  nlohmann::json j;
  j["format"] = "adfsa-model";
  j["version"] = 1;
  j["kind"] = to_string(model.spec.kind);
  j["n_features"] = model.n_features;
  j["n_classes"] = model.n_classes;
  j["training_accuracy"] = model.training_accuracy;
  j["params"] = {{"knn_k", model.spec.knn.k},
                 {"logreg_learning_rate", model.spec.logreg.learning_rate},
                 {"logreg_epochs", model.spec.logreg.epochs},
                 {"logreg_l2", model.spec.logreg.l2},
                 {"svm_lambda", model.spec.svm.lambda},
                 {"svm_epochs", model.spec.svm.epochs},
                 {"svm_learning_rate", model.spec.svm.learning_rate}};
  if (model.spec.kind == ClassifierKind::knn) {
    j["train_x"] = model.train_x.values();
    j["train_rows"] = model.train_x.rows();
    j["train_y"] = model.train_y;
  } else {
    j["weights"] = model.weights;
    j["bias"] = model.bias;
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file: " + path.string());
  out << j.dump(1) << '\n';
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    if (j.at("format") != "adfsa-model") throw DataError("not an adfsa model file");
    if (j.at("version") != 1) throw DataError("unsupported model version");
    TrainedModel m;
    m.spec.kind = parse_classifier_kind(j.at("kind"));
    const auto& p = j.at("params");
    m.spec.knn.k = p.at("knn_k");
    m.spec.logreg = {p.at("logreg_learning_rate"), p.at("logreg_epochs"), p.at("logreg_l2")};
    m.spec.svm = {p.at("svm_lambda"), p.at("svm_epochs"), p.at("svm_learning_rate")};
    m.n_features = j.at("n_features");
    m.n_classes = j.at("n_classes");
    m.training_accuracy = j.at("training_accuracy");
    if (m.spec.kind == ClassifierKind::knn) {
      const std::size_t rows = j.at("train_rows");
      m.train_x = FeatureMatrix(rows, m.n_features, j.at("train_x").get<std::vector<double>>());
      m.train_y = j.at("train_y").get<std::vector<int>>();
    } else {
      m.weights = j.at("weights").get<std::vector<double>>();
      m.bias = j.at("bias").get<std::vector<double>>();
      if (m.weights.size() != m.n_features * static_cast<std::size_t>(m.n_classes) ||
          m.bias.size() != static_cast<std::size_t>(m.n_classes)) {
        throw DataError("model weight dimensions do not match its header");
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed model file " + path.string() + ": " + e.what());
  }
}

}  // namespace adfsa
