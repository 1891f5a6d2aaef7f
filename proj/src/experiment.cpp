#include "adfsa/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "adfsa/errors.hpp"
#include "adfsa/metrics.hpp"

namespace adfsa {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(Method m) {
  switch (m) {
    case Method::none: return "none";
    case Method::pca: return "pca";
    case Method::rfe: return "rfe";
    case Method::adfsa: return "adfsa";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::none, Method::pca, Method::rfe, Method::adfsa}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown method '" + name + "' (expected none, pca, rfe or adfsa)");
}

AblationVariant parse_ablation(const std::string& name) {
  if (name == "full") return {name, {true, true}};
  if (name == "no_complexity") return {name, {true, false}};
  if (name == "no_uniqueness") return {name, {false, true}};
  if (name == "no_uniq_no_complexity") return {name, {false, false}};
  throw ConfigError("unknown ablation '" + name +
                    "' (expected full, no_complexity, no_uniqueness or no_uniq_no_complexity)");
}

const ClassifierSpec& ExperimentConfig::classifier(ClassifierKind kind) const {
  switch (kind) {
    case ClassifierKind::knn: return knn;
    case ClassifierKind::logreg: return logreg;
    case ClassifierKind::linear_svm: return linear_svm;
  }
  return knn;
}

namespace {

void check(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key + ": " + what);
}

template <typename F>
void rethrow_as_config(const std::string& key, F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  check(!methods.empty(), "methods", "at least one method is required");
  check(!classifiers.empty(), "classifiers", "at least one classifier is required");
  rethrow_as_config("knn", [&] { knn.validate(); });
  rethrow_as_config("logreg", [&] { logreg.validate(); });
  rethrow_as_config("linear_svm", [&] { linear_svm.validate(); });
  rethrow_as_config("adfsa", [&] { adfsa.validate(); });
  if (!data.is_csv()) rethrow_as_config("data.synthetic", [&] { data.synthetic.validate(); });
  check(pca_components >= 1, "pca.n_components", "must be at least 1");
  check(rfe_features >= 1, "rfe.n_features", "must be at least 1");
  check(test_fraction > 0.0 && test_fraction < 1.0, "split.test_fraction", "must lie in (0, 1)");
  check(k_folds >= 2, "split.k_folds", "must be at least 2");
  check(timing_repeats >= 1, "timing_repeats", "must be at least 1");
  for (const auto& a : ablations) parse_ablation(a);
}

// ---------------------------------------------------------------- config I/O

namespace {

/// Walks one JSON object, rejecting unknown keys and mistyped values.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(name("") + ": expected an object");
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    const json* v = find(key);
    if (!v) return;
    const std::string full = name(key);
    if constexpr (std::is_same_v<T, bool>) {
      check(v->is_boolean(), full, "expected a boolean");
      out = v->get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      check(v->is_string(), full, "expected a string");
      out = v->get<std::string>();
    } else if constexpr (std::is_same_v<T, fs::path>) {
      check(v->is_string(), full, "expected a string");
      out = v->get<std::string>();
    } else if constexpr (std::is_floating_point_v<T>) {
      check(v->is_number(), full, "expected a number");
      out = v->get<double>();
    } else if constexpr (std::is_unsigned_v<T>) {
      check(v->is_number_integer() && (v->is_number_unsigned() || v->get<std::int64_t>() >= 0), full,
            "expected a non-negative integer");
      out = v->get<T>();
    } else {
      check(v->is_number_integer(), full, "expected an integer");
      const auto value = v->get<std::int64_t>();
      check(value >= std::numeric_limits<T>::min() && value <= std::numeric_limits<T>::max(), full,
            "out of range");
      out = static_cast<T>(value);
    }
  }

  std::vector<std::string> strings(const std::string& key, std::vector<std::string> fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    check(v->is_array(), name(key), "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& e : *v) {
      check(e.is_string(), name(key), "expected an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  std::optional<Section> child(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    return Section(*v, name(key));
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError(name(k) + ": unknown key");
    }
  }

 private:
  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  std::string name(const std::string& key) const {
    if (path_.empty()) return key.empty() ? "config" : key;
    return key.empty() ? path_ : path_ + "." + key;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_classifier(Section& root, const std::string& key, ClassifierSpec& spec) {
  auto s = root.child(key);
  if (!s) return;
  switch (spec.kind) {
    case ClassifierKind::knn: s->read("k", spec.knn.k); break;
    case ClassifierKind::logreg:
      s->read("learning_rate", spec.logreg.learning_rate);
      s->read("epochs", spec.logreg.epochs);
      s->read("l2", spec.logreg.l2);
      break;
    case ClassifierKind::linear_svm:
      s->read("lambda", spec.svm.lambda);
      s->read("epochs", spec.svm.epochs);
      s->read("learning_rate", spec.svm.learning_rate);
      break;
  }
  s->finish();
}

template <typename T, typename Parse>
T parse_named(const std::string& key, const std::string& value, Parse parse) {
  try {
    return parse(value);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

void read_ga(Section& root, ExperimentConfig& c) {
  auto s = root.child("adfsa");
  if (!s) return;
  GAConfig& g = c.adfsa;
  s->read("population_size", g.population_size);
  s->read("n_generations", g.n_generations);
  s->read("mutation_rate", g.mutation_rate);
  s->read("init_density", g.init_density);
  s->read("elitism_count", g.elitism_count);
  s->read("k_folds", g.k_folds);
  s->read("redundancy_threshold", g.redundancy_threshold);
  s->read("use_uniqueness", g.ablation.use_uniqueness);
  s->read("use_complexity", g.ablation.use_complexity);
  s->read("fix_uniqueness", g.fix_uniqueness);
  s->read("cache_accuracy", g.cache_accuracy);
  s->read("threads", g.threads);
  std::string mode = to_string(g.weight_mode);
  s->read("weight_mode", mode);
  g.weight_mode = parse_named<WeightMode>("adfsa.weight_mode", mode, parse_weight_mode);
  std::string evaluator = to_string(g.evaluator.kind);
  s->read("evaluator", evaluator);
  g.evaluator.kind = parse_named<ClassifierKind>("adfsa.evaluator", evaluator, parse_classifier_kind);
  if (auto w = s->child("initial_weights")) {
    w->read("alpha", g.initial_weights.alpha);
    w->read("beta", g.initial_weights.beta);
    w->read("gamma", g.initial_weights.gamma);
    w->read("delta", g.initial_weights.delta);
    w->finish();
  }
  if (auto st = s->child("stagnation")) {
    StagnationParams& p = g.stagnation;
    st->read("min_generation", p.min_generation);
    st->read("epsilon", p.epsilon);
    st->read("alpha_step", p.alpha_step);
    st->read("alpha_cap", p.alpha_cap);
    st->read("beta_step", p.beta_step);
    st->read("beta_floor", p.beta_floor);
    st->read("mutation_step", p.mutation_step);
    st->read("mutation_cap", p.mutation_cap);
    st->finish();
  }
  s->finish();
}

json synthetic_json(const SyntheticSpec& s) {
  return {{"n_samples", s.n_samples},         {"n_features", s.n_features},
          {"n_informative", s.n_informative}, {"n_redundant", s.n_redundant},
          {"n_classes", s.n_classes},         {"noise_std", s.noise_std},
          {"redundancy_rho", s.redundancy_rho}, {"class_separation", s.class_separation}};
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  Section root(j, "");
  root.read("seed", c.seed);
  root.read("output_dir", c.output_dir);
  root.read("standardize", c.standardize);
  root.read("timing_repeats", c.timing_repeats);

  if (auto d = root.child("data")) {
    d->read("features_csv", c.data.features_csv);
    d->read("labels_csv", c.data.labels_csv);
    d->read("label_column", c.data.label_column);
    if (auto s = d->child("synthetic")) {
      SyntheticSpec& sp = c.data.synthetic;
      s->read("n_samples", sp.n_samples);
      s->read("n_features", sp.n_features);
      s->read("n_informative", sp.n_informative);
      s->read("n_redundant", sp.n_redundant);
      s->read("n_classes", sp.n_classes);
      s->read("noise_std", sp.noise_std);
      s->read("redundancy_rho", sp.redundancy_rho);
      s->read("class_separation", sp.class_separation);
      s->finish();
    }
    d->finish();
    check(!(c.data.is_csv() && d->has("synthetic")), "data", "give either features_csv or synthetic, not both");
  }

  if (root.has("methods")) {
    c.methods.clear();
    for (const auto& m : root.strings("methods", {})) c.methods.push_back(parse_named<Method>("methods", m, parse_method));
  }
  if (root.has("classifiers")) {
    c.classifiers.clear();
    for (const auto& k : root.strings("classifiers", {})) {
      c.classifiers.push_back(parse_named<ClassifierKind>("classifiers", k, parse_classifier_kind));
    }
  }
  read_classifier(root, "knn", c.knn);
  read_classifier(root, "logreg", c.logreg);
  read_classifier(root, "linear_svm", c.linear_svm);
  if (auto p = root.child("pca")) {
    p->read("n_components", c.pca_components);
    p->finish();
  }
  if (auto r = root.child("rfe")) {
    r->read("n_features", c.rfe_features);
    r->read("step", c.rfe_step);
    r->finish();
  }
  read_ga(root, c);
  c.ablations = root.strings("ablations", {});
  if (auto s = root.child("split")) {
    s->read("test_fraction", c.test_fraction);
    s->read("k_folds", c.k_folds);
    s->finish();
  }
  root.finish();

  const auto kind = c.adfsa.evaluator.kind;
  c.adfsa.evaluator = c.classifier(kind);
  c.adfsa.seed = c.seed;
  c.validate();
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir.generic_string();
  j["standardize"] = c.standardize;
  j["timing_repeats"] = c.timing_repeats;
  json data;
  if (c.data.is_csv()) {
    data["features_csv"] = c.data.features_csv.generic_string();
    if (!c.data.labels_csv.empty()) data["labels_csv"] = c.data.labels_csv.generic_string();
    data["label_column"] = c.data.label_column;
  } else {
    data["synthetic"] = synthetic_json(c.data.synthetic);
  }
  j["data"] = data;
  j["methods"] = json::array();
  for (Method m : c.methods) j["methods"].push_back(to_string(m));
  j["classifiers"] = json::array();
  for (ClassifierKind k : c.classifiers) j["classifiers"].push_back(to_string(k));
  j["knn"] = {{"k", c.knn.knn.k}};
  j["logreg"] = {{"learning_rate", c.logreg.logreg.learning_rate},
                 {"epochs", c.logreg.logreg.epochs},
                 {"l2", c.logreg.logreg.l2}};
  j["linear_svm"] = {{"lambda", c.linear_svm.svm.lambda},
                     {"epochs", c.linear_svm.svm.epochs},
                     {"learning_rate", c.linear_svm.svm.learning_rate}};
  j["pca"] = {{"n_components", c.pca_components}};
  j["rfe"] = {{"n_features", c.rfe_features}, {"step", c.rfe_step}};
  const GAConfig& g = c.adfsa;
  const StagnationParams& p = g.stagnation;
  j["adfsa"] = {
      {"population_size", g.population_size},
      {"n_generations", g.n_generations},
      {"mutation_rate", g.mutation_rate},
      {"init_density", g.init_density},
      {"elitism_count", g.elitism_count},
      {"k_folds", g.k_folds},
      {"redundancy_threshold", g.redundancy_threshold},
      {"use_uniqueness", g.ablation.use_uniqueness},
      {"use_complexity", g.ablation.use_complexity},
      {"fix_uniqueness", g.fix_uniqueness},
      {"cache_accuracy", g.cache_accuracy},
      {"threads", g.threads},
      {"weight_mode", to_string(g.weight_mode)},
      {"evaluator", to_string(g.evaluator.kind)},
      {"initial_weights",
       {{"alpha", g.initial_weights.alpha},
        {"beta", g.initial_weights.beta},
        {"gamma", g.initial_weights.gamma},
        {"delta", g.initial_weights.delta}}},
      {"stagnation",
       {{"min_generation", p.min_generation},
        {"epsilon", p.epsilon},
        {"alpha_step", p.alpha_step},
        {"alpha_cap", p.alpha_cap},
        {"beta_step", p.beta_step},
        {"beta_floor", p.beta_floor},
        {"mutation_step", p.mutation_step},
        {"mutation_cap", p.mutation_cap}}}};
  j["ablations"] = c.ablations;
  j["split"] = {{"test_fraction", c.test_fraction}, {"k_folds", c.k_folds}};
  return j;
}

Dataset load_dataset(const DataSource& source, std::uint64_t seed) {
  if (source.is_csv()) {
    if (!source.labels_csv.empty()) return load_split_csv(source.features_csv, source.labels_csv);
    return load_features_csv(source.features_csv, source.label_column);
  }
  auto s = generate_synthetic(source.synthetic, seed);
  return {std::move(s.features), std::move(s.labels), {}};
}

// ----------------------------------------------------------------- outputs

json to_json(const FitnessBreakdown& b) {
  return {{"f_acc", b.f_acc},
          {"f_red", b.f_red},
          {"f_uni", b.f_uni},
          {"f_comp", b.f_comp},
          {"total", b.total},
          {"weights",
           {{"alpha", b.weights_used.alpha},
            {"beta", b.weights_used.beta},
            {"gamma", b.weights_used.gamma},
            {"delta", b.weights_used.delta}}}};
}

json to_json(const GAResult& r, const GAConfig& config) {
  json trace = json::array();
  for (const auto& g : r.trace) {
    trace.push_back({{"generation", g.generation},
                     {"best_total", g.best_total},
                     {"mean_total", g.mean_total},
                     {"popcount_best", g.popcount_best},
                     {"mutation_rate", g.mutation_rate},
                     {"stagnation_triggered", g.stagnation_triggered},
                     {"best", to_json(g.best)}});
  }
  return {{"method", "adfsa"},
          {"seed", config.seed},
          {"indices", r.best_subset.indices()},
          {"n_features", r.best_subset.count()},
          {"bits", r.best_subset.to_string()},
          {"breakdown", to_json(r.best_breakdown)},
          {"history_size", r.history_size},
          {"total_evaluations", r.total_evaluations},
          {"repeated_evaluations", r.repeated_evaluations},
          {"final_mutation_rate", r.final_mutation_rate},
          {"trace", trace}};
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing results: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
  return s;
}

std::string num(double v) { return std::isnan(v) ? "NA" : format_double(v); }

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

FeatureMatrix prepare_features(const FeatureMatrix& x, bool standardize_flag) {
  return standardize_flag ? Standardizer::fit(x).apply(x) : x;
}

GAConfig ga_config(const ExperimentConfig& c) {
  GAConfig g = c.adfsa;
  g.seed = c.seed;
  return g;
}

}  // namespace

void write_trace_csv(const fs::path& path, const std::vector<GenerationRecord>& trace) {
  auto out = open_out(path);
  out << "generation,best_total,mean_total,f_acc,f_red,f_uni,f_comp,alpha,beta,gamma,delta,popcount_best\n";
  for (const auto& g : trace) {
    const auto& b = g.best;
    out << g.generation << ',' << num(g.best_total) << ',' << num(g.mean_total) << ',' << num(b.f_acc) << ','
        << num(b.f_red) << ',' << num(b.f_uni) << ',' << num(b.f_comp) << ',' << num(b.weights_used.alpha)
        << ',' << num(b.weights_used.beta) << ',' << num(b.weights_used.gamma) << ','
        << num(b.weights_used.delta) << ',' << g.popcount_best << '\n';
  }
}

double percent_change(double value, double baseline) {
  if (baseline == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return 100.0 * (value - baseline) / baseline;
}

double centroid_separation(const FeatureMatrix& x, const LabelVector& y) {
  if (x.rows() != y.size()) throw DataError("centroid_separation: length mismatch");
  const std::size_t d = x.cols();
  const auto k = static_cast<std::size_t>(y.n_classes);
  std::vector<double> centroid(k * d, 0.0);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto c = static_cast<std::size_t>(y.labels[i]);
    ++count[c];
    for (std::size_t j = 0; j < d; ++j) centroid[c * d + j] += x(i, j);
  }
  std::vector<std::size_t> present;
  for (std::size_t c = 0; c < k; ++c) {
    if (count[c] == 0) continue;
    present.push_back(c);
    for (std::size_t j = 0; j < d; ++j) centroid[c * d + j] /= static_cast<double>(count[c]);
  }
  auto dist = [&](auto&& a, std::size_t c) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = a(j) - centroid[c * d + j];
      s += diff * diff;
    }
    return std::sqrt(s);
  };
  double inter = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < present.size(); ++a) {
    for (std::size_t b = a + 1; b < present.size(); ++b) {
      inter += dist([&](std::size_t j) { return centroid[present[a] * d + j]; }, present[b]);
      ++pairs;
    }
  }
  double intra = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    intra += dist([&](std::size_t j) { return x(i, j); }, static_cast<std::size_t>(y.labels[i]));
  }
  intra /= static_cast<double>(std::max<std::size_t>(1, x.rows()));
  return (pairs ? inter / static_cast<double>(pairs) : 0.0) - intra;
}

// --------------------------------------------------------------- commands

void cmd_synth(const SynthOptions& o) {
  try {
    o.spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const auto data = generate_synthetic(o.spec, o.seed);
  fs::create_directories(o.out_dir);
  write_features_csv(o.out_dir / "features.csv", data.features);
  write_labels_csv(o.out_dir / "labels.csv", data.labels, {});
  write_json(o.out_dir / "ground_truth.json", {{"seed", o.seed},
                                               {"informative", data.informative},
                                               {"redundant", data.redundant},
                                               {"source_of_redundant", data.source_of_redundant},
                                               {"spec", synthetic_json(o.spec)}});
}

void cmd_select(const ExperimentConfig& config, Method method) {
  if (method == Method::none) throw ConfigError("method: select needs pca, rfe or adfsa");
  const Dataset ds = load_dataset(config.data, config.seed);
  const FeatureMatrix x = prepare_features(ds.features, config.standardize);
  fs::create_directories(config.output_dir);
  const fs::path out = config.output_dir;
  json sel;
  switch (method) {
    case Method::adfsa: {
      const GAConfig g = ga_config(config);
      const auto r = run_adfsa(x, ds.labels, g);
      sel = to_json(r, g);
      write_trace_csv(out / "trace.csv", r.trace);
      break;
    }
    case Method::rfe: {
      RfeResult r;
      rethrow_as_config("rfe", [&] { r = rfe_select(x, ds.labels, config.rfe_features, config.rfe_step, config.logreg); });
      std::vector<std::size_t> sizes;
      for (const auto& s : r.path) sizes.push_back(s.count());
      sel = {{"method", "rfe"},
             {"seed", config.seed},
             {"indices", r.selected.indices()},
             {"n_features", r.selected.count()},
             {"path_sizes", sizes}};
      break;
    }
    case Method::pca: {
      PcaModel m;
      rethrow_as_config("pca.n_components", [&] { m = pca_fit(x, config.pca_components); });
      save_pca_model(out / "pca_model.csv", m);
      sel = {{"method", "pca"},
             {"seed", config.seed},
             {"n_features", m.n_components},
             {"explained_variance_ratio", m.explained_variance_ratio()}};
      break;
    }
    case Method::none: break;
  }
  sel["config"] = to_json(config);
  write_json(out / "selection.json", sel);
  write_json(out / "run.json", {{"command", "select"},
                                {"method", to_string(method)},
                                {"config", to_json(config)},
                                {"dataset",
                                 {{"n_samples", x.rows()},
                                  {"n_features", x.cols()},
                                  {"n_classes", ds.labels.n_classes}}}});
}

namespace {

struct Prepared {
  Method method;
  FeatureMatrix train;
  FeatureMatrix test;
  std::size_t n_features = 0;
  double select_ms = 0.0;
};

FeatureSubset all_of(std::size_t n) { return FeatureSubset(n, true); }

void write_report_csv(const fs::path& path, const std::vector<ReportRow>& rows, const std::string& failure) {
  auto out = open_out(path);
  out << "classifier,setting,cv_accuracy,test_accuracy,n_features,memory_kb,macro_precision,macro_recall,"
         "macro_f1\n";
  for (const auto& r : rows) {
    out << r.classifier << ',' << r.setting << ',' << num(r.cv_accuracy) << ',' << num(r.test_accuracy) << ','
        << r.n_features << ',' << num(r.memory_kb) << ',' << num(r.macro_precision) << ','
        << num(r.macro_recall) << ',' << num(r.macro_f1) << '\n';
  }
  if (!failure.empty()) {
    std::string msg = failure;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    out << "FAILED,FAILED," << msg << ",,,,,,\n";
  }
}

const ReportRow* baseline_for(const std::vector<ReportRow>& rows, const std::string& classifier) {
  for (const auto& r : rows) {
    if (r.classifier == classifier && r.setting == "none") return &r;
  }
  return nullptr;
}

void write_outputs(const ExperimentConfig& config, const ExperimentReport& rep,
                   const std::vector<Prepared>& prepared, const Dataset& ds, const std::string& failure) {
  const fs::path out = config.output_dir;
  write_report_csv(out / "report.csv", rep.rows, failure);

  auto pc = open_out(out / "percent_change.csv");
  pc << "classifier,setting,cv_accuracy,test_accuracy,n_features,memory_kb\n";
  auto timing = open_out(out / "timing.csv");
  timing << "classifier,setting,avg_inference_ms,train_ms,select_ms,inference_change_pct\n";
  for (const auto& r : rep.rows) {
    const ReportRow* base = baseline_for(rep.rows, r.classifier);
    double select_ms = 0.0;
    for (const auto& p : prepared) {
      if (to_string(p.method) == r.setting) select_ms = p.select_ms;
    }
    timing << r.classifier << ',' << r.setting << ',' << fixed(r.inference_ms, 4) << ',' << fixed(r.train_ms, 4)
           << ',' << fixed(select_ms, 4) << ','
           << (base ? fixed(percent_change(r.inference_ms, base->inference_ms), 2) : "NA") << '\n';
    if (!base || r.setting == "none") continue;
    pc << r.classifier << ',' << r.setting << ',' << num(percent_change(r.cv_accuracy, base->cv_accuracy)) << ','
       << num(percent_change(r.test_accuracy, base->test_accuracy)) << ','
       << num(percent_change(static_cast<double>(r.n_features), static_cast<double>(base->n_features))) << ','
       << num(percent_change(r.memory_kb, base->memory_kb)) << '\n';
  }

  std::vector<std::string> files{"report.csv", "percent_change.csv", "report.md", "timing.csv"};
  std::ostringstream md;
  md << "# Feature selection benchmark\n\n"
     << "Data: " << ds.features.rows() << " samples, " << ds.features.cols() << " features, "
     << ds.labels.n_classes << " classes. Seed " << config.seed << ".\n"
     << "Random forest is not part of this benchmark.\n\n"
     << "| Classifier | Setting | CV accuracy (%) | Test accuracy (%) | # Features | Memory (KB) | Macro F1 |\n"
     << "|---|---|---|---|---|---|---|\n";
  for (const auto& r : rep.rows) {
    md << "| " << r.classifier << " | " << r.setting << " | " << fixed(r.cv_accuracy, 2) << " | "
       << fixed(r.test_accuracy, 2) << " | " << r.n_features << " | " << fixed(r.memory_kb, 2) << " | "
       << fixed(r.macro_f1, 4) << " |\n";
  }
  md << "\n## Percentage change vs. no selection\n\n"
     << "| Classifier | Setting | CV accuracy | # Features | Memory |\n|---|---|---|---|---|\n";
  for (const auto& r : rep.rows) {
    const ReportRow* base = baseline_for(rep.rows, r.classifier);
    if (!base || r.setting == "none") continue;
    md << "| " << r.classifier << " | " << r.setting << " | "
       << fixed(percent_change(r.cv_accuracy, base->cv_accuracy), 2) << " | "
       << fixed(percent_change(static_cast<double>(r.n_features), static_cast<double>(base->n_features)), 2)
       << " | " << fixed(percent_change(r.memory_kb, base->memory_kb), 2) << " |\n";
  }
  if (!rep.ablation.empty()) {
    files.push_back("ablation.csv");
    auto ab = open_out(out / "ablation.csv");
    ab << "variant,n_features,cv_accuracy,best_total,history_size,repeated_evaluations,stagnation_events\n";
    md << "\n## Ablation\n\n"
       << "| Variant | # Features | CV accuracy (%) | Repeated evaluations | Stagnation events |\n"
       << "|---|---|---|---|---|\n";
    for (const auto& a : rep.ablation) {
      ab << a.variant << ',' << a.n_features << ',' << num(a.cv_accuracy) << ',' << num(a.best_total) << ','
         << a.history_size << ',' << a.repeated_evaluations << ',' << a.stagnation_events << '\n';
      md << "| " << a.variant << " | " << a.n_features << " | " << fixed(a.cv_accuracy, 2) << " | "
         << a.repeated_evaluations << " | " << a.stagnation_events << " |\n";
    }
  }
  if (!failure.empty()) md << "\n**Run failed:** " << failure << "\n";
  auto md_out = open_out(out / "report.md");
  md_out << md.str();

  for (const auto& p : prepared) {
    if (p.method == Method::adfsa) files.insert(files.end(), {"selection_adfsa.json", "trace_adfsa.csv"});
    if (p.method == Method::rfe) files.push_back("selection_rfe.json");
    if (p.method == Method::pca) files.push_back("pca_model.csv");
  }
  write_json(out / "run.json", {{"command", "bench"},
                                {"status", failure.empty() ? "ok" : "failed"},
                                {"config", to_json(config)},
                                {"dataset",
                                 {{"n_samples", ds.features.rows()},
                                  {"n_features", ds.features.cols()},
                                  {"n_classes", ds.labels.n_classes}}},
                                {"files", files}});
}

}  // namespace

ExperimentReport cmd_bench(const ExperimentConfig& config) {
  const Dataset ds = load_dataset(config.data, config.seed);
  const fs::path out = config.output_dir;
  fs::create_directories(out);

  ExperimentReport rep;
  std::vector<Prepared> prepared;
  try {
    const auto split = train_test_split(ds.features, ds.labels, config.test_fraction, config.seed);
    FeatureMatrix xtr = split.train.x;
    FeatureMatrix xte = split.test.x;
    if (config.standardize) {
      const FeatureMatrix others[] = {xte};
      auto s = standardize(xtr, others);
      xtr = std::move(s.train);
      xte = std::move(s.others[0]);
    }
    const LabelVector& ytr = split.train.y;
    const LabelVector& yte = split.test.y;
    const GAConfig ga = ga_config(config);
    std::optional<GAResult> main_ga;

    for (Method m : config.methods) {
      Prepared p{m, {}, {}, 0, 0.0};
      const auto t0 = std::chrono::steady_clock::now();
      switch (m) {
        case Method::none:
          p.train = xtr;
          p.test = xte;
          break;
        case Method::pca: {
          PcaModel model;
          rethrow_as_config("pca.n_components", [&] { model = pca_fit(xtr, config.pca_components); });
          p.train = pca_project(model, xtr);
          p.test = pca_project(model, xte);
          save_pca_model(out / "pca_model.csv", model);
          break;
        }
        case Method::rfe: {
          RfeResult r;
          rethrow_as_config("rfe", [&] { r = rfe_select(xtr, ytr, config.rfe_features, config.rfe_step, config.logreg); });
          const auto idx = r.selected.indices();
          p.train = xtr.select_columns(idx);
          p.test = xte.select_columns(idx);
          write_json(out / "selection_rfe.json",
                     {{"method", "rfe"}, {"seed", config.seed}, {"indices", idx}, {"n_features", idx.size()}});
          break;
        }
        case Method::adfsa: {
          main_ga = run_adfsa(xtr, ytr, ga);
          const auto idx = main_ga->best_subset.indices();
          p.train = xtr.select_columns(idx);
          p.test = xte.select_columns(idx);
          write_json(out / "selection_adfsa.json", to_json(*main_ga, ga));
          write_trace_csv(out / "trace_adfsa.csv", main_ga->trace);
          break;
        }
      }
      p.select_ms = elapsed_ms(t0);
      p.n_features = p.train.cols();
      prepared.push_back(std::move(p));
    }

    for (const auto& name : config.ablations) {
      const auto variant = parse_ablation(name);
      GAConfig g = ga;
      g.ablation = variant.flags;
      const bool reuse = main_ga && variant.flags.use_uniqueness == ga.ablation.use_uniqueness &&
                         variant.flags.use_complexity == ga.ablation.use_complexity;
      const GAResult r = reuse ? *main_ga : run_adfsa(xtr, ytr, g);
      AblationRow row;
      row.variant = variant.name;
      row.n_features = r.best_subset.count();
      row.cv_accuracy = 100.0 * cross_val_accuracy(xtr, ytr, r.best_subset, g.evaluator, g.k_folds, config.seed);
      row.best_total = r.best_breakdown.total;
      row.history_size = r.history_size;
      row.repeated_evaluations = r.repeated_evaluations;
      row.stagnation_events = static_cast<std::size_t>(std::count_if(
          r.trace.begin(), r.trace.end(), [](const GenerationRecord& t) { return t.stagnation_triggered; }));
      rep.ablation.push_back(row);
    }

    for (ClassifierKind kind : config.classifiers) {
      const ClassifierSpec& spec = config.classifier(kind);
      for (const auto& p : prepared) {
        ReportRow row;
        row.classifier = to_string(kind);
        row.setting = to_string(p.method);
        row.n_features = p.n_features;
        const auto all = all_of(p.n_features);
        row.cv_accuracy = 100.0 * cross_val_accuracy(p.train, ytr, all, spec, config.k_folds, config.seed);
        const auto t0 = std::chrono::steady_clock::now();
        const TrainedModel model = fit(spec, p.train, ytr);
        row.train_ms = elapsed_ms(t0);
        const auto timing = measure_inference_time(model, p.test, all, config.timing_repeats);
        row.inference_ms = timing.mean_ms;
        const auto scores = prf_scores(confusion(yte.labels, timing.predictions, yte.n_classes));
        row.test_accuracy = 100.0 * scores.accuracy;
        row.macro_precision = scores.macro_precision;
        row.macro_recall = scores.macro_recall;
        row.macro_f1 = scores.macro_f1;
        row.memory_kb = feature_memory_kb(ds.features.rows(), p.n_features);
        rep.rows.push_back(row);
      }
    }
  } catch (const std::exception& e) {
    write_outputs(config, rep, prepared, ds, e.what());
    throw;
  }
  write_outputs(config, rep, prepared, ds, "");
  return rep;
}

void cmd_report(const fs::path& dir) {
  const json run = read_json(dir / "run.json");
  ExperimentConfig config;
  try {
    config = parse_config(run.at("config"));
  } catch (const json::exception& e) {
    throw DataError("run.json: " + std::string(e.what()));
  }
  const Dataset ds = load_dataset(config.data, config.seed);
  const FeatureMatrix x = prepare_features(ds.features, config.standardize);

  std::string source = "all features";
  std::vector<std::size_t> idx;
  for (const char* name : {"selection_adfsa.json", "selection.json", "selection_rfe.json"}) {
    if (!fs::exists(dir / name)) continue;
    const json sel = read_json(dir / name);
    if (!sel.contains("indices")) continue;
    idx = sel.at("indices").get<std::vector<std::size_t>>();
    source = sel.value("method", std::string("?")) + " selection (" + name + ")";
    break;
  }
  if (idx.empty()) {
    idx.resize(x.cols());
    for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = j;
  }
  for (std::size_t j : idx) {
    if (j >= x.cols()) throw DataError("selection index " + std::to_string(j) + " out of range");
  }
  const FeatureMatrix sub = x.select_columns(idx);
  const std::size_t k = std::min<std::size_t>(2, sub.cols());
  const PcaModel model = pca_fit(sub, k);
  const FeatureMatrix emb = pca_project(model, sub);
  {
    auto out = open_out(dir / "embedding.csv");
    out << "x,y,label\n";
    for (std::size_t i = 0; i < emb.rows(); ++i) {
      out << format_double(emb(i, 0)) << ',' << (k > 1 ? format_double(emb(i, 1)) : "0") << ','
          << ds.labels.labels[i] << '\n';
    }
  }
  std::ostringstream md;
  md << "# Summary\n\n"
     << "Embedding: 2-D PCA of " << idx.size() << " features from " << source << ".\n"
     << "Centroid separation (inter minus intra): " << fixed(centroid_separation(emb, ds.labels), 4) << "\n";
  const auto ratio = model.explained_variance_ratio();
  md << "Explained variance ratio:";
  for (double r : ratio) md << ' ' << fixed(r, 4);
  md << "\n";
  if (fs::exists(dir / "report.md")) {
    std::ifstream in(dir / "report.md");
    md << "\n" << in.rdbuf();
  }
  auto out = open_out(dir / "summary.md");
  out << md.str();
}

}  // namespace adfsa
