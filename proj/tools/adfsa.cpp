#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "adfsa/errors.hpp"
#include "adfsa/experiment.hpp"

namespace {

enum Exit { ok = 0, usage = 1, data = 2, internal = 3 };

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string method;
  std::vector<std::string> classifiers;
  std::optional<bool> standardize;
};

void add_common(CLI::App* cmd, Overrides& o, bool with_method) {
  cmd->add_option("--config", o.config, "JSON experiment config")->envname("ADFSA_CONFIG")->required();
  cmd->add_option("--seed", o.seed, "Override the config seed")->envname("ADFSA_SEED");
  cmd->add_option("--out", o.out, "Override the output directory")->envname("ADFSA_OUT");
  if (with_method) cmd->add_option("--method", o.method, "pca, rfe or adfsa")->envname("ADFSA_METHOD");
  cmd->add_option("--classifier", o.classifiers, "Classifier(s) to use; repeatable")
      ->envname("ADFSA_CLASSIFIER")
      ->delimiter(',');
  cmd->add_flag("--standardize,!--no-standardize", o.standardize, "z-score features on the training data")
      ->envname("ADFSA_STANDARDIZE");
}

adfsa::ExperimentConfig resolve(const Overrides& o) {
  auto c = adfsa::load_config(o.config);
  if (o.seed) {
    c.seed = *o.seed;
    c.adfsa.seed = *o.seed;
  }
  if (!o.out.empty()) c.output_dir = o.out;
  if (o.standardize) c.standardize = *o.standardize;
  if (!o.classifiers.empty()) {
    c.classifiers.clear();
    for (const auto& k : o.classifiers) {
      try {
        c.classifiers.push_back(adfsa::parse_classifier_kind(k));
      } catch (const std::invalid_argument& e) {
        throw adfsa::ConfigError(std::string("--classifier: ") + e.what());
      }
    }
    // With a single classifier the GA uses it as its evaluator too.
    if (c.classifiers.size() == 1) c.adfsa.evaluator = c.classifier(c.classifiers.front());
  }
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive dynamic feature selection: synthetic data, selection and benchmarks"};
  app.require_subcommand(1);

  adfsa::SynthOptions synth;
  synth.out_dir = "data";
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic data set with planted features");
  synth_cmd->add_option("--samples", synth.spec.n_samples)->capture_default_str();
  synth_cmd->add_option("--features", synth.spec.n_features)->capture_default_str();
  synth_cmd->add_option("--informative", synth.spec.n_informative)->capture_default_str();
  synth_cmd->add_option("--redundant", synth.spec.n_redundant)->capture_default_str();
  synth_cmd->add_option("--classes", synth.spec.n_classes)->capture_default_str();
  synth_cmd->add_option("--noise", synth.spec.noise_std)->capture_default_str();
  synth_cmd->add_option("--rho", synth.spec.redundancy_rho)->capture_default_str();
  synth_cmd->add_option("--separation", synth.spec.class_separation)->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->envname("ADFSA_SEED")->capture_default_str();
  synth_cmd->add_option("--out", synth.out_dir)->envname("ADFSA_OUT")->capture_default_str();

  Overrides select_o, bench_o;
  auto* select_cmd = app.add_subcommand("select", "Run one selection method on the full data set");
  add_common(select_cmd, select_o, true);
  auto* bench_cmd = app.add_subcommand("bench", "Compare selection methods across classifiers");
  add_common(bench_cmd, bench_o, false);

  std::string result_dir = "results";
  auto* report_cmd = app.add_subcommand("report", "Summarise a result directory and emit a 2-D embedding");
  report_cmd->add_option("dir,--out", result_dir, "Result directory")->envname("ADFSA_OUT")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  try {
    if (*synth_cmd) {
      adfsa::cmd_synth(synth);
    } else if (*select_cmd) {
      const auto c = resolve(select_o);
      const std::string m = select_o.method.empty() ? "adfsa" : select_o.method;
      adfsa::cmd_select(c, adfsa::parse_method(m));
    } else if (*bench_cmd) {
      adfsa::cmd_bench(resolve(bench_o));
    } else if (*report_cmd) {
      adfsa::cmd_report(result_dir);
    }
  } catch (const adfsa::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return usage;
  } catch (const adfsa::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return data;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return internal;
  }
  return ok;
}
