#include <cstdint>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tripartite/config.hpp"
#include "tripartite/experiment.hpp"
#include "tripartite/gradcheck.hpp"

namespace {

using namespace tripartite;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& text, const char* what) {
  std::vector<double> out;
  for (const std::string& item : split_list(text)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(what, "'" + item + "' is not a number");
    }
  }
  return out;
}

std::vector<int> parse_ints(const std::string& text, const char* what) {
  std::vector<int> out;
  for (const std::string& item : split_list(text)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(what, "'" + item + "' is not an integer");
    }
  }
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text, const char* what) {
  std::vector<std::uint64_t> out;
  for (const std::string& item : split_list(text)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(what, "'" + item + "' is not a seed");
    }
  }
  return out;
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool allow_ablation = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
  auto* config = cmd->add_option("--config", args.config_path, "experiment config (JSON)");
  if (config_required) config->required();
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "master seed override")
      ->each([&args](const std::string&) { args.seed_set = true; });
  cmd->add_flag("--allow-ablation", args.allow_ablation,
                "permit lambda_h outside (0,1) for ablation studies");
}

ExperimentConfig load_common(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args.config_path);
  if (args.seed_set) cfg.seed = args.seed;
  cfg.validate(args.allow_ablation);
  return cfg;
}

int cmd_run(const CommonArgs& args) {
  const ExperimentConfig cfg = load_common(args);
  TrainResult result;
  const RunPaths paths = run_experiment(cfg, args.out_dir, &result);
  std::printf("run '%s' finished: final accuracy %.4f (net1 %.4f, net2 %.4f), best %.4f at epoch %d\n",
              cfg.name.c_str(), result.final_test_accuracy,
              result.traces.empty() ? 0.0 : result.traces.back().test_acc_net1,
              result.traces.empty() ? 0.0 : result.traces.back().test_acc_net2,
              result.best_test_accuracy, result.best_epoch);
  std::printf("trace:     %s\nreport:    %s\npartition: %s\n", paths.trace_jsonl.c_str(),
              paths.report_json.c_str(), paths.partition_csv.c_str());
  return 0;
}

int cmd_compare(const CommonArgs& args, const std::string& criteria_list,
                const std::string& strategies_list, const std::string& seeds_list) {
  const ExperimentConfig cfg = load_common(args);

  std::vector<Criterion> criteria;
  for (const std::string& name : split_list(criteria_list)) {
    try {
      criteria.push_back(criterion_from_name(name));
    } catch (const std::exception& e) {
      throw ConfigError("criteria", e.what());
    }
  }
  std::vector<NoisyStrategy> strategies;
  const std::string strategy_names =
      strategies_list.empty() ? cfg.train.noisy_strategy : strategies_list;
  for (const std::string& name : split_list(strategy_names)) {
    try {
      strategies.push_back(noisy_strategy_from_name(name));
    } catch (const std::exception& e) {
      throw ConfigError("strategies", e.what());
    }
  }
  const std::vector<std::uint64_t> seeds =
      seeds_list.empty() ? std::vector<std::uint64_t>{cfg.seed} : parse_seeds(seeds_list, "seeds");

  const ComparisonPaths paths = compare_criteria(cfg, criteria, strategies, seeds, args.out_dir);
  std::printf("compared %zu criteria x %zu strategies over %zu seed(s)\n", criteria.size(),
              strategies.size(), seeds.size());
  std::printf("summary: %s\npurity:  %s\n", paths.summary_csv.c_str(), paths.purity_csv.c_str());
  return 0;
}

int cmd_sweep(const CommonArgs& args, const std::string& param_name,
              const std::string& values_list) {
  const ExperimentConfig cfg = load_common(args);
  const SweepParameter param = sweep_parameter_from_name(param_name);
  const std::vector<double> values = parse_doubles(values_list, "values");
  const std::string path = run_sweep(cfg, param, values, args.out_dir, args.allow_ablation);
  std::printf("swept %s over %zu values\ntable: %s\n", sweep_parameter_name(param), values.size(),
              path.c_str());
  return 0;
}

struct GenNoiseArgs {
  std::string type;
  double ratio = -1.0;
  int classes = 0;
  int top_k = 0;
  std::string weights;
  std::string partner;
  bool auto_train = false;
};

int cmd_gen_noise(const CommonArgs& args, const GenNoiseArgs& g) {
  ExperimentConfig cfg;
  if (!args.config_path.empty()) cfg = load_config(args.config_path);
  if (args.seed_set) cfg.seed = args.seed;

  if (!g.type.empty()) cfg.noise.kind = g.type;
  if (g.ratio >= 0.0) cfg.noise.ratio = g.ratio;
  if (g.classes > 0) {
    if (cfg.data.source != "blobs")
      throw ConfigError("classes", "--classes only applies to the generated blob dataset");
    cfg.data.blobs.class_count = g.classes;
    const int pairs = g.classes * (g.classes - 1) / 2;
    if (cfg.noise.top_k > pairs) cfg.noise.top_k = pairs;
  }
  if (g.top_k > 0) cfg.noise.top_k = g.top_k;
  if (!g.weights.empty()) cfg.noise.tier_weights = parse_doubles(g.weights, "weights");
  if (!g.partner.empty()) cfg.noise.pairflip_partner = parse_ints(g.partner, "partner");
  if (cfg.noise.kind == "realistic" && !g.auto_train)
    throw ConfigError("auto-train",
                      "realistic noise needs a prototype model trained on clean data; pass "
                      "--auto-train to fit one on the generated dataset");
  cfg.validate(args.allow_ablation);

  const NoiseGenPaths paths = generate_noise(cfg, args.out_dir);
  std::printf("transition matrix row sums:\n");
  for (std::size_t i = 0; i < paths.row_sums.size(); ++i)
    std::printf("  row %zu: %.12f\n", i, paths.row_sums[i]);
  std::printf("matrix:  %s\ndataset: %s\n", paths.matrix_csv.c_str(), paths.dataset_csv.c_str());
  return 0;
}

int cmd_check_grad(int nets, std::uint64_t seed) {
  const GradCheckReport report = run_gradcheck_suite(nets, seed);
  std::printf("gradient check: %d/%d cases passed, worst relative error %.3e\n",
              report.cases_passed, report.cases_run, report.worst_rel_error);
  for (const std::string& failure : report.failures) std::printf("  FAILED %s\n", failure.c_str());
  return report.all_passed() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual-network training lab for learning with noisy labels"};
  app.require_subcommand(1);

  CommonArgs run_args;
  auto* run = app.add_subcommand("run", "train per config and write trace/report/partition files");
  add_common(run, run_args, /*config_required=*/true);

  CommonArgs cmp_args;
  std::string criteria_list = "tripartite,small_loss,gmm";
  std::string strategies_list;
  std::string seeds_list;
  auto* cmp = app.add_subcommand("compare-criteria",
                                 "run several partition criteria on identical data and noise");
  add_common(cmp, cmp_args, /*config_required=*/true);
  cmp->add_option("--criteria", criteria_list, "comma list: tripartite,small_loss,gmm");
  cmp->add_option("--strategies", strategies_list,
                  "comma list of noisy-subset strategies (default: the config's)");
  cmp->add_option("--seeds", seeds_list, "comma list of seeds (default: the config's seed)");

  CommonArgs sweep_args;
  std::string param_name;
  std::string values_list;
  auto* sweep = app.add_subcommand("sweep", "rerun the config across values of one parameter");
  add_common(sweep, sweep_args, /*config_required=*/true);
  sweep->add_option("--param", param_name, "lambda_h | lambda_n | noise_ratio")->required();
  sweep->add_option("--values", values_list, "comma list of values")->required();

  CommonArgs gen_args;
  GenNoiseArgs gen_flags;
  auto* gen = app.add_subcommand("gen-noise",
                                 "build a transition matrix and a corrupted dataset CSV");
  add_common(gen, gen_args, /*config_required=*/false);
  gen->add_option("--type", gen_flags.type, "none | symmetric | pairflip | realistic");
  gen->add_option("--r", gen_flags.ratio, "noise ratio in [0,1)");
  gen->add_option("--classes", gen_flags.classes, "class count for the generated blob dataset");
  gen->add_option("--K", gen_flags.top_k, "number of most-similar pairs to load (realistic)");
  gen->add_option("--weights", gen_flags.weights, "three tier weights, e.g. 0.9,0.8,0.7");
  gen->add_option("--partner", gen_flags.partner, "pairflip partner permutation, e.g. 1,2,0");
  gen->add_flag("--auto-train", gen_flags.auto_train,
                "fit the prototype model on the generated clean dataset (realistic)");

  int grad_nets = 20;
  std::uint64_t grad_seed = 7;
  auto* grad = app.add_subcommand("check-grad", "finite-difference gradient sweep");
  grad->add_option("--nets", grad_nets, "number of random nets per loss kind");
  grad->add_option("--seed", grad_seed, "seed for the random cases");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // bad flags and missing options are validation errors
  }

  try {
    if (run->parsed()) return cmd_run(run_args);
    if (cmp->parsed()) return cmd_compare(cmp_args, criteria_list, strategies_list, seeds_list);
    if (sweep->parsed()) return cmd_sweep(sweep_args, param_name, values_list);
    if (gen->parsed()) return cmd_gen_noise(gen_args, gen_flags);
    if (grad->parsed()) return cmd_check_grad(grad_nets, grad_seed);
    std::cerr << "no subcommand given\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
