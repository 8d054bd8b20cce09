#include "tripartite/experiment.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tripartite {

using ojson = nlohmann::ordered_json;

namespace {

// experiment-level seed streams (distinct from the trainer's internal tags,
// which derive from the trainer's own master seed)
constexpr std::uint64_t kTagData = 11;
constexpr std::uint64_t kTagSplit = 12;
constexpr std::uint64_t kTagPrototype = 13;
constexpr std::uint64_t kTagCorrupt = 14;
constexpr std::uint64_t kTagTrainer = 15;

std::string fmt_double(double v) {
  // shortest decimal string that parses back to exactly v
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

LabeledDataset generate_full_dataset(const ExperimentConfig& cfg) {
  const std::uint64_t data_seed = Rng(cfg.seed).derive(kTagData).seed();
  if (cfg.data.source == "blobs") return gen_blobs(cfg.data.blobs, data_seed);
  if (cfg.data.source == "two_moons")
    return gen_two_moons(cfg.data.moons_n, cfg.data.moons_noise, data_seed);
  if (cfg.data.source == "csv") return load_dataset_csv(cfg.data.csv_path);
  throw ConfigError("data.source", "unknown source '" + cfg.data.source + "'");
}

ojson loss_stats_json(const SubsetLossStats& s) {
  ojson j;
  j["mean"] = s.mean;
  j["variance"] = s.variance;
  j["min"] = s.min;
  j["max"] = s.max;
  return j;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

ClassifierState train_prototype_net(const LabeledDataset& clean, std::uint64_t seed, int hidden,
                                    int epochs, int batch_size) {
  clean.validate();
  if (hidden < 1 || epochs < 1 || batch_size < 1)
    throw std::invalid_argument("train_prototype_net: hidden, epochs, batch_size must be >= 1");
  Rng root(seed);
  ClassifierState net =
      init_classifier({clean.feature_dim(), hidden, clean.class_count}, Activation::ReLU,
                      root.derive(1).seed());
  OptimizerSpec opt;
  opt.learning_rate = 0.05;
  opt.momentum = 0.9;
  opt.weight_decay = 1e-4;

  const int n = clean.size();
  const Matrix targets = one_hot(clean.true_labels, clean.class_count);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng = root.derive(2);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (int start = 0; start < n; start += batch_size) {
      const int rows = std::min(batch_size, n - start);
      Matrix bf(rows, clean.feature_dim());
      Matrix bt(rows, clean.class_count);
      for (int i = 0; i < rows; ++i) {
        bf.row(i) = clean.features.row(order[start + i]);
        bt.row(i) = targets.row(order[start + i]);
      }
      const Matrix probs = forward(net, bf);
      const LossAndGrad ce = cross_entropy(probs, bt);
      const Gradients grads = backward(net, bf, ce.dprobs);
      sgd_step(net, grads, opt, epoch);
    }
  }
  return net;
}

TransitionMatrix build_noise_matrix(const NoiseConfig& noise, const LabeledDataset& clean_train,
                                    std::uint64_t prototype_seed) {
  const int c = clean_train.class_count;
  if (noise.kind == "none") return build_symmetric(c, 0.0);
  if (noise.kind == "symmetric") return build_symmetric(c, noise.ratio);
  if (noise.kind == "pairflip") {
    const std::vector<int> partner =
        noise.pairflip_partner.empty() ? default_pairflip_partner(c) : noise.pairflip_partner;
    return build_pairflip(c, noise.ratio, partner);
  }
  if (noise.kind == "realistic") {
    const ClassifierState proto_net = train_prototype_net(clean_train, prototype_seed);
    const SimilarityRanking ranking = rank_pairs(extract_prototypes(proto_net));
    RealisticNoiseSpec spec;
    spec.top_k = noise.top_k;
    spec.tier_weights = noise.tier_weights;
    spec.noise_ratio = noise.ratio;
    return build_realistic(ranking, spec);
  }
  if (noise.kind == "matrix_csv") {
    TransitionMatrix tm = load_matrix_csv(noise.matrix_csv_path);
    if (tm.class_count() != c)
      throw ConfigError("noise.matrix_csv_path",
                        "matrix has " + std::to_string(tm.class_count()) +
                        " classes but the dataset has " + std::to_string(c));
    return tm;
  }
  throw ConfigError("noise.kind", "unknown kind '" + noise.kind + "'");
}

PreparedData prepare_data(const ExperimentConfig& cfg) {
  const LabeledDataset full = generate_full_dataset(cfg);
  auto [train, test] =
      split_dataset(full, cfg.data.test_fraction, Rng(cfg.seed).derive(kTagSplit).seed());

  PreparedData out;
  out.matrix = build_noise_matrix(cfg.noise, train, Rng(cfg.seed).derive(kTagPrototype).seed());
  if (cfg.noise.kind == "none") {
    out.train = std::move(train);
  } else {
    out.train = corrupt_dataset(train, out.matrix, Rng(cfg.seed).derive(kTagCorrupt).seed());
  }
  out.test = std::move(test);
  return out;
}

TrainerSetup make_trainer_setup(const ExperimentConfig& cfg, const PreparedData& data) {
  TrainerSetup setup;
  setup.train = data.train;
  setup.test = data.test;
  setup.hidden_sizes = cfg.model.hidden;
  setup.activation = activation_from_name(cfg.model.activation);
  setup.optimizer = cfg.train.optimizer;
  setup.schedule = cfg.train.schedule;
  setup.strategy.weights = cfg.train.weights;
  setup.strategy.noisy_strategy = noisy_strategy_from_name(cfg.train.noisy_strategy);
  setup.strategy.augment_clean_hard = cfg.train.augment_clean_hard;
  setup.partition.criterion = criterion_from_name(cfg.train.criterion);
  setup.partition.small_loss_keep = cfg.train.small_loss_keep;
  setup.partition.gmm_tau = cfg.train.gmm_tau;
  setup.augmenter = Augmenter(cfg.train.augmentations);
  setup.noise_ratio_hint = cfg.noise.kind == "none" ? 0.0 : cfg.noise.ratio;
  setup.master_seed = Rng(cfg.seed).derive(kTagTrainer).seed();
  return setup;
}

TrainResult execute_run(const ExperimentConfig& cfg) {
  const PreparedData data = prepare_data(cfg);
  CoTrainer trainer(make_trainer_setup(cfg, data));
  return trainer.train();
}

std::string trace_line(const EpochTrace& t) {
  ojson j;
  j["epoch"] = t.epoch;
  j["warmup"] = t.warmup;
  j["lr"] = t.lr;
  j["loss_clean"] = t.loss_clean;
  j["loss_hard"] = t.loss_hard;
  j["loss_noisy"] = t.loss_noisy;
  j["loss_total"] = t.loss_total;
  j["count_clean"] = t.count_clean;
  j["count_hard"] = t.count_hard;
  j["count_noisy"] = t.count_noisy;
  j["clean_purity"] = t.quality.clean_purity;
  j["noisy_purity"] = t.quality.noisy_purity;
  j["loss_stats_clean"] = loss_stats_json(t.quality.loss_clean);
  j["loss_stats_hard"] = loss_stats_json(t.quality.loss_hard);
  j["loss_stats_noisy"] = loss_stats_json(t.quality.loss_noisy);
  j["test_acc_net1"] = t.test_acc_net1;
  j["test_acc_net2"] = t.test_acc_net2;
  return j.dump();
}

RunPaths run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                        TrainResult* result_out) {
  cfg.validate(/*allow_ablation=*/true);  // range gating happened at the entry point
  std::filesystem::create_directories(out_dir);

  const PreparedData data = prepare_data(cfg);
  CoTrainer trainer(make_trainer_setup(cfg, data));
  TrainResult result = trainer.train();

  RunPaths paths;
  paths.trace_jsonl = (std::filesystem::path(out_dir) / "trace.jsonl").string();
  paths.report_json = (std::filesystem::path(out_dir) / "report.json").string();
  paths.partition_csv = (std::filesystem::path(out_dir) / "partition_final.csv").string();

  std::string trace;
  for (const EpochTrace& t : result.traces) {
    trace += trace_line(t);
    trace += '\n';
  }
  write_text_file(paths.trace_jsonl, trace);

  ojson report;
  report["name"] = cfg.name;
  report["seed"] = cfg.seed;
  report["criterion"] = cfg.train.criterion;
  report["noisy_strategy"] = cfg.train.noisy_strategy;
  report["noise_kind"] = cfg.noise.kind;
  report["noise_ratio"] = cfg.noise.kind == "none" ? 0.0 : cfg.noise.ratio;
  report["epochs"] = cfg.train.schedule.max_epochs;
  report["final_test_accuracy_net1"] =
      result.traces.empty() ? 0.0 : result.traces.back().test_acc_net1;
  report["final_test_accuracy_net2"] =
      result.traces.empty() ? 0.0 : result.traces.back().test_acc_net2;
  report["final_test_accuracy_mean"] = result.final_test_accuracy;
  report["best_epoch"] = result.best_epoch;
  report["best_test_accuracy"] = result.best_test_accuracy;
  ojson fp;
  fp["count_clean"] = result.final_quality.count_clean;
  fp["count_hard"] = result.final_quality.count_hard;
  fp["count_noisy"] = result.final_quality.count_noisy;
  fp["clean_purity"] = result.final_quality.clean_purity;
  fp["noisy_purity"] = result.final_quality.noisy_purity;
  report["final_partition"] = fp;
  write_text_file(paths.report_json, report.dump(2) + "\n");

  save_partition_csv(result.final_partition, paths.partition_csv);

  if (result_out) *result_out = std::move(result);
  return paths;
}

ComparisonPaths compare_criteria(const ExperimentConfig& cfg,
                                 const std::vector<Criterion>& criteria,
                                 const std::vector<NoisyStrategy>& strategies,
                                 const std::vector<std::uint64_t>& seeds,
                                 const std::string& out_dir) {
  if (criteria.size() < 2)
    throw ConfigError("criteria", "need at least two criteria to compare");
  if (strategies.empty()) throw ConfigError("strategies", "need at least one strategy");
  if (seeds.empty()) throw ConfigError("seeds", "need at least one seed");
  cfg.validate(/*allow_ablation=*/true);
  std::filesystem::create_directories(out_dir);

  std::string summary =
      "criterion,strategy,seed,final_accuracy,best_accuracy,mean_clean_purity,"
      "mean_noisy_purity\n";
  std::string purity =
      "criterion,strategy,seed,epoch,clean_purity,noisy_purity,count_clean,count_hard,"
      "count_noisy\n";

  for (std::uint64_t seed : seeds) {
    ExperimentConfig run_cfg = cfg;
    run_cfg.seed = seed;
    // one corrupted dataset per seed, shared across every criterion/strategy
    const PreparedData data = prepare_data(run_cfg);
    for (Criterion criterion : criteria) {
      for (NoisyStrategy strategy : strategies) {
        TrainerSetup setup = make_trainer_setup(run_cfg, data);
        setup.partition.criterion = criterion;
        setup.strategy.noisy_strategy = strategy;
        CoTrainer trainer(std::move(setup));
        const TrainResult result = trainer.train();

        std::vector<double> clean_purities, noisy_purities;
        for (const EpochTrace& t : result.traces) {
          if (t.warmup) continue;
          clean_purities.push_back(t.quality.clean_purity);
          noisy_purities.push_back(t.quality.noisy_purity);
          purity += std::string(criterion_name(criterion)) + "," + noisy_strategy_name(strategy) +
                    "," + std::to_string(seed) + "," + std::to_string(t.epoch) + "," +
                    fmt_double(t.quality.clean_purity) + "," + fmt_double(t.quality.noisy_purity) +
                    "," + std::to_string(t.count_clean) + "," + std::to_string(t.count_hard) +
                    "," + std::to_string(t.count_noisy) + "\n";
        }
        summary += std::string(criterion_name(criterion)) + "," + noisy_strategy_name(strategy) +
                   "," + std::to_string(seed) + "," + fmt_double(result.final_test_accuracy) +
                   "," + fmt_double(result.best_test_accuracy) + "," +
                   fmt_double(mean_of(clean_purities)) + "," + fmt_double(mean_of(noisy_purities)) +
                   "\n";
      }
    }
  }

  ComparisonPaths paths;
  paths.summary_csv = (std::filesystem::path(out_dir) / "compare_summary.csv").string();
  paths.purity_csv = (std::filesystem::path(out_dir) / "compare_purity.csv").string();
  write_text_file(paths.summary_csv, summary);
  write_text_file(paths.purity_csv, purity);
  return paths;
}

SweepParameter sweep_parameter_from_name(const std::string& name) {
  if (name == "lambda_h") return SweepParameter::LambdaH;
  if (name == "lambda_n") return SweepParameter::LambdaN;
  if (name == "noise_ratio") return SweepParameter::NoiseRatio;
  throw ConfigError("parameter",
                    "unknown sweep parameter '" + name +
                    "' (expected lambda_h|lambda_n|noise_ratio)");
}

const char* sweep_parameter_name(SweepParameter p) {
  switch (p) {
    case SweepParameter::LambdaH: return "lambda_h";
    case SweepParameter::LambdaN: return "lambda_n";
    case SweepParameter::NoiseRatio: return "noise_ratio";
  }
  throw std::logic_error("unreachable");
}

ExperimentConfig with_sweep_value(const ExperimentConfig& cfg, SweepParameter parameter,
                                  double value) {
  ExperimentConfig out = cfg;
  switch (parameter) {
    case SweepParameter::LambdaH: out.train.weights.lambda_h = value; break;
    case SweepParameter::LambdaN: out.train.weights.lambda_n = value; break;
    case SweepParameter::NoiseRatio: out.noise.ratio = value; break;
  }
  return out;
}

std::string run_sweep(const ExperimentConfig& cfg, SweepParameter parameter,
                      const std::vector<double>& values, const std::string& out_dir,
                      bool allow_ablation) {
  if (values.size() < 2) throw ConfigError("values", "need at least two sweep values");
  // reject any bad value before spending time on runs
  for (double v : values) with_sweep_value(cfg, parameter, v).validate(allow_ablation);
  std::filesystem::create_directories(out_dir);

  std::string csv = "value,final_accuracy,best_accuracy\n";
  for (double v : values) {
    const TrainResult result = execute_run(with_sweep_value(cfg, parameter, v));
    csv += fmt_double(v) + "," + fmt_double(result.final_test_accuracy) + "," +
           fmt_double(result.best_test_accuracy) + "\n";
  }

  const std::string path = (std::filesystem::path(out_dir) / "sweep.csv").string();
  write_text_file(path, csv);
  return path;
}

NoiseGenPaths generate_noise(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate(/*allow_ablation=*/true);
  std::filesystem::create_directories(out_dir);

  const LabeledDataset full = generate_full_dataset(cfg);
  const TransitionMatrix tm =
      build_noise_matrix(cfg.noise, full, Rng(cfg.seed).derive(kTagPrototype).seed());
  const LabeledDataset corrupted =
      cfg.noise.kind == "none"
          ? full
          : corrupt_dataset(full, tm, Rng(cfg.seed).derive(kTagCorrupt).seed());

  NoiseGenPaths paths;
  paths.matrix_csv = (std::filesystem::path(out_dir) / "noise_matrix.csv").string();
  paths.dataset_csv = (std::filesystem::path(out_dir) / "corrupted_dataset.csv").string();
  save_matrix_csv(tm, paths.matrix_csv);
  save_dataset_csv(corrupted, paths.dataset_csv);
  for (int i = 0; i < tm.class_count(); ++i) paths.row_sums.push_back(tm.t.row(i).sum());
  return paths;
}

}  // namespace tripartite
