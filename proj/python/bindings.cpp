#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tripartite/config.hpp"
#include "tripartite/experiment.hpp"
#include "tripartite/gmm.hpp"
#include "tripartite/gradcheck.hpp"
#include "tripartite/partition.hpp"

namespace py = pybind11;
using namespace tripartite;

namespace {

std::vector<PredictionRecord> records_from_arrays(const std::vector<int>& sample_ids,
                                                  const std::vector<int>& given_labels,
                                                  const std::vector<int>& pred_net1,
                                                  const std::vector<int>& pred_net2,
                                                  const std::vector<double>& losses) {
  const std::size_t n = sample_ids.size();
  if (given_labels.size() != n || pred_net1.size() != n || pred_net2.size() != n ||
      (losses.size() != n && !losses.empty()))
    throw std::invalid_argument("records: input arrays must share one length");
  std::vector<PredictionRecord> records(n);
  for (std::size_t i = 0; i < n; ++i) {
    records[i].sample_id = sample_ids[i];
    records[i].given_label = given_labels[i];
    records[i].pred_net1 = pred_net1[i];
    records[i].pred_net2 = pred_net2[i];
    records[i].loss = losses.empty() ? 0.0 : losses[i];
  }
  return records;
}

py::dict partition_to_dict(const PartitionResult& p) {
  py::dict d;
  d["clean_ids"] = p.clean_ids;
  d["hard_ids"] = p.hard_ids;
  d["noisy_ids"] = p.noisy_ids;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "dual-network noisy-label training lab";

  py::class_<LabeledDataset>(m, "LabeledDataset")
      .def(py::init<>())
      .def_readwrite("features", &LabeledDataset::features)
      .def_readwrite("given_labels", &LabeledDataset::given_labels)
      .def_readwrite("true_labels", &LabeledDataset::true_labels)
      .def_readwrite("sample_ids", &LabeledDataset::sample_ids)
      .def_readwrite("class_count", &LabeledDataset::class_count)
      .def("size", &LabeledDataset::size)
      .def("feature_dim", &LabeledDataset::feature_dim)
      .def("validate", &LabeledDataset::validate);

  py::class_<TransitionMatrix>(m, "TransitionMatrix")
      .def(py::init<>())
      .def_readwrite("t", &TransitionMatrix::t)
      .def_readwrite("noise_ratio", &TransitionMatrix::noise_ratio)
      .def("class_count", &TransitionMatrix::class_count)
      .def("validate", &TransitionMatrix::validate);

  m.def(
      "gen_blobs",
      [](int class_count, int per_class, int feature_dim, double radius, double stddev,
         const std::vector<std::tuple<int, int, double>>& overlaps, std::uint64_t seed) {
        BlobSpec spec;
        spec.class_count = class_count;
        spec.per_class = per_class;
        spec.feature_dim = feature_dim;
        spec.radius = radius;
        spec.stddev = stddev;
        for (const auto& [a, b, degree] : overlaps)
          spec.overlaps.push_back(OverlapPair{a, b, degree});
        return gen_blobs(spec, seed);
      },
      py::arg("class_count") = 4, py::arg("per_class") = 500, py::arg("feature_dim") = 2,
      py::arg("radius") = 4.0, py::arg("stddev") = 1.0,
      py::arg("overlaps") = std::vector<std::tuple<int, int, double>>{}, py::arg("seed") = 0);

  m.def("gen_two_moons", &gen_two_moons, py::arg("n"), py::arg("noise_stddev"), py::arg("seed"));
  m.def("split_dataset", &split_dataset, py::arg("dataset"), py::arg("test_fraction"),
        py::arg("seed"));
  m.def("save_dataset_csv", &save_dataset_csv, py::arg("dataset"), py::arg("path"));
  m.def("load_dataset_csv", &load_dataset_csv, py::arg("path"));

  m.def("build_symmetric", &build_symmetric, py::arg("class_count"), py::arg("r"));
  m.def(
      "build_pairflip",
      [](int class_count, double r, const std::vector<int>& partner) {
        return build_pairflip(class_count, r,
                              partner.empty() ? default_pairflip_partner(class_count) : partner);
      },
      py::arg("class_count"), py::arg("r"), py::arg("partner") = std::vector<int>{});
  m.def("corrupt_dataset", &corrupt_dataset, py::arg("dataset"), py::arg("matrix"),
        py::arg("seed"));
  m.def(
      "build_noise_matrix",
      [](const std::string& kind, double ratio, int top_k,
         const std::vector<double>& tier_weights, const LabeledDataset& clean,
         std::uint64_t seed) {
        NoiseConfig cfg;
        cfg.kind = kind;
        cfg.ratio = ratio;
        cfg.top_k = top_k;
        cfg.tier_weights = tier_weights;
        return build_noise_matrix(cfg, clean, seed);
      },
      py::arg("kind"), py::arg("ratio"), py::arg("top_k"), py::arg("tier_weights"),
      py::arg("clean_dataset"), py::arg("seed") = 0);

  m.def(
      "tripartition",
      [](const std::vector<int>& sample_ids, const std::vector<int>& given_labels,
         const std::vector<int>& pred_net1, const std::vector<int>& pred_net2) {
        return partition_to_dict(
            tripartition(records_from_arrays(sample_ids, given_labels, pred_net1, pred_net2, {})));
      },
      py::arg("sample_ids"), py::arg("given_labels"), py::arg("pred_net1"), py::arg("pred_net2"));
  m.def(
      "small_loss_partition",
      [](const std::vector<int>& sample_ids, const std::vector<double>& losses,
         double keep_ratio) {
        std::vector<int> zeros(sample_ids.size(), 0);
        return partition_to_dict(small_loss_partition(
            records_from_arrays(sample_ids, zeros, zeros, zeros, losses), keep_ratio));
      },
      py::arg("sample_ids"), py::arg("losses"), py::arg("keep_ratio"));
  m.def(
      "gmm_partition",
      [](const std::vector<int>& sample_ids, const std::vector<double>& losses, double tau,
         std::uint64_t seed) {
        std::vector<int> zeros(sample_ids.size(), 0);
        GmmOptions options;
        options.seed = seed;
        return partition_to_dict(gmm_partition(
            records_from_arrays(sample_ids, zeros, zeros, zeros, losses), tau, options));
      },
      py::arg("sample_ids"), py::arg("losses"), py::arg("tau") = 0.5, py::arg("seed") = 0);

  m.def(
      "fit_gmm_1d",
      [](const std::vector<double>& values, std::uint64_t seed) {
        GmmOptions options;
        options.seed = seed;
        const GmmFit fit = fit_gmm_1d(values, options);
        py::dict d;
        d["mean_low"] = fit.mean_low;
        d["mean_high"] = fit.mean_high;
        d["var_low"] = fit.var_low;
        d["var_high"] = fit.var_high;
        d["weight_low"] = fit.weight_low;
        d["weight_high"] = fit.weight_high;
        d["log_likelihoods"] = fit.log_likelihoods;
        d["iterations"] = fit.iterations;
        return d;
      },
      py::arg("values"), py::arg("seed") = 0);

  m.def(
      "run_gradcheck",
      [](int nets, std::uint64_t seed) {
        const GradCheckReport report = run_gradcheck_suite(nets, seed);
        py::dict d;
        d["cases_run"] = report.cases_run;
        d["cases_passed"] = report.cases_passed;
        d["worst_rel_error"] = report.worst_rel_error;
        d["failures"] = report.failures;
        d["all_passed"] = report.all_passed();
        return d;
      },
      py::arg("nets") = 20, py::arg("seed") = 7);

  m.def(
      "run_experiment_json",
      [](const std::string& config_json, const std::string& out_dir) {
        const ExperimentConfig cfg = config_from_json(config_json);
        cfg.validate(/*allow_ablation=*/false);
        TrainResult result;
        const RunPaths paths = run_experiment(cfg, out_dir, &result);
        py::dict d;
        d["final_test_accuracy"] = result.final_test_accuracy;
        d["best_test_accuracy"] = result.best_test_accuracy;
        d["best_epoch"] = result.best_epoch;
        d["trace_jsonl"] = paths.trace_jsonl;
        d["report_json"] = paths.report_json;
        d["partition_csv"] = paths.partition_csv;
        return d;
      },
      py::arg("config_json"), py::arg("out_dir"));

  m.def("default_config_json",
        []() { return config_to_json(ExperimentConfig{}); });
}
