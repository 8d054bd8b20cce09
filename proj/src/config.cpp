#include "tripartite/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace tripartite {

using ojson = nlohmann::ordered_json;

namespace {

//! Wraps one JSON object: typed access with field-path errors plus a final
//! unknown-key sweep, so typos in config files fail loudly.
class ObjectReader {
 public:
  ObjectReader(const ojson& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_, "expected an object");
  }

  bool has(const char* key) const { return obj_.contains(key); }

  template <typename T>
  T require(const char* key) {
    if (!obj_.contains(key)) throw ConfigError(join(key), "required field missing");
    return fetch<T>(key);
  }

  template <typename T>
  T get(const char* key, T fallback) {
    if (!obj_.contains(key)) return fallback;
    return fetch<T>(key);
  }

  const ojson& raw(const char* key) {
    consumed_.insert(key);
    return obj_.at(key);
  }

  std::string join(const char* key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items())
      if (!consumed_.count(key)) throw ConfigError(join(key.c_str()), "unknown field");
  }

 private:
  template <typename T>
  T fetch(const char* key) {
    consumed_.insert(key);
    try {
      return obj_.at(key).get<T>();
    } catch (const ojson::exception&) {
      throw ConfigError(join(key), "wrong type");
    }
  }

  const ojson& obj_;
  std::string path_;
  std::set<std::string> consumed_;
};

DataConfig parse_data(const ojson& j) {
  ObjectReader r(j, "data");
  DataConfig d;
  d.source = r.get<std::string>("source", d.source);
  if (r.has("blobs")) {
    ObjectReader b(r.raw("blobs"), "data.blobs");
    d.blobs.class_count = b.get("class_count", d.blobs.class_count);
    d.blobs.per_class = b.get("per_class", d.blobs.per_class);
    d.blobs.feature_dim = b.get("feature_dim", d.blobs.feature_dim);
    d.blobs.radius = b.get("radius", d.blobs.radius);
    d.blobs.stddev = b.get("stddev", d.blobs.stddev);
    if (b.has("overlaps")) {
      const ojson& arr = b.raw("overlaps");
      if (!arr.is_array()) throw ConfigError("data.blobs.overlaps", "expected an array");
      d.blobs.overlaps.clear();
      for (std::size_t i = 0; i < arr.size(); ++i) {
        ObjectReader o(arr[i], "data.blobs.overlaps[" + std::to_string(i) + "]");
        OverlapPair p;
        p.class_a = o.require<int>("class_a");
        p.class_b = o.require<int>("class_b");
        p.degree = o.require<double>("degree");
        o.finish();
        d.blobs.overlaps.push_back(p);
      }
    }
    b.finish();
  }
  if (r.has("moons")) {
    ObjectReader m(r.raw("moons"), "data.moons");
    d.moons_n = m.get("n", d.moons_n);
    d.moons_noise = m.get("noise", d.moons_noise);
    m.finish();
  }
  d.csv_path = r.get<std::string>("csv_path", d.csv_path);
  d.test_fraction = r.get("test_fraction", d.test_fraction);
  r.finish();
  return d;
}

NoiseConfig parse_noise(const ojson& j) {
  ObjectReader r(j, "noise");
  NoiseConfig n;
  n.kind = r.get<std::string>("kind", n.kind);
  n.ratio = r.get("ratio", n.ratio);
  n.top_k = r.get("top_k", n.top_k);
  n.tier_weights = r.get("tier_weights", n.tier_weights);
  n.pairflip_partner = r.get("pairflip_partner", n.pairflip_partner);
  n.matrix_csv_path = r.get<std::string>("matrix_csv_path", n.matrix_csv_path);
  r.finish();
  return n;
}

ModelConfig parse_model(const ojson& j) {
  ObjectReader r(j, "model");
  ModelConfig m;
  m.hidden = r.get("hidden", m.hidden);
  m.activation = r.get<std::string>("activation", m.activation);
  r.finish();
  return m;
}

AugmentationSpec parse_augmentation(const ojson& j, const std::string& path) {
  ObjectReader r(j, path);
  const auto kind = r.require<std::string>("kind");
  AugmentationSpec spec;
  if (kind == "gaussian_jitter") {
    spec = AugmentationSpec::gaussian_jitter(r.require<double>("sigma"));
  } else if (kind == "feature_dropout") {
    spec = AugmentationSpec::feature_dropout(r.require<double>("rate"));
  } else if (kind == "scale") {
    spec = AugmentationSpec::scale(r.require<double>("lo"), r.require<double>("hi"));
  } else if (kind == "mixup") {
    spec = AugmentationSpec::mixup(r.require<double>("alpha"));
  } else {
    throw ConfigError(path + ".kind", "unknown augmentation '" + kind + "'");
  }
  r.finish();
  return spec;
}

TrainConfig parse_train(const ojson& j) {
  ObjectReader r(j, "train");
  TrainConfig t;
  if (r.has("optimizer")) {
    ObjectReader o(r.raw("optimizer"), "train.optimizer");
    t.optimizer.learning_rate = o.get("learning_rate", t.optimizer.learning_rate);
    t.optimizer.momentum = o.get("momentum", t.optimizer.momentum);
    t.optimizer.weight_decay = o.get("weight_decay", t.optimizer.weight_decay);
    if (o.has("lr_schedule")) {
      const ojson& arr = o.raw("lr_schedule");
      if (!arr.is_array()) throw ConfigError("train.optimizer.lr_schedule", "expected an array");
      t.optimizer.lr_schedule.clear();
      for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_array() || arr[i].size() != 2)
          throw ConfigError("train.optimizer.lr_schedule[" + std::to_string(i) + "]",
                            "expected [epoch, multiplier]");
        t.optimizer.lr_schedule.emplace_back(arr[i][0].get<int>(), arr[i][1].get<double>());
      }
    }
    o.finish();
  }
  if (r.has("schedule")) {
    ObjectReader s(r.raw("schedule"), "train.schedule");
    t.schedule.max_epochs = s.get("max_epochs", t.schedule.max_epochs);
    t.schedule.warmup_epochs = s.get("warmup_epochs", t.schedule.warmup_epochs);
    t.schedule.batch_size = s.get("batch_size", t.schedule.batch_size);
    s.finish();
  }
  {
    if (!r.has("weights")) throw ConfigError("train.weights", "required field missing");
    ObjectReader w(r.raw("weights"), "train.weights");
    t.weights.lambda_h = w.require<double>("lambda_h");  // deliberately no default
    t.weights.lambda_n = w.get("lambda_n", t.weights.lambda_n);
    w.finish();
  }
  t.noisy_strategy = r.get<std::string>("noisy_strategy", t.noisy_strategy);
  t.augment_clean_hard = r.get("augment_clean_hard", t.augment_clean_hard);
  if (r.has("augmentations")) {
    const ojson& arr = r.raw("augmentations");
    if (!arr.is_array()) throw ConfigError("train.augmentations", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      t.augmentations.push_back(
          parse_augmentation(arr[i], "train.augmentations[" + std::to_string(i) + "]"));
  }
  t.criterion = r.get<std::string>("criterion", t.criterion);
  t.small_loss_keep = r.get("small_loss_keep", t.small_loss_keep);
  t.gmm_tau = r.get("gmm_tau", t.gmm_tau);
  r.finish();
  return t;
}

ojson augmentation_to_json(const AugmentationSpec& spec) {
  ojson j;
  j["kind"] = spec.kind_name();
  switch (spec.kind) {
    case AugmentationSpec::Kind::GaussianJitter: j["sigma"] = spec.sigma; break;
    case AugmentationSpec::Kind::FeatureDropout: j["rate"] = spec.rate; break;
    case AugmentationSpec::Kind::Scale:
      j["lo"] = spec.scale_lo;
      j["hi"] = spec.scale_hi;
      break;
    case AugmentationSpec::Kind::Mixup: j["alpha"] = spec.alpha; break;
  }
  return j;
}

}  // namespace

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::ReLU;
  if (name == "tanh") return Activation::Tanh;
  throw std::invalid_argument("unknown activation '" + name + "' (expected relu|tanh)");
}

const char* activation_name(Activation a) {
  return a == Activation::ReLU ? "relu" : "tanh";
}

NoisyStrategy noisy_strategy_from_name(const std::string& name) {
  if (name == "self_supervised") return NoisyStrategy::SelfSupervised;
  if (name == "pseudo_label") return NoisyStrategy::PseudoLabel;
  if (name == "drop") return NoisyStrategy::Drop;
  throw std::invalid_argument("unknown noisy strategy '" + name +
                              "' (expected self_supervised|pseudo_label|drop)");
}

ExperimentConfig config_from_json(const std::string& json_text) {
  ojson j;
  try {
    j = ojson::parse(json_text);
  } catch (const ojson::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  ObjectReader r(j, "");
  ExperimentConfig cfg;
  cfg.schema_version = r.get("schema_version", 1);
  if (cfg.schema_version != 1)
    throw ConfigError("schema_version", "unsupported version " +
                      std::to_string(cfg.schema_version));
  cfg.name = r.get<std::string>("name", cfg.name);
  cfg.seed = r.get<std::uint64_t>("seed", cfg.seed);
  if (r.has("data")) cfg.data = parse_data(r.raw("data"));
  if (r.has("noise")) cfg.noise = parse_noise(r.raw("noise"));
  if (r.has("model")) cfg.model = parse_model(r.raw("model"));
  if (!r.has("train")) throw ConfigError("train", "required field missing");
  cfg.train = parse_train(r.raw("train"));
  r.finish();
  return cfg;
}

std::string config_to_json(const ExperimentConfig& c) {
  ojson j;
  j["schema_version"] = c.schema_version;
  j["name"] = c.name;
  j["seed"] = c.seed;

  ojson data;
  data["source"] = c.data.source;
  ojson blobs;
  blobs["class_count"] = c.data.blobs.class_count;
  blobs["per_class"] = c.data.blobs.per_class;
  blobs["feature_dim"] = c.data.blobs.feature_dim;
  blobs["radius"] = c.data.blobs.radius;
  blobs["stddev"] = c.data.blobs.stddev;
  ojson overlaps = ojson::array();
  for (const auto& p : c.data.blobs.overlaps) {
    ojson o;
    o["class_a"] = p.class_a;
    o["class_b"] = p.class_b;
    o["degree"] = p.degree;
    overlaps.push_back(o);
  }
  blobs["overlaps"] = overlaps;
  data["blobs"] = blobs;
  ojson moons;
  moons["n"] = c.data.moons_n;
  moons["noise"] = c.data.moons_noise;
  data["moons"] = moons;
  data["csv_path"] = c.data.csv_path;
  data["test_fraction"] = c.data.test_fraction;
  j["data"] = data;

  ojson noise;
  noise["kind"] = c.noise.kind;
  noise["ratio"] = c.noise.ratio;
  noise["top_k"] = c.noise.top_k;
  noise["tier_weights"] = c.noise.tier_weights;
  noise["pairflip_partner"] = c.noise.pairflip_partner;
  noise["matrix_csv_path"] = c.noise.matrix_csv_path;
  j["noise"] = noise;

  ojson model;
  model["hidden"] = c.model.hidden;
  model["activation"] = c.model.activation;
  j["model"] = model;

  ojson train;
  ojson optimizer;
  optimizer["learning_rate"] = c.train.optimizer.learning_rate;
  optimizer["momentum"] = c.train.optimizer.momentum;
  optimizer["weight_decay"] = c.train.optimizer.weight_decay;
  ojson sched_arr = ojson::array();
  for (const auto& [epoch, mult] : c.train.optimizer.lr_schedule)
    sched_arr.push_back(ojson::array({epoch, mult}));
  optimizer["lr_schedule"] = sched_arr;
  train["optimizer"] = optimizer;
  ojson schedule;
  schedule["max_epochs"] = c.train.schedule.max_epochs;
  schedule["warmup_epochs"] = c.train.schedule.warmup_epochs;
  schedule["batch_size"] = c.train.schedule.batch_size;
  train["schedule"] = schedule;
  ojson weights;
  weights["lambda_h"] = c.train.weights.lambda_h;
  weights["lambda_n"] = c.train.weights.lambda_n;
  train["weights"] = weights;
  train["noisy_strategy"] = c.train.noisy_strategy;
  train["augment_clean_hard"] = c.train.augment_clean_hard;
  ojson augs = ojson::array();
  for (const auto& a : c.train.augmentations) augs.push_back(augmentation_to_json(a));
  train["augmentations"] = augs;
  train["criterion"] = c.train.criterion;
  train["small_loss_keep"] = c.train.small_loss_keep;
  train["gmm_tau"] = c.train.gmm_tau;
  j["train"] = train;

  return j.dump(2) + "\n";
}

void ExperimentConfig::validate(bool allow_ablation) const {
  // data
  if (data.source == "blobs") {
    try {
      data.blobs.validate();
    } catch (const std::exception& e) {
      throw ConfigError("data.blobs", e.what());
    }
  } else if (data.source == "two_moons") {
    if (data.moons_n < 2 || data.moons_n % 2 != 0)
      throw ConfigError("data.moons.n", "must be even and >= 2");
    if (data.moons_noise < 0.0) throw ConfigError("data.moons.noise", "must be >= 0");
  } else if (data.source == "csv") {
    if (data.csv_path.empty()) throw ConfigError("data.csv_path", "required for csv source");
  } else {
    throw ConfigError("data.source", "unknown source '" + data.source +
                      "' (expected blobs|two_moons|csv)");
  }
  if (!(data.test_fraction > 0.0 && data.test_fraction < 1.0))
    throw ConfigError("data.test_fraction", "must be in (0,1)");

  // class count is only known up front for generated sources
  int known_classes = 0;
  if (data.source == "blobs") known_classes = data.blobs.class_count;
  if (data.source == "two_moons") known_classes = 2;

  // noise
  if (noise.kind == "none") {
    // nothing to check
  } else if (noise.kind == "symmetric" || noise.kind == "pairflip" ||
             noise.kind == "realistic") {
    if (noise.ratio < 0.0 || noise.ratio >= 1.0)
      throw ConfigError("noise.ratio", "must be in [0,1)");
    if (noise.kind == "pairflip" && noise.ratio >= 0.5)
      throw ConfigError("noise.ratio", "pairflip noise requires ratio < 0.5");
    if (noise.kind == "pairflip" && !noise.pairflip_partner.empty() && known_classes > 0 &&
        static_cast<int>(noise.pairflip_partner.size()) != known_classes)
      throw ConfigError("noise.pairflip_partner",
                        "size must match the class count (" + std::to_string(known_classes) + ")");
    if (noise.kind == "realistic") {
      RealisticNoiseSpec spec;
      spec.top_k = noise.top_k;
      spec.tier_weights = noise.tier_weights;
      spec.noise_ratio = noise.ratio;
      try {
        spec.validate();
      } catch (const std::exception& e) {
        throw ConfigError("noise", e.what());
      }
      if (known_classes > 0 && noise.top_k > known_classes * (known_classes - 1) / 2)
        throw ConfigError("noise.top_k",
                          "only " + std::to_string(known_classes * (known_classes - 1) / 2) +
                          " class pairs exist for " + std::to_string(known_classes) + " classes");
    }
  } else if (noise.kind == "matrix_csv") {
    if (noise.matrix_csv_path.empty())
      throw ConfigError("noise.matrix_csv_path", "required for matrix_csv noise");
  } else {
    throw ConfigError("noise.kind", "unknown kind '" + noise.kind +
                      "' (expected none|symmetric|pairflip|realistic|matrix_csv)");
  }

  // model
  if (model.hidden.empty()) throw ConfigError("model.hidden", "need at least one hidden layer");
  for (int h : model.hidden)
    if (h < 1) throw ConfigError("model.hidden", "hidden sizes must be positive");
  try {
    activation_from_name(model.activation);
  } catch (const std::exception& e) {
    throw ConfigError("model.activation", e.what());
  }

  // train
  try {
    train.optimizer.validate();
  } catch (const std::exception& e) {
    throw ConfigError("train.optimizer", e.what());
  }
  try {
    train.schedule.validate();
  } catch (const std::exception& e) {
    throw ConfigError("train.schedule", e.what());
  }
  try {
    train.weights.validate(allow_ablation);
  } catch (const std::exception& e) {
    // the range validator names the offending weight in its message
    const std::string msg = e.what();
    std::string field = "train.weights";
    if (msg.find("lambda_h") != std::string::npos)
      field = "train.weights.lambda_h";
    else if (msg.find("lambda_n") != std::string::npos)
      field = "train.weights.lambda_n";
    throw ConfigError(field, msg);
  }
  try {
    noisy_strategy_from_name(train.noisy_strategy);
  } catch (const std::exception& e) {
    throw ConfigError("train.noisy_strategy", e.what());
  }
  try {
    criterion_from_name(train.criterion);
  } catch (const std::exception& e) {
    throw ConfigError("train.criterion", e.what());
  }
  for (std::size_t i = 0; i < train.augmentations.size(); ++i) {
    try {
      train.augmentations[i].validate();
    } catch (const std::exception& e) {
      throw ConfigError("train.augmentations[" + std::to_string(i) + "]", e.what());
    }
  }
  if (train.small_loss_keep == 0.0 || train.small_loss_keep > 1.0)
    throw ConfigError("train.small_loss_keep", "must be in (0,1] or negative for the default");
  if (train.gmm_tau < 0.0 || train.gmm_tau > 1.0)
    throw ConfigError("train.gmm_tau", "must be in [0,1]");
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

void save_config(const ExperimentConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("<file>", "cannot write " + path);
  out << config_to_json(config);
  if (!out) throw ConfigError("<file>", "write failed for " + path);
}

}  // namespace tripartite
