#include <fstream>

#include "json.hpp"
#include "specclip/harness.hpp"

namespace specclip {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw ConfigError("config: " + what); }

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    bad(std::string("bad value for '") + key + "'");
  }
}

DataSource parse_source(const std::string& s) {
  if (s == "synthetic_blobs") return DataSource::synthetic_blobs;
  if (s == "csv_tabular") return DataSource::csv_tabular;
  if (s == "mnist_idx") return DataSource::mnist_idx;
  bad("unknown dataset source '" + s + "'");
}

std::string source_name(DataSource s) {
  switch (s) {
    case DataSource::synthetic_blobs: return "synthetic_blobs";
    case DataSource::csv_tabular: return "csv_tabular";
    case DataSource::mnist_idx: return "mnist_idx";
  }
  return "synthetic_blobs";
}

DatasetSpec parse_dataset(const json& j) {
  DatasetSpec d;
  d.source = parse_source(get_or<std::string>(j, "source", "synthetic_blobs"));
  d.path = get_or<std::string>(j, "path", "");
  d.n_train = get_or<std::size_t>(j, "n_train", d.n_train);
  d.n_test = get_or<std::size_t>(j, "n_test", d.n_test);
  d.n_classes = get_or<std::size_t>(j, "n_classes", d.n_classes);
  d.feature_dim = get_or<std::size_t>(j, "feature_dim", d.feature_dim);
  d.separation = get_or<double>(j, "separation", d.separation);
  const std::string norm = get_or<std::string>(j, "normalization", "none");
  if (norm == "none") {
    d.normalization = Normalization::none;
  } else if (norm == "zscore") {
    d.normalization = Normalization::zscore;
  } else {
    bad("unknown normalization '" + norm + "'");
  }
  if (j.contains("subset")) d.subset = j.at("subset").get<std::size_t>();
  if (j.contains("skew")) {
    SkewSpec sk;
    sk.alpha = get_or<double>(j.at("skew"), "alpha", 1.0);
    sk.seed = get_or<std::uint64_t>(j.at("skew"), "seed", 0);
    d.skew = sk;
  }
  return d;
}

json dataset_json(const DatasetSpec& d) {
  json j;
  j["source"] = source_name(d.source);
  j["path"] = d.path;
  j["n_train"] = d.n_train;
  j["n_test"] = d.n_test;
  j["n_classes"] = d.n_classes;
  j["feature_dim"] = d.feature_dim;
  j["separation"] = d.separation;
  j["normalization"] = d.normalization == Normalization::zscore ? "zscore" : "none";
  if (d.subset) j["subset"] = *d.subset;
  if (d.skew) j["skew"] = {{"alpha", d.skew->alpha}, {"seed", d.skew->seed}};
  return j;
}

MlpConfig parse_model(const json& j) {
  MlpConfig m;
  if (!j.contains("layer_sizes")) bad("model.layer_sizes is required");
  m.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
  const std::string act = get_or<std::string>(j, "activation", "relu");
  if (act == "relu") {
    m.activation = Activation::relu;
  } else if (act == "tanh") {
    m.activation = Activation::tanh;
  } else {
    bad("unknown activation '" + act + "'");
  }
  const std::string loss = get_or<std::string>(j, "loss", "softmax_cross_entropy");
  if (loss != "softmax_cross_entropy") bad("unknown loss '" + loss + "'");
  return m;
}

json model_json(const MlpConfig& m) {
  json j;
  j["layer_sizes"] = m.layer_sizes;
  j["activation"] = m.activation == Activation::tanh ? "tanh" : "relu";
  j["loss"] = "softmax_cross_entropy";
  return j;
}

std::optional<TailFitRule> parse_tail_rule(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "auto") return std::nullopt;
    bad("tail_rule must be \"auto\" or an object");
  }
  TailFitRule rule;
  const std::string mode = get_or<std::string>(j, "mode", "top_k");
  if (mode == "top_k") {
    rule.mode = TailFitMode::top_k;
    rule.k = get_or<std::size_t>(j, "k", rule.k);
  } else if (mode == "xmin_threshold") {
    rule.mode = TailFitMode::xmin_threshold;
    rule.lambda_min = get_or<double>(j, "lambda_min", 0.0);
  } else {
    bad("unknown tail rule mode '" + mode + "'");
  }
  rule.min_tail_size = get_or<std::size_t>(j, "min_tail_size", rule.min_tail_size);
  return rule;
}

json tail_rule_json(const std::optional<TailFitRule>& rule) {
  if (!rule) return json("auto");
  json j;
  if (rule->mode == TailFitMode::top_k) {
    j["mode"] = "top_k";
    j["k"] = rule->k;
  } else {
    j["mode"] = "xmin_threshold";
    j["lambda_min"] = rule->lambda_min;
  }
  j["min_tail_size"] = rule->min_tail_size;
  return j;
}

}  // namespace

FullConfig parse_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    bad(std::string("invalid JSON: ") + e.what());
  }

  FullConfig cfg = default_desk_config();
  if (j.contains("dataset")) cfg.dataset = parse_dataset(j.at("dataset"));
  if (j.contains("model")) cfg.train.model = parse_model(j.at("model"));

  if (j.contains("privacy")) {
    const json& p = j.at("privacy");
    cfg.train.privacy.q = get_or<double>(p, "q", cfg.train.privacy.q);
    cfg.train.privacy.sigma = get_or<double>(p, "sigma", cfg.train.privacy.sigma);
    cfg.train.privacy.steps = get_or<std::size_t>(p, "steps", cfg.train.privacy.steps);
    cfg.train.privacy.delta = get_or<double>(p, "delta", cfg.train.privacy.delta);
  }

  if (j.contains("controller")) {
    const json& c = j.at("controller");
    ControllerConfig& cc = cfg.train.controller;
    cfg.train.controller_enabled = get_or<bool>(c, "enabled", cfg.train.controller_enabled);
    cc.zeta_star = get_or<double>(c, "zeta_star", cc.zeta_star);
    cc.r = get_or<double>(c, "r", cc.r);
    cc.kappa = get_or<double>(c, "kappa", cc.kappa);
    cc.beta = get_or<double>(c, "beta", cc.beta);
    cc.probe_period = get_or<std::size_t>(c, "probe_period", cc.probe_period);
    cc.c_min = get_or<double>(c, "c_min", cc.c_min);
    cc.c_max = get_or<double>(c, "c_max", cc.c_max);
    cc.clamp_enabled = get_or<bool>(c, "clamp_enabled", cc.clamp_enabled);
    if (c.contains("probe_layers")) {
      cfg.train.probe.layer_refs = c.at("probe_layers").get<std::vector<std::string>>();
    }
    if (c.contains("tail_rule")) cfg.train.tail_rule = parse_tail_rule(c.at("tail_rule"));
  }

  if (j.contains("trainer")) {
    const json& t = j.at("trainer");
    cfg.train.label = get_or<std::string>(t, "label", cfg.train.label);
    cfg.train.c0 = get_or<double>(t, "c0", cfg.train.c0);
    if (t.contains("lr")) {
      const json& lr = t.at("lr");
      const std::string kind = get_or<std::string>(lr, "type", "constant");
      if (kind == "constant") {
        cfg.train.lr.kind = LrSchedule::Kind::constant;
      } else if (kind == "step_decay") {
        cfg.train.lr.kind = LrSchedule::Kind::step_decay;
      } else {
        bad("unknown lr schedule '" + kind + "'");
      }
      cfg.train.lr.base = get_or<double>(lr, "base", cfg.train.lr.base);
      cfg.train.lr.decay = get_or<double>(lr, "decay", cfg.train.lr.decay);
      cfg.train.lr.every = get_or<std::size_t>(lr, "every", cfg.train.lr.every);
    }
    if (t.contains("seeds")) {
      const json& s = t.at("seeds");
      cfg.train.seeds.init = get_or<std::uint64_t>(s, "init", cfg.train.seeds.init);
      cfg.train.seeds.subsample = get_or<std::uint64_t>(s, "subsample", cfg.train.seeds.subsample);
      cfg.train.seeds.noise = get_or<std::uint64_t>(s, "noise", cfg.train.seeds.noise);
      cfg.train.seeds.data = get_or<std::uint64_t>(s, "data", cfg.train.seeds.data);
    }
  }

  if (j.contains("output")) {
    cfg.out_dir = get_or<std::string>(j.at("output"), "dir", cfg.out_dir);
  }

  // Fail fast: a parsed config must be runnable as-is.
  try {
    cfg.dataset.validate();
    cfg.train.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

FullConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config_json(text);
}

std::string serialize_config(const FullConfig& cfg) {
  json j;
  j["dataset"] = dataset_json(cfg.dataset);
  j["model"] = model_json(cfg.train.model);
  j["privacy"] = {{"q", cfg.train.privacy.q},
                  {"sigma", cfg.train.privacy.sigma},
                  {"steps", cfg.train.privacy.steps},
                  {"delta", cfg.train.privacy.delta}};
  j["controller"] = {{"enabled", cfg.train.controller_enabled},
                     {"zeta_star", cfg.train.controller.zeta_star},
                     {"r", cfg.train.controller.r},
                     {"kappa", cfg.train.controller.kappa},
                     {"beta", cfg.train.controller.beta},
                     {"probe_period", cfg.train.controller.probe_period},
                     {"c_min", cfg.train.controller.c_min},
                     {"c_max", cfg.train.controller.c_max},
                     {"clamp_enabled", cfg.train.controller.clamp_enabled},
                     {"probe_layers", cfg.train.probe.layer_refs},
                     {"tail_rule", tail_rule_json(cfg.train.tail_rule)}};
  json lr;
  lr["type"] = cfg.train.lr.kind == LrSchedule::Kind::constant ? "constant" : "step_decay";
  lr["base"] = cfg.train.lr.base;
  if (cfg.train.lr.kind == LrSchedule::Kind::step_decay) {
    lr["decay"] = cfg.train.lr.decay;
    lr["every"] = cfg.train.lr.every;
  }
  j["trainer"] = {{"label", cfg.train.label},
                  {"c0", cfg.train.c0},
                  {"lr", lr},
                  {"seeds",
                   {{"init", cfg.train.seeds.init},
                    {"subsample", cfg.train.seeds.subsample},
                    {"noise", cfg.train.seeds.noise},
                    {"data", cfg.train.seeds.data}}}};
  j["output"] = {{"dir", cfg.out_dir}};
  return j.dump(2) + "\n";
}

FullConfig default_desk_config() {
  FullConfig cfg;
  cfg.dataset = DatasetSpec{};  // blobs, 8000/2000, 4 classes, dim 20
  cfg.train.label = "run";
  cfg.train.privacy = PrivacyParams{256.0 / 8000.0, 1.1, 250, 1e-5};
  cfg.train.controller = ControllerConfig{};
  cfg.train.controller_enabled = true;
  cfg.train.c0 = 1.0;
  cfg.train.lr = LrSchedule{LrSchedule::Kind::constant, 0.5, 1.0, 0};
  cfg.train.model.layer_sizes = {20, 128, 64, 4};
  cfg.train.model.activation = Activation::relu;
  cfg.train.probe = ProbeSpec{{"fc2"}};
  cfg.train.tail_rule = std::nullopt;
  cfg.train.seeds = SeedPack{};
  cfg.out_dir = "out";
  return cfg;
}

}  // namespace specclip
