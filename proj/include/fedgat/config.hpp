#pragma once

// Experiment configuration: one JSON document covering generator, model,
// federation, privacy, attack, and anomaly settings. Parsing is strict —
// unknown keys anywhere are rejected — and a single master_seed fans out to
// every seeded component, so a config file plus a seed fully determines a
// run. The resolved document round-trips byte-identically.

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "fedgat/anomaly.hpp"
#include "fedgat/fed.hpp"
#include "fedgat/synthgen.hpp"

namespace fedgat {

inline constexpr int kConfigSchemaVersion = 1;

struct AnomalyConfig {
  double plant_fraction = 0.0;   // 0 disables planting
  double plant_magnitude = 3.0;  // shift norm, in units of class_separation
  double threshold_quantile = -1.0;  // <0: derive from plant_fraction (else mean+2sd)
  ScoreMetric metric = ScoreMetric::kSquaredDeviation;
};

inline void validate_anomaly(const AnomalyConfig& cfg) {
  if (cfg.plant_fraction < 0.0 || cfg.plant_fraction >= 1.0)
    throw std::invalid_argument("anomaly: plant_fraction must be in [0,1)");
  if (cfg.plant_fraction > 0.0 && !(cfg.plant_magnitude > 0.0))
    throw std::invalid_argument("anomaly: plant_magnitude must be > 0");
  if (cfg.threshold_quantile >= 1.0)
    throw std::invalid_argument("anomaly: threshold_quantile must be < 1");
}

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::string out_dir;  // empty: the CLI derives one from the command
  std::uint64_t master_seed = 42;
  GenSpec gen;
  FedConfig fed;  // carries dp, attack, and model hyperparameters
  AnomalyConfig anomaly;
};

// master_seed is the only seed a config file carries; push it into every
// component and keep the generator's shape fields in lockstep with the model.
inline void resolve_config(ExperimentConfig& cfg) {
  cfg.gen.seed = cfg.master_seed;
  cfg.gen.feature_dim = cfg.fed.hyper.feature_dim;
  cfg.gen.num_classes = cfg.fed.hyper.num_classes;
  cfg.fed.master_seed = cfg.master_seed;
  cfg.fed.dp.seed = cfg.master_seed;
  cfg.fed.attack.seed = cfg.master_seed;
}

inline void validate_config(const ExperimentConfig& cfg) {
  if (cfg.schema_version != kConfigSchemaVersion)
    throw std::invalid_argument("config: unsupported schema_version " +
                                std::to_string(cfg.schema_version));
  validate_spec(cfg.gen);
  validate_fed(cfg.fed);
  validate_anomaly(cfg.anomaly);
}

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const char* section,
                           std::initializer_list<const char*> allowed) {
  if (!j.is_object())
    throw std::invalid_argument(std::string("config: ") + section + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (key == a) {
        known = true;
        break;
      }
    if (!known)
      throw std::invalid_argument(std::string("config: unknown key \"") + key + "\" in " + section);
  }
}

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

template <typename T, typename FromString>
void read_enum(const nlohmann::json& j, const char* key, T& out, FromString from) {
  if (j.contains(key)) out = from(j.at(key).get<std::string>());
}

}  // namespace detail

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["schema_version"] = cfg.schema_version;
  j["out_dir"] = cfg.out_dir;
  j["master_seed"] = cfg.master_seed;
  j["gen"] = {{"num_nodes", cfg.gen.num_nodes},
              {"num_nodes_min", cfg.gen.num_nodes_min},
              {"num_nodes_max", cfg.gen.num_nodes_max},
              {"target_avg_degree", cfg.gen.target_avg_degree},
              {"threat_fraction", cfg.gen.threat_fraction},
              {"intra_threat_boost", cfg.gen.intra_threat_boost},
              {"class_separation", cfg.gen.class_separation},
              {"feature_noise", cfg.gen.feature_noise},
              {"dirichlet_alpha", cfg.gen.dirichlet_alpha},
              {"train_fraction", cfg.gen.train_fraction}};
  j["model"] = {{"feature_dim", cfg.fed.hyper.feature_dim},
                {"hidden_dim", cfg.fed.hyper.hidden_dim},
                {"num_classes", cfg.fed.hyper.num_classes},
                {"leaky_slope", cfg.fed.hyper.leaky_slope}};
  j["fed"] = {{"num_clients", cfg.fed.num_clients},
              {"rounds", cfg.fed.rounds},
              {"lr", cfg.fed.lr},
              {"local_steps", cfg.fed.local_steps},
              {"batch_nodes", cfg.fed.batch_nodes},
              {"backend", to_string(cfg.fed.backend)},
              {"transport", to_string(cfg.fed.transport)},
              {"robust_mode", to_string(cfg.fed.robust_mode)},
              {"trim_k", cfg.fed.trim_k},
              {"paillier_bits", cfg.fed.paillier_bits}};
  j["dp"] = {{"clip_norm", cfg.fed.dp.clip_norm},
             {"noise_multiplier", cfg.fed.dp.noise_multiplier},
             {"delta", cfg.fed.dp.delta}};
  j["attack"] = {{"malicious_fraction", cfg.fed.attack.malicious_fraction},
                 {"kind", to_string(cfg.fed.attack.kind)},
                 {"flip_fraction", cfg.fed.attack.flip_fraction},
                 {"scale", cfg.fed.attack.scale}};
  j["anomaly"] = {{"plant_fraction", cfg.anomaly.plant_fraction},
                  {"plant_magnitude", cfg.anomaly.plant_magnitude},
                  {"threshold_quantile", cfg.anomaly.threshold_quantile},
                  {"metric", to_string(cfg.anomaly.metric)}};
  return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  detail::reject_unknown(j, "top level",
                         {"schema_version", "out_dir", "master_seed", "gen", "model", "fed", "dp",
                          "attack", "anomaly"});
  ExperimentConfig cfg;
  detail::read_opt(j, "schema_version", cfg.schema_version);
  detail::read_opt(j, "out_dir", cfg.out_dir);
  detail::read_opt(j, "master_seed", cfg.master_seed);
  if (j.contains("gen")) {
    const auto& g = j.at("gen");
    detail::reject_unknown(g, "gen",
                           {"num_nodes", "num_nodes_min", "num_nodes_max", "target_avg_degree",
                            "threat_fraction", "intra_threat_boost", "class_separation",
                            "feature_noise", "dirichlet_alpha", "train_fraction"});
    detail::read_opt(g, "num_nodes", cfg.gen.num_nodes);
    detail::read_opt(g, "num_nodes_min", cfg.gen.num_nodes_min);
    detail::read_opt(g, "num_nodes_max", cfg.gen.num_nodes_max);
    detail::read_opt(g, "target_avg_degree", cfg.gen.target_avg_degree);
    detail::read_opt(g, "threat_fraction", cfg.gen.threat_fraction);
    detail::read_opt(g, "intra_threat_boost", cfg.gen.intra_threat_boost);
    detail::read_opt(g, "class_separation", cfg.gen.class_separation);
    detail::read_opt(g, "feature_noise", cfg.gen.feature_noise);
    detail::read_opt(g, "dirichlet_alpha", cfg.gen.dirichlet_alpha);
    detail::read_opt(g, "train_fraction", cfg.gen.train_fraction);
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    detail::reject_unknown(m, "model", {"feature_dim", "hidden_dim", "num_classes", "leaky_slope"});
    detail::read_opt(m, "feature_dim", cfg.fed.hyper.feature_dim);
    detail::read_opt(m, "hidden_dim", cfg.fed.hyper.hidden_dim);
    detail::read_opt(m, "num_classes", cfg.fed.hyper.num_classes);
    detail::read_opt(m, "leaky_slope", cfg.fed.hyper.leaky_slope);
  }
  if (j.contains("fed")) {
    const auto& f = j.at("fed");
    detail::reject_unknown(f, "fed",
                           {"num_clients", "rounds", "lr", "local_steps", "batch_nodes", "backend",
                            "transport", "robust_mode", "trim_k", "paillier_bits"});
    detail::read_opt(f, "num_clients", cfg.fed.num_clients);
    detail::read_opt(f, "rounds", cfg.fed.rounds);
    detail::read_opt(f, "lr", cfg.fed.lr);
    detail::read_opt(f, "local_steps", cfg.fed.local_steps);
    detail::read_opt(f, "batch_nodes", cfg.fed.batch_nodes);
    detail::read_enum(f, "backend", cfg.fed.backend, backend_from_string);
    detail::read_enum(f, "transport", cfg.fed.transport, transport_from_string);
    detail::read_enum(f, "robust_mode", cfg.fed.robust_mode, robust_mode_from_string);
    detail::read_opt(f, "trim_k", cfg.fed.trim_k);
    detail::read_opt(f, "paillier_bits", cfg.fed.paillier_bits);
  }
  if (j.contains("dp")) {
    const auto& d = j.at("dp");
    detail::reject_unknown(d, "dp", {"clip_norm", "noise_multiplier", "delta"});
    detail::read_opt(d, "clip_norm", cfg.fed.dp.clip_norm);
    detail::read_opt(d, "noise_multiplier", cfg.fed.dp.noise_multiplier);
    detail::read_opt(d, "delta", cfg.fed.dp.delta);
  }
  if (j.contains("attack")) {
    const auto& a = j.at("attack");
    detail::reject_unknown(a, "attack", {"malicious_fraction", "kind", "flip_fraction", "scale"});
    detail::read_opt(a, "malicious_fraction", cfg.fed.attack.malicious_fraction);
    detail::read_enum(a, "kind", cfg.fed.attack.kind, attack_kind_from_string);
    detail::read_opt(a, "flip_fraction", cfg.fed.attack.flip_fraction);
    detail::read_opt(a, "scale", cfg.fed.attack.scale);
  }
  if (j.contains("anomaly")) {
    const auto& a = j.at("anomaly");
    detail::reject_unknown(a, "anomaly",
                           {"plant_fraction", "plant_magnitude", "threshold_quantile", "metric"});
    detail::read_opt(a, "plant_fraction", cfg.anomaly.plant_fraction);
    detail::read_opt(a, "plant_magnitude", cfg.anomaly.plant_magnitude);
    detail::read_opt(a, "threshold_quantile", cfg.anomaly.threshold_quantile);
    detail::read_enum(a, "metric", cfg.anomaly.metric, score_metric_from_string);
  }
  resolve_config(cfg);
  validate_config(cfg);
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config: " + path + ": " + e.what());
  }
  return config_from_json(j);
}

inline void save_config(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << config_to_json(cfg).dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

// Table-scale settings: per-client node counts drawn from the full range,
// the long horizon, calibrated noise, and the masking backend (robust rules
// need per-client visibility, so they keep the plain backend).
inline void apply_paper_scale(ExperimentConfig& cfg) {
  cfg.gen.num_nodes_min = 2000;
  cfg.gen.num_nodes_max = 10000;
  cfg.fed.rounds = 100;
  cfg.fed.dp.noise_multiplier = 1.1;
  if (cfg.fed.robust_mode == RobustMode::kOff) cfg.fed.backend = BackendKind::kMasked;
}

}  // namespace fedgat
