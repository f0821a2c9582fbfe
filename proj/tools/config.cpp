#include "config.hpp"

#include <fstream>
#include <set>
#include <string>

namespace msc::cli {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const char* where) {
  for (const auto& item : j.items()) {
    if (!known.contains(item.key()))
      throw ParameterError(std::string("unknown key '") + item.key() +
                           "' in " + where);
  }
}

}  // namespace

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw ParameterError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParameterError(std::string("config parse error: ") + e.what());
  }
  return j;
}

CodecConfig codec_from_json(const json& j) {
  reject_unknown_keys(
      j, {"codec", "r", "b", "q", "sign_mode", "seed", "stochastic_rounding"},
      "codec config");
  CodecConfig cfg;
  const std::string name = j.at("codec").get<std::string>();
  if (name == "ms") cfg.codec = Codec::MS;
  else if (name == "sp") cfg.codec = Codec::SP;
  else if (name == "qu") cfg.codec = Codec::QU;
  else if (name == "rt") cfg.codec = Codec::RT;
  else throw ParameterError("unknown codec name: " + name);
  cfg.sparsification_ratio = j.value("r", cfg.sparsification_ratio);
  cfg.mask_bits = j.value("b", cfg.mask_bits);
  cfg.quant_bits = j.value("q", cfg.quant_bits);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.stochastic_rounding =
      j.value("stochastic_rounding", cfg.stochastic_rounding);
  const std::string sign = j.value("sign_mode", std::string("nonneg"));
  if (sign == "nonneg") cfg.sign_mode = SignMode::NonNegativeOnly;
  else if (sign == "signbit") cfg.sign_mode = SignMode::SignBit;
  else throw ParameterError("sign_mode must be 'nonneg' or 'signbit'");
  return cfg;
}

json codec_to_json(const CodecConfig& cfg) {
  json j;
  j["codec"] = to_string(cfg.codec);
  j["r"] = cfg.sparsification_ratio;
  j["b"] = cfg.mask_bits;
  j["q"] = cfg.quant_bits;
  j["sign_mode"] =
      cfg.sign_mode == SignMode::SignBit ? "signbit" : "nonneg";
  j["seed"] = cfg.seed;
  j["stochastic_rounding"] = cfg.stochastic_rounding;
  return j;
}

ErrorSweepConfig error_sweep_from_json(const json& j) {
  reject_unknown_keys(j, {"d", "vectors", "seed", "points"},
                      "error-sweep config");
  ErrorSweepConfig cfg;
  cfg.d = j.value("d", cfg.d);
  cfg.vectors = j.value("vectors", cfg.vectors);
  cfg.seed = j.value("seed", cfg.seed);
  if (!j.contains("points"))
    throw ParameterError("error-sweep config needs a 'points' list");
  for (const json& pj : j.at("points")) {
    reject_unknown_keys(pj, {"b", "k2"}, "rate point");
    RatePoint pt;
    pt.mask_bits = pj.at("b").get<std::uint32_t>();
    pt.k2 = pj.at("k2").get<std::uint32_t>();
    cfg.points.push_back(pt);
  }
  if (cfg.points.empty())
    throw ParameterError("error-sweep config needs at least one point");
  return cfg;
}

json error_sweep_to_json(const ErrorSweepConfig& cfg) {
  json j;
  j["d"] = cfg.d;
  j["vectors"] = cfg.vectors;
  j["seed"] = cfg.seed;
  j["points"] = json::array();
  for (const RatePoint& pt : cfg.points)
    j["points"].push_back({{"b", pt.mask_bits}, {"k2", pt.k2}});
  return j;
}

TrainConfig train_from_json(const json& j) {
  reject_unknown_keys(
      j,
      {"task", "clients", "rounds", "learning_rate", "seed", "batch_size",
       "input_dim", "hidden_dim", "output_dim", "input_tail", "label_noise",
       "divergence_limit", "target_loss", "codec"},
      "train config");
  TrainConfig cfg;
  const std::string task = j.value("task", std::string("regression"));
  if (task == "regression") cfg.sim.task = Task::SyntheticRegression;
  else if (task == "moons") cfg.sim.task = Task::TwoClassMoons;
  else throw ParameterError("task must be 'regression' or 'moons'");
  cfg.sim.n_clients = j.value("clients", cfg.sim.n_clients);
  cfg.sim.rounds = j.value("rounds", cfg.sim.rounds);
  cfg.sim.learning_rate = j.value("learning_rate", cfg.sim.learning_rate);
  cfg.sim.seed = j.value("seed", cfg.sim.seed);
  cfg.sim.batch_size = j.value("batch_size", cfg.sim.batch_size);
  cfg.sim.input_dim = j.value("input_dim", cfg.sim.input_dim);
  cfg.sim.hidden_dim = j.value("hidden_dim", cfg.sim.hidden_dim);
  cfg.sim.output_dim = j.value("output_dim", cfg.sim.output_dim);
  cfg.sim.input_tail = j.value("input_tail", cfg.sim.input_tail);
  cfg.sim.label_noise = j.value("label_noise", cfg.sim.label_noise);
  cfg.sim.divergence_limit =
      j.value("divergence_limit", cfg.sim.divergence_limit);
  if (j.contains("target_loss"))
    cfg.target_loss = j.at("target_loss").get<double>();
  if (j.contains("codec") && !j.at("codec").is_null())
    cfg.sim.codec = codec_from_json(j.at("codec"));
  return cfg;
}

json train_to_json(const TrainConfig& cfg) {
  json j;
  j["task"] =
      cfg.sim.task == Task::TwoClassMoons ? "moons" : "regression";
  j["clients"] = cfg.sim.n_clients;
  j["rounds"] = cfg.sim.rounds;
  j["learning_rate"] = cfg.sim.learning_rate;
  j["seed"] = cfg.sim.seed;
  j["batch_size"] = cfg.sim.batch_size;
  j["input_dim"] = cfg.sim.input_dim;
  j["hidden_dim"] = cfg.sim.hidden_dim;
  j["output_dim"] = cfg.sim.output_dim;
  j["input_tail"] = cfg.sim.input_tail;
  j["label_noise"] = cfg.sim.label_noise;
  j["divergence_limit"] = cfg.sim.divergence_limit;
  if (cfg.target_loss) j["target_loss"] = *cfg.target_loss;
  j["codec"] = cfg.sim.codec ? codec_to_json(*cfg.sim.codec) : json(nullptr);
  return j;
}

}  // namespace msc::cli
