#pragma once

#include <json.hpp>
#include <optional>

#include "msc/slsim.hpp"
#include "msc/sweep.hpp"

namespace msc::cli {

// Experiment configs are JSON documents. Unknown keys are rejected so typos
// cannot silently change a run; every command writes the fully resolved
// config next to its outputs.

struct ErrorSweepConfig {
  std::size_t d = 4096;
  std::size_t vectors = 30;
  std::uint64_t seed = 42;
  std::vector<RatePoint> points;
};

struct TrainConfig {
  SimConfig sim;
  std::optional<double> target_loss;
};

CodecConfig codec_from_json(const nlohmann::json& j);
nlohmann::json codec_to_json(const CodecConfig& cfg);

ErrorSweepConfig error_sweep_from_json(const nlohmann::json& j);
nlohmann::json error_sweep_to_json(const ErrorSweepConfig& cfg);

TrainConfig train_from_json(const nlohmann::json& j);
nlohmann::json train_to_json(const TrainConfig& cfg);

nlohmann::json load_json_file(const std::string& path);

}  // namespace msc::cli
