#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "config.hpp"

namespace msc::cli {

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;   // divergence, IO failure
inline constexpr int kExitConfig = 2;    // config/validation problems
inline constexpr int kExitWire = 3;      // wire-format errors

struct EncodeArgs {
  std::string input;
  std::string output;
  CodecConfig codec;
};

struct DecodeArgs {
  std::string input;
  std::string output;
  std::optional<std::string> reference;  // original tensor for an ErrorReport
};

struct BoundsArgs {
  std::uint64_t d = 0;
  std::uint64_t k1 = 0;
  std::uint64_t k2 = 0;
  double q1 = 0.0;
  double q2 = 0.0;
  double alpha = 0.0;
  double norm_sq = 1.0;
};

// Raw tensor file IO: u32 ndims, ndims u32 dims, then row-major f32 data,
// all little-endian.
FeatureMap read_tensor_file(const std::string& path);
void write_tensor_file(const std::string& path, const FeatureMap& x);

int cmd_error_sweep(const ErrorSweepConfig& cfg,
                    const std::filesystem::path& out_dir, unsigned threads);
int cmd_train(const TrainConfig& cfg, const std::filesystem::path& out_dir);
int cmd_bounds(const BoundsArgs& args);
int cmd_bias_demo(std::size_t samples, std::uint64_t seed);
int cmd_encode(const EncodeArgs& args);
int cmd_decode(const DecodeArgs& args);

/// Worker cap for sweep cells: MSC_THREADS when set, else all cores.
unsigned sweep_threads_from_env();

}  // namespace msc::cli
