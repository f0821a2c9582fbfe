#include <CLI11.hpp>
#include <cstdio>

#include "commands.hpp"

using namespace msc;
using namespace msc::cli;

int main(int argc, char** argv) {
  CLI::App app{"masksparse: mask-encoded sparsification toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed_flag = 0;
  bool seed_set = false;

  auto* sweep = app.add_subcommand(
      "error-sweep", "Codec error comparison over matched compression rates");
  sweep->add_option("--config", config_path, "JSON experiment config")
      ->required();
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--seed", seed_flag, "override the config seed")
      ->each([&seed_set](const std::string&) { seed_set = true; });

  auto* train_cmd = app.add_subcommand(
      "train", "Split-learning simulation producing a training trace");
  train_cmd->add_option("--config", config_path, "JSON experiment config")
      ->required();
  train_cmd->add_option("--out", out_dir, "output directory");
  train_cmd->add_option("--seed", seed_flag, "override the config seed")
      ->each([&seed_set](const std::string&) { seed_set = true; });

  BoundsArgs bargs;
  auto* bounds_cmd = app.add_subcommand(
      "bounds", "Closed-form error bounds and the dominance report");
  bounds_cmd->add_option("--d", bargs.d, "feature map length")->required();
  bounds_cmd->add_option("--k1", bargs.k1, "SP retained count")->required();
  bounds_cmd->add_option("--k2", bargs.k2, "MS retained count")->required();
  bounds_cmd->add_option("--q1", bargs.q1, "QU bit width")->required();
  bounds_cmd->add_option("--q2", bargs.q2, "MS mask bit width")->required();
  bounds_cmd->add_option("--alpha", bargs.alpha, "filtered-norm ratio")
      ->required();
  bounds_cmd->add_option("--norm-sq", bargs.norm_sq, "|x|^2 scale");

  std::size_t samples = 1000000;
  std::uint64_t bias_seed = 1;
  auto* bias_cmd = app.add_subcommand(
      "bias-demo", "Monte Carlo demonstration that E[relu(Z)] != relu(E[Z])");
  bias_cmd->add_option("--samples", samples, "Monte Carlo sample count");
  bias_cmd->add_option("--seed", bias_seed, "sampling seed");

  EncodeArgs eargs;
  std::string codec_name = "ms";
  double ratio = 0.99;
  std::uint32_t b_flag = 2, q_flag = 3;
  bool sign_bit = false;
  std::uint64_t rt_seed = 0;
  auto* enc_cmd =
      app.add_subcommand("encode", "Compress a raw tensor file into a frame");
  enc_cmd->add_option("input", eargs.input, "input tensor file")->required();
  enc_cmd->add_option("output", eargs.output, "output frame file")->required();
  enc_cmd->add_option("--codec", codec_name, "ms|sp|qu|rt");
  enc_cmd->add_option("--r", ratio, "sparsification ratio");
  enc_cmd->add_option("--b", b_flag, "MS mask bit width");
  enc_cmd->add_option("--q", q_flag, "QU bit width");
  enc_cmd->add_flag("--sign-bit", sign_bit, "MS sign-bit mode");
  enc_cmd->add_option("--seed", rt_seed, "RT sampling seed");

  DecodeArgs dargs;
  std::string ref_path;
  auto* dec_cmd =
      app.add_subcommand("decode", "Reconstruct a tensor file from a frame");
  dec_cmd->add_option("input", dargs.input, "input frame file")->required();
  dec_cmd->add_option("output", dargs.output, "output tensor file")->required();
  dec_cmd->add_option("--ref", ref_path,
                      "original tensor, prints the error report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (sweep->parsed()) {
      ErrorSweepConfig cfg =
          error_sweep_from_json(load_json_file(config_path));
      if (seed_set) cfg.seed = seed_flag;
      return cmd_error_sweep(cfg, out_dir, sweep_threads_from_env());
    }
    if (train_cmd->parsed()) {
      TrainConfig cfg = train_from_json(load_json_file(config_path));
      if (seed_set) cfg.sim.seed = seed_flag;
      return cmd_train(cfg, out_dir);
    }
    if (bounds_cmd->parsed()) return cmd_bounds(bargs);
    if (bias_cmd->parsed()) return cmd_bias_demo(samples, bias_seed);
    if (enc_cmd->parsed()) {
      CodecConfig codec;
      if (codec_name == "ms") codec.codec = Codec::MS;
      else if (codec_name == "sp") codec.codec = Codec::SP;
      else if (codec_name == "qu") codec.codec = Codec::QU;
      else if (codec_name == "rt") codec.codec = Codec::RT;
      else throw ParameterError("unknown codec name: " + codec_name);
      codec.sparsification_ratio = ratio;
      codec.mask_bits = b_flag;
      codec.quant_bits = q_flag;
      codec.sign_mode =
          sign_bit ? SignMode::SignBit : SignMode::NonNegativeOnly;
      codec.seed = rt_seed;
      eargs.codec = codec;
      return cmd_encode(eargs);
    }
    if (dec_cmd->parsed()) {
      if (!ref_path.empty()) dargs.reference = ref_path;
      return cmd_decode(dargs);
    }
  } catch (const WireError& e) {
    std::fprintf(stderr, "wire error: %s\n", e.what());
    return kExitWire;
  } catch (const ParameterError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitConfig;
}
