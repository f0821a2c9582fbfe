#include "commands.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include "msc/bounds.hpp"
#include "msc/wire.hpp"

namespace msc::cli {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out.good())
    throw Error("cannot write output file: " + path.string());
  out << content;
}

void write_resolved_config(const std::filesystem::path& out_dir,
                           const nlohmann::json& j) {
  write_text_file(out_dir / "resolved_config.json", j.dump(1) + "\n");
}

}  // namespace

unsigned sweep_threads_from_env() {
  const char* env = std::getenv("MSC_THREADS");
  if (env == nullptr) return 0;  // all cores
  const long v = std::strtol(env, nullptr, 10);
  return v > 0 ? static_cast<unsigned>(v) : 1u;
}

FeatureMap read_tensor_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) throw InputError("cannot open tensor file: " + path);
  auto read_u32 = [&in, &path]() {
    std::uint8_t raw[4];
    if (!in.read(reinterpret_cast<char*>(raw), 4))
      throw InputError("tensor file truncated: " + path);
    return static_cast<std::uint32_t>(raw[0]) |
           static_cast<std::uint32_t>(raw[1]) << 8 |
           static_cast<std::uint32_t>(raw[2]) << 16 |
           static_cast<std::uint32_t>(raw[3]) << 24;
  };
  const std::uint32_t ndims = read_u32();
  if (ndims < 1 || ndims > 16)
    throw InputError("tensor file has invalid ndims: " + path);
  std::vector<std::uint32_t> shape(ndims);
  std::uint64_t d = 1;
  for (auto& dim : shape) {
    dim = read_u32();
    if (dim == 0) throw InputError("tensor file has a zero dim: " + path);
    d *= dim;
    if (d > (1ull << 31)) throw InputError("tensor file too large: " + path);
  }
  std::vector<float> data(static_cast<std::size_t>(d));
  for (float& v : data) v = std::bit_cast<float>(read_u32());
  char extra;
  if (in.read(&extra, 1))
    throw InputError("tensor file has trailing bytes: " + path);
  return make_feature_map(std::move(shape), std::move(data));
}

void write_tensor_file(const std::string& path, const FeatureMap& x) {
  std::ofstream out(path, std::ios::binary);
  if (!out.good()) throw Error("cannot write tensor file: " + path);
  auto put_u32 = [&out](std::uint32_t v) {
    const std::uint8_t raw[4] = {
        static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
        static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 24)};
    out.write(reinterpret_cast<const char*>(raw), 4);
  };
  put_u32(static_cast<std::uint32_t>(x.shape.size()));
  for (std::uint32_t dim : x.shape) put_u32(dim);
  for (float v : x.data) put_u32(std::bit_cast<std::uint32_t>(v));
}

int cmd_error_sweep(const ErrorSweepConfig& cfg,
                    const std::filesystem::path& out_dir, unsigned threads) {
  std::filesystem::create_directories(out_dir);
  write_resolved_config(out_dir, error_sweep_to_json(cfg));

  const std::vector<SweepRow> rows =
      run_error_sweep(cfg.d, cfg.points, cfg.vectors, cfg.seed, threads);
  std::string csv = "codec,compression_rate,mean_abs_error,std_abs_error,d,seed_count\n";
  for (const SweepRow& r : rows) {
    csv += to_string(r.codec);
    csv += ',' + fmt(r.compression_rate) + ',' + fmt(r.mean_abs_error) + ',' +
           fmt(r.std_abs_error) + ',' + std::to_string(r.d) + ',' +
           std::to_string(r.seed_count) + '\n';
  }
  write_text_file(out_dir / "error_sweep.csv", csv);
  std::printf("wrote %zu rows to %s\n", rows.size(),
              (out_dir / "error_sweep.csv").c_str());
  return kExitOk;
}

int cmd_train(const TrainConfig& cfg, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_resolved_config(out_dir, train_to_json(cfg));

  const TrainingTrace trace = train(cfg.sim);
  write_text_file(out_dir / "trace.csv", trace_to_csv(trace));

  double final_loss = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t total_bytes = 0;
  long rounds_to_target = -1;
  for (const RoundRecord& r : trace.rounds) {
    total_bytes += r.bytes_up;
    final_loss = r.loss;
    if (rounds_to_target < 0 && cfg.target_loss && r.loss <= *cfg.target_loss)
      rounds_to_target = static_cast<long>(r.round);
  }
  std::string summary = "final_loss,total_bytes_up,rounds_to_target\n";
  summary += fmt(final_loss) + ',' + std::to_string(total_bytes) + ',' +
             std::to_string(rounds_to_target) + '\n';
  write_text_file(out_dir / "summary.csv", summary);
  std::printf("%s", summary.c_str());
  if (trace.diverged) {
    std::fprintf(stderr, "run diverged after %zu rounds\n",
                 trace.rounds.size());
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_bounds(const BoundsArgs& args) {
  BoundInputs in;
  in.d = args.d;
  in.k1 = args.k1;
  in.k2 = args.k2;
  in.q1 = args.q1;
  in.q2 = args.q2;
  in.alpha = args.alpha;
  in.norm_sq = args.norm_sq;
  const DominanceReport rep = dominance_report(in);
  std::printf("d = %llu  k1 = %llu  k2 = %llu  q1 = %s  q2 = %s  alpha = %s  "
              "norm_sq = %s\n",
              static_cast<unsigned long long>(in.d),
              static_cast<unsigned long long>(in.k1),
              static_cast<unsigned long long>(in.k2), fmt(in.q1).c_str(),
              fmt(in.q2).c_str(), fmt(in.alpha).c_str(),
              fmt(in.norm_sq).c_str());
  std::printf("qu_bound = %s\n", fmt(rep.qu).c_str());
  std::printf("sp_bound = %s\n", fmt(rep.sp).c_str());
  std::printf("ms_bound = %s\n", fmt(rep.ms).c_str());
  std::printf("MS < SP: %s\n", rep.ms_vs_sp ? "yes" : "no");
  std::printf("MS < QU: %s\n", rep.ms_vs_qu ? "yes" : "no");
  std::printf("theorem-4 sufficient conditions: alpha in (0,1/2): %s; "
              "k2/d = %s\n",
              rep.alpha_lt_half ? "yes" : "no", fmt(rep.k2_over_d).c_str());
  return kExitOk;
}

int cmd_bias_demo(std::size_t samples, std::uint64_t seed) {
  const BiasProbeReport rep = relu_bias_probe(samples, seed);
  const double closed_form = 1.0 / std::sqrt(2.0 * 3.14159265358979323846);
  std::printf("samples = %zu\n", rep.samples);
  std::printf("E[relu(Z)] monte carlo = %s\n", fmt(rep.mc_estimate).c_str());
  std::printf("relu(E[Z]) = %s\n", fmt(rep.relu_of_mean).c_str());
  std::printf("gap = %s\n", fmt(rep.gap).c_str());
  std::printf("closed form 1/sqrt(2*pi) = %s\n", fmt(closed_form).c_str());
  return kExitOk;
}

int cmd_encode(const EncodeArgs& args) {
  const FeatureMap x = read_tensor_file(args.input);
  const CompressedPayload payload = encode(x, args.codec);
  const std::vector<std::uint8_t> frame = serialize(payload);
  std::ofstream out(args.output, std::ios::binary);
  if (!out.good()) throw Error("cannot write frame file: " + args.output);
  out.write(reinterpret_cast<const char*>(frame.data()),
            static_cast<std::streamsize>(frame.size()));

  const FeatureMap rebuilt = decode(payload);
  ErrorReport rep = compression_error(x, rebuilt);
  rep.compression_rate = compression_rate(args.codec, x.size());
  const std::size_t raw_bytes = 4 * x.size();
  std::printf("d = %zu  codec = %s  frame bytes = %zu (raw %zu)\n", x.size(),
              to_string(payload.codec), frame.size(), raw_bytes);
  std::printf("compression_rate (headerless) = %s  with header = %s\n",
              fmt(rep.compression_rate).c_str(),
              fmt(1.0 - static_cast<double>(frame.size()) /
                            static_cast<double>(raw_bytes))
                  .c_str());
  std::printf("abs_error = %s  rel_error = %s\n", fmt(rep.abs_error).c_str(),
              fmt(rep.rel_error).c_str());
  return kExitOk;
}

int cmd_decode(const DecodeArgs& args) {
  std::ifstream in(args.input, std::ios::binary);
  if (!in.good()) throw InputError("cannot open frame file: " + args.input);
  const std::vector<std::uint8_t> bytes(std::istreambuf_iterator<char>(in),
                                        std::istreambuf_iterator<char>{});
  const CompressedPayload payload = deserialize(bytes);
  const FeatureMap rebuilt = decode(payload);
  write_tensor_file(args.output, rebuilt);
  std::printf("decoded %s frame: d = %zu, k = %u\n", to_string(payload.codec),
              rebuilt.size(), payload.k);
  if (args.reference) {
    const FeatureMap ref = read_tensor_file(*args.reference);
    const ErrorReport rep = compression_error(ref, rebuilt);
    std::printf("abs_error = %s  rel_error = %s\n", fmt(rep.abs_error).c_str(),
                fmt(rep.rel_error).c_str());
  }
  return kExitOk;
}

}  // namespace msc::cli
