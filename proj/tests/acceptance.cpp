// Acceptance suite: runs every release criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exits nonzero if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <string>
#include <vector>

#include "commands.hpp"
#include "msc/bounds.hpp"
#include "msc/slsim.hpp"
#include "msc/sweep.hpp"
#include "msc/wire.hpp"
#include "test_util.hpp"

using namespace msc;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Criterion {
  int id;
  std::string name;
  std::function<bool(std::string&)> run;
};

// --- 1. compression-rate arithmetic -----------------------------------------

bool c1_rate_arithmetic(std::string& detail) {
  bool ok = true;
  for (std::size_t d : {1000ull, 6400ull, 128000ull}) {
    CodecConfig ms;
    ms.codec = Codec::MS;
    ms.sparsification_ratio = 0.99;
    ms.mask_bits = 2;
    CodecConfig sp;
    sp.codec = Codec::SP;
    sp.sparsification_ratio = 0.99;
    CodecConfig qu;
    qu.codec = Codec::QU;
    qu.quant_bits = 3;
    ok &= std::abs(compression_rate(ms, d) - 0.9275) <= 1e-12;
    ok &= std::abs(compression_rate(sp, d) - 0.95875) <= 1e-12;
    ok &= std::abs(compression_rate(qu, d) - 0.90625) <= 1e-12;
  }
  detail = "ms=0.9275 sp=0.95875 qu=0.90625 at d in {1000,6400,128000}";
  return ok;
}

// --- 2. storage crossover ----------------------------------------------------

bool c2_crossover(std::string& detail) {
  const auto t0 = Clock::now();
  bool ok = std::abs(crossover_sparsity(32) - 0.96875) <= 1e-15;
  std::size_t checked = 0;
  for (std::uint64_t d : {320ull, 3200ull, 6400ull, 64000ull}) {
    const std::uint64_t k_star = d / 32;
    for (std::uint64_t k = 1; k <= d / 8; ++k) {
      const std::uint64_t mask =
          storage_cost(StorageScheme::Mask, d, k, 1, 32).bits;
      const std::uint64_t kv =
          storage_cost(StorageScheme::KeyValue, d, k, 1, 32).bits;
      if (k < k_star) ok &= kv < mask;        // sparsity above 96.875%
      else if (k > k_star) ok &= mask < kv;   // sparsity below 96.875%
      else ok &= mask == kv;                  // boundary
      ++checked;
    }
  }
  const double dt = seconds_since(t0);
  ok &= dt < 1.0;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%zu (d,k) pairs, %.3fs", checked, dt);
  detail = buf;
  return ok;
}

// --- 3. error ordering on synthetic feature maps ----------------------------

bool c3_error_ordering(std::string& detail) {
  const auto t0 = Clock::now();
  const RatePoint points[] = {{2, 128}, {3, 128}, {3, 256}, {4, 256}, {4, 384}};
  const auto rows = run_error_sweep(4096, points, 30, 20240, 0);
  bool ok = true;
  for (std::size_t p = 0; p < 5; ++p) {
    const double ms = rows[4 * p + 0].mean_abs_error;
    const double sp = rows[4 * p + 1].mean_abs_error;
    const double qu = rows[4 * p + 2].mean_abs_error;
    const double rt = rows[4 * p + 3].mean_abs_error;
    ok &= ms < sp && ms < qu && sp <= rt;
  }
  const double dt = seconds_since(t0);
  ok &= dt < 30.0;
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "5 matched rates x 30 vectors, d=4096, %.2fs", dt);
  detail = buf;
  return ok;
}

// --- 4. per-element dominance ------------------------------------------------

bool c4_dominance(std::string& detail) {
  std::size_t violations = 0;
  const std::size_t d = 128, k = 16;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    const FeatureMap x =
        make_feature_map({d}, testutil::random_nonneg_vector(d, seed));
    CodecConfig sp_cfg;
    sp_cfg.codec = Codec::SP;
    sp_cfg.sparsification_ratio = 1.0 - static_cast<double>(k) / d;
    const double sp_err = l2_distance(x, decode(encode(x, sp_cfg)));
    for (std::uint32_t b = 1; b <= 4; ++b) {
      CodecConfig ms_cfg;
      ms_cfg.codec = Codec::MS;
      ms_cfg.sparsification_ratio = sp_cfg.sparsification_ratio;
      ms_cfg.mask_bits = b;
      const double ms_err = l2_distance(x, decode(encode(x, ms_cfg)));
      if (ms_err > sp_err + 1e-12) ++violations;
    }
  }
  detail = "1000 vectors x b in {1,2,3,4}, violations = " +
           std::to_string(violations);
  return violations == 0;
}

// --- 5. bound soundness ------------------------------------------------------

bool c5_bound_soundness(std::string& detail) {
  std::size_t violations = 0, checks = 0;
  const std::size_t d = 4096;
  const RatePoint points[] = {{2, 128}, {3, 128}, {3, 256}, {4, 256}, {4, 384}};
  for (std::uint64_t v = 0; v < 30; ++v) {
    SeededRng rng(mix_seed(20240, v));
    const FeatureMap x = synthetic_activations(d, rng);
    const double norm_sq = l2_norm(x) * l2_norm(x);
    for (const RatePoint& pt : points) {
      const MatchedRates m = match_rates(pt, d);
      CodecConfig qu;
      qu.codec = Codec::QU;
      qu.quant_bits = m.q1;
      const double qu_err = l2_distance(x, decode(encode(x, qu)));
      if (qu_err * qu_err > qu_bound(d, m.q1, norm_sq) * (1 + 1e-9))
        ++violations;
      CodecConfig sp;
      sp.codec = Codec::SP;
      sp.sparsification_ratio = 1.0 - static_cast<double>(m.k1) / d;
      const double sp_err = l2_distance(x, decode(encode(x, sp)));
      if (sp_err * sp_err > sp_bound(d, m.k1, norm_sq) * (1 + 1e-9))
        ++violations;
      CodecConfig ms;
      ms.codec = Codec::MS;
      ms.sparsification_ratio = 1.0 - static_cast<double>(m.k2) / d;
      ms.mask_bits = m.b;
      const double ms_err = l2_distance(x, decode(encode(x, ms)));
      const double alpha = compute_alpha(x, m.k2);
      if (ms_err * ms_err > ms_bound(d, m.k2, m.b, alpha, norm_sq) * (1 + 1e-9))
        ++violations;
      checks += 3;
    }
  }
  detail = std::to_string(checks) +
           " codec/bound evaluations, violations = " +
           std::to_string(violations);
  return violations == 0;
}

// --- 6. biased-gradient demonstration ---------------------------------------

bool c6_bias_demo(std::string& detail) {
  const BiasProbeReport rep = relu_bias_probe(1000000, 42);
  const double closed_form = 1.0 / std::sqrt(2.0 * 3.14159265358979323846);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "estimate %.5f vs 1/sqrt(2*pi) %.5f",
                rep.mc_estimate, closed_form);
  detail = buf;
  return std::abs(rep.mc_estimate - closed_form) <= 0.01 &&
         rep.relu_of_mean == 0.0;
}

// --- 7. gradient correctness -------------------------------------------------

bool c7_gradients(std::string& detail) {
  const double step = 1e-4, tol = 1e-4;
  std::size_t nets = 0, bad_entries = 0;
  for (std::uint64_t seed = 1; nets < 20 && seed < 200; ++seed) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.n_clients = 1;
    cfg.batch_size = 5;
    cfg.input_dim = 4;
    cfg.hidden_dim = 3;
    cfg.output_dim = 2;
    cfg.input_tail = 0.5;
    cfg.label_noise = 0.1;
    if (seed % 2 == 0) cfg.task = Task::TwoClassMoons;
    SimState state = init_sim(cfg);
    const ClientData& d = state.shards[0];
    const ClientForward probe = client_forward_full(state.model, d.x);
    double min_pre = 1e300;
    for (double v : probe.preact.v) min_pre = std::min(min_pre, std::abs(v));
    if (min_pre < 5e-3) continue;  // FD cannot cross the ReLU kink

    const SplitGradients g = backward_split(state.model, d.x, probe, probe.act,
                                            d.y, state.cfg.task);
    std::vector<double> analytic;
    for (double v : g.client_w.v) analytic.push_back(v);
    for (double v : g.client_b) analytic.push_back(v);
    for (double v : g.server_w.v) analytic.push_back(v);
    for (double v : g.server_b) analytic.push_back(v);

    std::vector<double*> params;
    for (double& v : state.model.client_w.v) params.push_back(&v);
    for (double& v : state.model.client_b) params.push_back(&v);
    for (double& v : state.model.server_w.v) params.push_back(&v);
    for (double& v : state.model.server_b) params.push_back(&v);

    const auto loss_now = [&] {
      const ClientForward fwd = client_forward_full(state.model, d.x);
      return server_forward_loss(state.model, fwd.act, d.y, state.cfg.task);
    };
    for (std::size_t p = 0; p < params.size(); ++p) {
      const double saved = *params[p];
      *params[p] = saved + step;
      const double up = loss_now();
      *params[p] = saved - step;
      const double down = loss_now();
      *params[p] = saved;
      const double fd = (up - down) / (2.0 * step);
      if (std::abs(analytic[p] - fd) > tol * std::max(1.0, std::abs(fd)))
        ++bad_entries;
    }
    ++nets;
  }
  detail = std::to_string(nets) + " nets checked, mismatches = " +
           std::to_string(bad_entries);
  return nets >= 20 && bad_entries == 0;
}

// --- 8. E vs gradient-gap coupling -------------------------------------------

bool c8_gap_coupling(std::string& detail) {
  SimConfig cfg;
  cfg.seed = 77;
  cfg.batch_size = 32;
  cfg.input_dim = 8;
  cfg.hidden_dim = 32;
  cfg.input_tail = 1.0;
  SimState state = init_sim(cfg);
  std::vector<std::optional<CodecConfig>> sweep{std::nullopt};
  for (double r : {0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99}) {
    CodecConfig c;
    c.codec = Codec::MS;
    c.sparsification_ratio = r;
    c.mask_bits = 2;
    sweep.push_back(c);
  }
  const auto rows = gradient_gap_probe(state.model, state.shards[0],
                                       state.cfg.task, sweep);
  const bool lossless_zero =
      rows[0].E == 0.0 && rows[0].gap_server == 0.0 && rows[0].gap_client == 0.0;
  std::vector<double> errs, gaps;
  for (const GapProbeRow& row : rows) {
    errs.push_back(row.E);
    gaps.push_back(row.gap_server);
  }
  const double rho = testutil::spearman(errs, gaps);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "spearman = %.4f, lossless row %s", rho,
                lossless_zero ? "exactly 0" : "NOT zero");
  detail = buf;
  return lossless_zero && rho >= 0.9;
}

// --- 9. convergence ordering -------------------------------------------------

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

bool c9_convergence(std::string& detail) {
  const auto t0 = Clock::now();
  // Matched point (b=5, k2=128) on d = batch*hidden = 4096:
  // q1 = 6, k1 = 640. Rates all equal 1 - (5*4096+32*128)/(32*4096).
  const auto run_final = [&](std::uint64_t seed,
                             std::optional<CodecConfig> codec) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.n_clients = 4;
    cfg.rounds = 400;
    cfg.learning_rate = 1e-3;
    cfg.batch_size = 64;
    cfg.input_dim = 8;
    cfg.hidden_dim = 64;
    cfg.output_dim = 1;
    cfg.input_tail = 1.25;
    cfg.label_noise = 0.4;
    cfg.codec = codec;
    const TrainingTrace trace = train(cfg);
    return trace.diverged ? 1e18 : trace.rounds.back().loss;
  };
  CodecConfig ms;
  ms.codec = Codec::MS;
  ms.sparsification_ratio = 1.0 - 128.0 / 4096.0;
  ms.mask_bits = 5;
  CodecConfig sp;
  sp.codec = Codec::SP;
  sp.sparsification_ratio = 1.0 - 640.0 / 4096.0;
  CodecConfig qu;
  qu.codec = Codec::QU;
  qu.quant_bits = 6;

  std::vector<double> base_f, ms_f, sp_f, qu_f;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    base_f.push_back(run_final(seed, std::nullopt));
    ms_f.push_back(run_final(seed, ms));
    sp_f.push_back(run_final(seed, sp));
    qu_f.push_back(run_final(seed, qu));
  }
  const double mb = median(base_f), mm = median(ms_f), msp = median(sp_f),
               mq = median(qu_f);
  const double dt = seconds_since(t0);
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "medians base=%.4f ms=%.4f sp=%.4f qu=%.4f (ms/base=%.3f), %.1fs",
                mb, mm, msp, mq, mm / mb, dt);
  detail = buf;
  return mb <= mm && mm <= msp && mm <= mq && mm <= 1.05 * mb && dt < 120.0;
}

// --- 10. wire bit-exactness --------------------------------------------------

CompressedPayload random_payload(SeededRng& rng) {
  const std::size_t d = 1 + rng.next_below(300);
  FeatureMap x;
  x.shape = {static_cast<std::uint32_t>(d)};
  x.data.resize(d);
  const bool negatives = rng.next_below(2) == 1;
  for (float& v : x.data) {
    double val = rng.next_normal() * std::exp(rng.next_normal());
    if (!negatives) val = std::abs(val);
    v = static_cast<float>(val);
  }
  CodecConfig cfg;
  cfg.codec = static_cast<Codec>(rng.next_below(4));
  const std::size_t k = 1 + rng.next_below(d);
  cfg.sparsification_ratio =
      std::max(0.0, 1.0 - (static_cast<double>(k) + 0.5) / d);
  cfg.mask_bits = 1 + static_cast<std::uint32_t>(rng.next_below(6));
  cfg.quant_bits = 1 + static_cast<std::uint32_t>(rng.next_below(8));
  cfg.seed = rng.next_u64();
  cfg.sign_mode = negatives || cfg.codec != Codec::MS
                      ? SignMode::SignBit
                      : SignMode::NonNegativeOnly;
  return encode(x, cfg);
}

bool payload_equal(const CompressedPayload& a, const CompressedPayload& b) {
  return a.codec == b.codec && a.shape == b.shape && a.k == b.k &&
         a.mask_bits == b.mask_bits && a.quant_bits == b.quant_bits &&
         a.sign_mode == b.sign_mode && a.top_values == b.top_values &&
         a.mask == b.mask && a.range_min == b.range_min &&
         a.range_max == b.range_max;
}

bool c10_wire(std::string& detail) {
  SeededRng rng(424242);
  std::size_t roundtrip_failures = 0;
  for (int i = 0; i < 10000; ++i) {
    const CompressedPayload p = random_payload(rng);
    const auto bytes = serialize(p);
    if (!payload_equal(p, deserialize(bytes))) ++roundtrip_failures;
  }

  // Golden frames decode to the known tensors.
  std::size_t golden_failures = 0, golden = 0;
  std::ifstream mf(std::string(MSC_TESTDATA_DIR) + "/golden_manifest.json");
  nlohmann::json manifest;
  mf >> manifest;
  std::vector<std::vector<std::uint8_t>> frames;
  for (const auto& c : manifest) {
    std::ifstream in(
        std::string(MSC_TESTDATA_DIR) + "/" + c["frame"].get<std::string>(),
        std::ios::binary);
    std::vector<std::uint8_t> bytes(std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>{});
    frames.push_back(bytes);
    const FeatureMap out = decode(deserialize(bytes));
    const auto want = c["expect_decode"].get<std::vector<float>>();
    ++golden;
    if (out.data != want) ++golden_failures;
  }

  // Mutated frames must produce typed errors or valid payloads, never crash.
  std::size_t mutations = 0;
  for (const auto& frame : frames) {
    for (int trial = 0; trial < 400; ++trial) {
      auto bad = frame;
      const std::size_t mode = rng.next_below(3);
      if (mode == 0 && !bad.empty()) {
        bad[rng.next_below(bad.size())] ^=
            static_cast<std::uint8_t>(1 + rng.next_below(255));
      } else if (mode == 1) {
        bad.resize(rng.next_below(bad.size() + 1));
      } else {
        bad.push_back(static_cast<std::uint8_t>(rng.next_u64()));
      }
      try {
        (void)decode(deserialize(bad));
      } catch (const WireError&) {
      } catch (const CorruptPayloadError&) {
      }
      ++mutations;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "10^4 roundtrips (%zu bad), %zu goldens (%zu bad), %zu "
                "mutations survived",
                roundtrip_failures, golden, golden_failures, mutations);
  detail = buf;
  return roundtrip_failures == 0 && golden_failures == 0 && golden >= 6;
}

// --- 11. encode complexity separation ---------------------------------------

double median_encode_seconds(const FeatureMap& x, const CodecConfig& cfg,
                             int trials) {
  std::vector<double> times;
  for (int t = 0; t < trials; ++t) {
    CodecConfig c = cfg;
    if (c.codec == Codec::RT) c.seed = static_cast<std::uint64_t>(t);
    const auto t0 = Clock::now();
    volatile std::size_t sink = encode(x, c).top_values.size();
    (void)sink;
    times.push_back(seconds_since(t0));
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

bool c11_complexity(std::string& detail) {
  const std::size_t d = 1ull << 16;
  SeededRng rng(7);
  const FeatureMap x = synthetic_activations(d, rng);
  const double k_small = 256.0, k_large = 2048.0;  // 8x

  CodecConfig rt;
  rt.codec = Codec::RT;
  rt.sparsification_ratio = 1.0 - k_small / static_cast<double>(d);
  const double rt_small = median_encode_seconds(x, rt, 11);
  rt.sparsification_ratio = 1.0 - k_large / static_cast<double>(d);
  const double rt_large = median_encode_seconds(x, rt, 11);

  CodecConfig ms;
  ms.codec = Codec::MS;
  ms.mask_bits = 2;
  ms.sparsification_ratio = 1.0 - k_small / static_cast<double>(d);
  const double ms_small = median_encode_seconds(x, ms, 11);
  ms.sparsification_ratio = 1.0 - k_large / static_cast<double>(d);
  const double ms_large = median_encode_seconds(x, ms, 11);

  const double rt_ratio = rt_large / rt_small;
  const double ms_ratio = ms_large / ms_small;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "8x k: RT time x%.2f (>=4 needed), MS time x%.2f (<2 needed)",
                rt_ratio, ms_ratio);
  detail = buf;
  return rt_ratio >= 4.0 && ms_ratio < 2.0;
}

// --- 12. deterministic outputs -----------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>{});
}

bool c12_determinism(std::string& detail) {
  const fs::path tmp =
      fs::temp_directory_path() / ("msc_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(tmp);

  cli::ErrorSweepConfig sweep_cfg;
  sweep_cfg.d = 1024;
  sweep_cfg.vectors = 6;
  sweep_cfg.seed = 13;
  sweep_cfg.points = {{2, 32}, {3, 64}};
  cli::cmd_error_sweep(sweep_cfg, tmp / "a", 1);
  cli::cmd_error_sweep(sweep_cfg, tmp / "b", 3);

  cli::TrainConfig train_cfg;
  train_cfg.sim.seed = 5;
  train_cfg.sim.rounds = 30;
  train_cfg.sim.n_clients = 2;
  train_cfg.sim.batch_size = 16;
  train_cfg.sim.input_dim = 4;
  train_cfg.sim.hidden_dim = 16;
  train_cfg.sim.input_tail = 0.8;
  CodecConfig mcfg;
  mcfg.codec = Codec::MS;
  mcfg.sparsification_ratio = 0.875;
  mcfg.mask_bits = 2;
  train_cfg.sim.codec = mcfg;
  cli::cmd_train(train_cfg, tmp / "ta");
  cli::cmd_train(train_cfg, tmp / "tb");

  const bool sweep_same =
      slurp(tmp / "a" / "error_sweep.csv") == slurp(tmp / "b" / "error_sweep.csv");
  const bool trace_same =
      slurp(tmp / "ta" / "trace.csv") == slurp(tmp / "tb" / "trace.csv") &&
      slurp(tmp / "ta" / "summary.csv") == slurp(tmp / "tb" / "summary.csv");
  std::error_code ec;
  fs::remove_all(tmp, ec);
  detail = std::string("error-sweep ") + (sweep_same ? "identical" : "DIFFERS") +
           ", train " + (trace_same ? "identical" : "DIFFERS");
  return sweep_same && trace_same;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "compression-rate arithmetic (92.75% / 95.875% / 90.625%)",
       c1_rate_arithmetic},
      {2, "mask vs key-value storage crossover at 96.875%", c2_crossover},
      {3, "error ordering MS<SP, MS<QU, SP<=RT at matched rates",
       c3_error_ordering},
      {4, "per-element MS-over-SP dominance, zero violations", c4_dominance},
      {5, "measured errors never exceed the closed-form bounds",
       c5_bound_soundness},
      {6, "E[relu(Z)] vs relu(E[Z]) Monte Carlo demonstration", c6_bias_demo},
      {7, "analytic split gradients match finite differences", c7_gradients},
      {8, "rank correlation between E and the server gradient gap",
       c8_gap_coupling},
      {9, "convergence ordering baseline<=MS<=SP/QU at matched rates",
       c9_convergence},
      {10, "wire roundtrips, golden frames, fuzz robustness", c10_wire},
      {11, "RT vs MS encode-time scaling separation", c11_complexity},
      {12, "byte-identical error-sweep and train reruns", c12_determinism},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (!ok) ++failures;
    std::printf("[%s] criterion %2d: %s — %s\n", ok ? "PASS" : "FAIL", c.id,
                c.name.c_str(), detail.c_str());
    std::fflush(stdout);
  }
  if (failures == 0) {
    std::printf("all %zu criteria passed\n", criteria.size());
  } else {
    std::printf("%d criteria FAILED\n", failures);
  }
  return failures == 0 ? 0 : 1;
}
