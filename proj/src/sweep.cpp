#include "msc/sweep.hpp"

#include <cmath>
#include <string>
#include <thread>

namespace msc {

MatchedRates match_rates(const RatePoint& point, std::size_t d) {
  if (point.mask_bits < 1 || point.mask_bits > kMaxFieldBits)
    throw ParameterError("match_rates: mask_bits out of range");
  if (point.k2 < 1 || point.k2 > d)
    throw ParameterError("match_rates: k2 out of range");
  const std::uint64_t total_bits =
      static_cast<std::uint64_t>(point.mask_bits) * d +
      static_cast<std::uint64_t>(kValueBits) * point.k2;
  // q1*d = b*d + 32*k2 must give an integral bit width.
  if (total_bits % d != 0)
    throw ParameterError("match_rates: point (b=" +
                         std::to_string(point.mask_bits) +
                         ", k2=" + std::to_string(point.k2) +
                         ") gives a fractional QU bit width");
  const std::uint64_t q1 = total_bits / d;
  if (q1 < 1 || q1 > kMaxFieldBits)
    throw ParameterError("match_rates: matched q1 out of range");
  // d + 32*k1 = b*d + 32*k2 must give an integral k1 <= d.
  const std::uint64_t sp_value_bits = total_bits - d;
  if (sp_value_bits % kValueBits != 0)
    throw ParameterError("match_rates: point (b=" +
                         std::to_string(point.mask_bits) +
                         ", k2=" + std::to_string(point.k2) +
                         ") gives a fractional SP retained count");
  const std::uint64_t k1 = sp_value_bits / kValueBits;
  if (k1 < 1 || k1 > d)
    throw ParameterError("match_rates: matched k1 out of range");

  MatchedRates m;
  m.b = point.mask_bits;
  m.k2 = point.k2;
  m.q1 = static_cast<std::uint32_t>(q1);
  m.k1 = static_cast<std::uint32_t>(k1);
  m.k_rt = m.k1;
  m.rate = 1.0 - static_cast<double>(total_bits) /
                     (static_cast<double>(kValueBits) * static_cast<double>(d));
  return m;
}

namespace {

double ratio_for_k(std::size_t k, std::size_t d) {
  // Chosen so derived_k(r, d) lands exactly on k for the d used here.
  return 1.0 - static_cast<double>(k) / static_cast<double>(d);
}

struct Accum {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t n = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++n;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  double stddev() const {
    if (n < 2) return 0.0;
    const double m = mean();
    return std::sqrt(std::max(0.0, sum_sq / static_cast<double>(n) - m * m));
  }
};

}  // namespace

std::vector<SweepRow> run_error_sweep(std::size_t d,
                                      std::span<const RatePoint> points,
                                      std::size_t vectors, std::uint64_t seed,
                                      unsigned threads) {
  if (points.empty()) throw ParameterError("error sweep needs rate points");
  if (vectors < 1) throw ParameterError("error sweep needs vectors >= 1");
  std::vector<MatchedRates> matched;
  matched.reserve(points.size());
  for (const RatePoint& pt : points) matched.push_back(match_rates(pt, d));

  constexpr Codec codecs[] = {Codec::MS, Codec::SP, Codec::QU, Codec::RT};
  const std::size_t cells = matched.size() * 4;
  std::vector<Accum> acc(cells);

  const auto run_cell = [&](std::size_t cell) {
    const MatchedRates& m = matched[cell / 4];
    const Codec codec = codecs[cell % 4];
    CodecConfig cfg;
    cfg.codec = codec;
    switch (codec) {
      case Codec::MS:
        cfg.sparsification_ratio = ratio_for_k(m.k2, d);
        cfg.mask_bits = m.b;
        break;
      case Codec::SP:
        cfg.sparsification_ratio = ratio_for_k(m.k1, d);
        break;
      case Codec::QU:
        cfg.quant_bits = m.q1;
        break;
      case Codec::RT:
        cfg.sparsification_ratio = ratio_for_k(m.k_rt, d);
        break;
    }
    for (std::size_t v = 0; v < vectors; ++v) {
      SeededRng rng(mix_seed(seed, v));  // same vector across codecs/points
      const FeatureMap x = synthetic_activations(d, rng);
      if (codec == Codec::RT) cfg.seed = mix_seed(seed, v, 0x5254);
      const FeatureMap rebuilt = decode(encode(x, cfg));
      acc[cell].add(l2_distance(x, rebuilt));
    }
  };

  unsigned workers = threads == 0 ? std::thread::hardware_concurrency() : threads;
  workers = std::max(1u, std::min<unsigned>(workers, cells));
  if (workers == 1) {
    for (std::size_t cell = 0; cell < cells; ++cell) run_cell(cell);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t cell = t; cell < cells; cell += workers)
          run_cell(cell);
      });
    }
    for (std::thread& th : pool) th.join();
  }

  std::vector<SweepRow> rows;
  rows.reserve(cells);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const MatchedRates& m = matched[cell / 4];
    SweepRow row;
    row.codec = codecs[cell % 4];
    row.compression_rate = m.rate;
    row.mean_abs_error = acc[cell].mean();
    row.std_abs_error = acc[cell].stddev();
    row.d = d;
    row.seed_count = vectors;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace msc
