#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "msc/codec.hpp"

namespace msc {

/// One matched-rate point, specified by the MS parameters. SP, QU and RT
/// settings follow from the equal-rate constraints
///   q1*d = b*d + 32*k2   and   d + 32*k1 = b*d + 32*k2,
/// with RT compared at SP's rate (k_rt = k1).
struct RatePoint {
  std::uint32_t mask_bits = 2;  // b
  std::uint32_t k2 = 0;
};

struct MatchedRates {
  std::uint32_t b = 0;
  std::uint32_t k2 = 0;
  std::uint32_t q1 = 0;
  std::uint32_t k1 = 0;
  std::uint32_t k_rt = 0;
  double rate = 0.0;  // shared compression rate
};

/// Derives the matched settings; throws ParameterError when the point does
/// not yield integral q1/k1 or they fall out of range.
MatchedRates match_rates(const RatePoint& point, std::size_t d);

struct SweepRow {
  Codec codec = Codec::MS;
  double compression_rate = 0.0;
  double mean_abs_error = 0.0;
  double std_abs_error = 0.0;
  std::size_t d = 0;
  std::size_t seed_count = 0;
};

/// Mean/std l2 reconstruction error of each codec over `vectors` synthetic
/// post-ReLU feature maps at each matched-rate point. Rows are ordered by
/// (point index, codec id). `threads` caps worker threads (0 = all cores).
std::vector<SweepRow> run_error_sweep(std::size_t d,
                                      std::span<const RatePoint> points,
                                      std::size_t vectors, std::uint64_t seed,
                                      unsigned threads = 1);

}  // namespace msc
