#pragma once

#include <cstdint>

#include "msc/tensor.hpp"

namespace msc {

/// Inputs for the closed-form error bounds at one matched-rate setting.
/// Bit widths are real-valued so exact rate matching is expressible for any
/// k2/d (e.g. q1 = q2 + 32*k2/d); integer widths behave identically.
struct BoundInputs {
  std::uint64_t d = 0;
  std::uint64_t k1 = 0;   // SP retained count
  std::uint64_t k2 = 0;   // MS retained count
  double q1 = 0.0;        // QU bit width
  double q2 = 0.0;        // MS mask bit width
  double alpha = 0.0;     // filtered-to-total 2-norm ratio, in [0,1]
  double norm_sq = 1.0;   // |x|^2
};

/// sqrt(d)/(2^q1 - 1) * norm_sq
double qu_bound(std::uint64_t d, double q1, double norm_sq);

/// (d - k1)/d * norm_sq
double sp_bound(std::uint64_t d, std::uint64_t k1, double norm_sq);

/// alpha * sqrt(d - k2)/(2^q2 - 1) * norm_sq
double ms_bound(std::uint64_t d, std::uint64_t k2, double q2, double alpha,
                double norm_sq);

/// l2(values filtered by top-k) / l2(x). Throws InputError for zero-norm x.
double compute_alpha(const FeatureMap& x, std::size_t k);

struct DominanceReport {
  double qu = 0.0;  // evaluated bounds
  double sp = 0.0;
  double ms = 0.0;
  bool ms_vs_sp = false;  // ms bound strictly below sp bound
  bool ms_vs_qu = false;
  // Sufficient-condition flags, reported separately from the actual ordering.
  bool alpha_lt_half = false;
  double k2_over_d = 0.0;
};

/// Evaluates all three bounds under the rate-matching constraints
///   q1*d == q2*d + 32*k2   and   d + 32*k1 == q2*d + 32*k2.
/// Throws ParameterError naming the violated equality.
DominanceReport dominance_report(const BoundInputs& in);

}  // namespace msc
