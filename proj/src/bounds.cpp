#include "msc/bounds.hpp"

#include <cmath>
#include <cstdio>

#include "msc/codec.hpp"

namespace msc {

namespace {

double pow2_minus_one(double q) { return std::exp2(q) - 1.0; }

void check_width(double q, const char* what) {
  if (!(q >= 1.0)) throw ParameterError(std::string(what) + " must be >= 1");
}

}  // namespace

double qu_bound(std::uint64_t d, double q1, double norm_sq) {
  check_width(q1, "q1");
  return std::sqrt(static_cast<double>(d)) / pow2_minus_one(q1) * norm_sq;
}

double sp_bound(std::uint64_t d, std::uint64_t k1, double norm_sq) {
  if (k1 > d) throw ParameterError("sp_bound: k1 must not exceed d");
  if (d == 0) throw ParameterError("sp_bound: d must be positive");
  return static_cast<double>(d - k1) / static_cast<double>(d) * norm_sq;
}

double ms_bound(std::uint64_t d, std::uint64_t k2, double q2, double alpha,
                double norm_sq) {
  if (k2 > d) throw ParameterError("ms_bound: k2 must not exceed d");
  check_width(q2, "q2");
  if (alpha < 0.0 || alpha > 1.0)
    throw ParameterError("ms_bound: alpha must be in [0,1]");
  return alpha * std::sqrt(static_cast<double>(d - k2)) / pow2_minus_one(q2) *
         norm_sq;
}

double compute_alpha(const FeatureMap& x, std::size_t k) {
  validate_feature_map(x);
  const std::size_t d = x.size();
  if (k < 1 || k > d) throw ParameterError("compute_alpha: k out of range");
  const double norm = l2_norm(x);
  if (norm <= 0.0) throw InputError("compute_alpha: zero-norm input");
  const std::vector<std::uint32_t> kept = select_top_k(x.data, k);
  double kept_sq = 0.0;
  for (std::uint32_t i : kept)
    kept_sq += static_cast<double>(x.data[i]) * x.data[i];
  const double filtered_sq = std::max(0.0, norm * norm - kept_sq);
  return std::sqrt(filtered_sq) / norm;
}

DominanceReport dominance_report(const BoundInputs& in) {
  if (in.d == 0) throw ParameterError("dominance_report: d must be positive");
  const double d = static_cast<double>(in.d);
  const double f = static_cast<double>(kValueBits);
  const double lhs_qu = in.q1 * d;
  const double lhs_sp = d + f * static_cast<double>(in.k1);
  const double rhs = in.q2 * d + f * static_cast<double>(in.k2);
  const auto matches = [](double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
  };
  if (!matches(lhs_qu, rhs))
    throw ParameterError("rate constraint violated: q1*d == q2*d + f*k2");
  if (!matches(lhs_sp, rhs))
    throw ParameterError("rate constraint violated: d + f*k1 == q2*d + f*k2");

  DominanceReport rep;
  rep.qu = qu_bound(in.d, in.q1, in.norm_sq);
  rep.sp = sp_bound(in.d, in.k1, in.norm_sq);
  rep.ms = ms_bound(in.d, in.k2, in.q2, in.alpha, in.norm_sq);
  rep.ms_vs_sp = rep.ms < rep.sp;
  rep.ms_vs_qu = rep.ms < rep.qu;
  rep.alpha_lt_half = in.alpha > 0.0 && in.alpha < 0.5;
  rep.k2_over_d = static_cast<double>(in.k2) / d;
  return rep;
}

}  // namespace msc
