#include "msc/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace msc {

const char* to_string(Codec c) {
  switch (c) {
    case Codec::MS: return "ms";
    case Codec::SP: return "sp";
    case Codec::QU: return "qu";
    case Codec::RT: return "rt";
  }
  return "?";
}

std::size_t derived_k(double sparsification_ratio, std::size_t d) {
  if (sparsification_ratio < 0.0 || sparsification_ratio >= 1.0)
    throw ParameterError("sparsification ratio must be in [0,1)");
  return static_cast<std::size_t>(
      std::floor((1.0 - sparsification_ratio) * static_cast<double>(d)));
}

namespace {

struct Candidate {
  float mag;
  std::uint32_t index;
};

// Orders candidates strongest-first: larger magnitude wins, equal magnitudes
// keep the lower index.
bool stronger(const Candidate& a, const Candidate& b) {
  if (a.mag != b.mag) return a.mag > b.mag;
  return a.index < b.index;
}

void require_codec(const CodecConfig& cfg, Codec expected) {
  if (cfg.codec != expected)
    throw ParameterError(std::string("config codec is not ") +
                         to_string(expected));
}

std::size_t checked_k(const CodecConfig& cfg, std::size_t d) {
  const std::size_t k = derived_k(cfg.sparsification_ratio, d);
  if (k < 1) throw ParameterError("k = floor((1-r)*d) must be at least 1");
  return k;
}

void check_field_bits(std::uint32_t bits, const char* what) {
  if (bits < 1 || bits > kMaxFieldBits)
    throw ParameterError(std::string(what) + " must be in [1, 24]");
}

}  // namespace

std::vector<std::uint32_t> select_top_k(std::span<const float> values,
                                        std::size_t k) {
  const std::size_t d = values.size();
  if (k < 1 || k > d) throw ParameterError("select_top_k: k out of range");
  // stronger() is a total order (indices are unique), so introselect yields
  // exactly the k strongest with the lower-index tie-break. Expected O(d),
  // within the O(d log k) selection budget.
  std::vector<Candidate> cand;
  cand.reserve(d);
  for (std::uint32_t i = 0; i < d; ++i)
    cand.push_back({std::abs(values[i]), i});
  if (k < d)
    std::nth_element(cand.begin(), cand.begin() + static_cast<long>(k),
                     cand.end(), stronger);
  std::vector<std::uint32_t> idx;
  idx.reserve(k);
  for (std::size_t i = 0; i < k; ++i) idx.push_back(cand[i].index);
  std::sort(idx.begin(), idx.end());
  return idx;
}

CompressedPayload ms_encode(const FeatureMap& x, const CodecConfig& cfg) {
  require_codec(cfg, Codec::MS);
  validate_feature_map(x);
  check_field_bits(cfg.mask_bits, "mask_bits");
  const std::size_t d = x.size();
  const std::size_t k = checked_k(cfg, d);
  const bool signed_mode = cfg.sign_mode == SignMode::SignBit;
  if (!signed_mode) {
    for (float v : x.data)
      if (v < 0.0f)
        throw InputError("negative input in NonNegativeOnly mode");
  }

  const std::vector<std::uint32_t> selected = select_top_k(x.data, k);

  CompressedPayload p;
  p.codec = Codec::MS;
  p.shape = x.shape;
  p.k = static_cast<std::uint32_t>(k);
  p.mask_bits = cfg.mask_bits;
  p.sign_mode = cfg.sign_mode;
  p.top_values.reserve(k);
  for (std::uint32_t i : selected) p.top_values.push_back(x.data[i]);

  float top_min = std::abs(p.top_values[0]);
  for (float v : p.top_values) top_min = std::min(top_min, std::abs(v));

  const std::uint32_t sentinel = (1u << cfg.mask_bits) - 1u;
  p.mask.assign(d, 0u);
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < d; ++i) {
    if (cursor < selected.size() && selected[cursor] == i) {
      p.mask[i] = sentinel;
      ++cursor;
      continue;
    }
    const float mag = std::abs(x.data[i]);
    std::uint32_t code = 0;
    if (top_min > 0.0f) {
      const double q = static_cast<double>(mag) * sentinel /
                       static_cast<double>(top_min);
      // Values equal to top_min (duplicates) and floor landing on the
      // sentinel through rounding both clamp to sentinel - 1.
      code = static_cast<std::uint32_t>(
          std::min(std::floor(q), static_cast<double>(sentinel - 1u)));
    }
    if (signed_mode && x.data[i] < 0.0f) code |= 1u << cfg.mask_bits;
    p.mask[i] = code;
  }
  return p;
}

CompressedPayload sp_encode(const FeatureMap& x, const CodecConfig& cfg) {
  require_codec(cfg, Codec::SP);
  validate_feature_map(x);
  const std::size_t d = x.size();
  const std::size_t k = checked_k(cfg, d);
  const std::vector<std::uint32_t> selected = select_top_k(x.data, k);

  CompressedPayload p;
  p.codec = Codec::SP;
  p.shape = x.shape;
  p.k = static_cast<std::uint32_t>(k);
  p.mask.assign(d, 0u);
  p.top_values.reserve(k);
  for (std::uint32_t i : selected) {
    p.mask[i] = 1u;
    p.top_values.push_back(x.data[i]);
  }
  return p;
}

CompressedPayload qu_encode(const FeatureMap& x, const CodecConfig& cfg) {
  require_codec(cfg, Codec::QU);
  validate_feature_map(x);
  check_field_bits(cfg.quant_bits, "quant_bits");
  const std::size_t d = x.size();
  if (d == 0) throw InputError("empty tensor");

  float lo = x.data[0], hi = x.data[0];
  for (float v : x.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  CompressedPayload p;
  p.codec = Codec::QU;
  p.shape = x.shape;
  p.quant_bits = cfg.quant_bits;
  p.range_min = lo;
  p.range_max = hi;
  p.mask.assign(d, 0u);
  if (hi == lo) return p;  // degenerate range: all codes zero

  const double levels = static_cast<double>((1u << cfg.quant_bits) - 1u);
  const double span = static_cast<double>(hi) - lo;
  SeededRng rng(cfg.seed);
  for (std::size_t i = 0; i < d; ++i) {
    const double t = (static_cast<double>(x.data[i]) - lo) / span * levels;
    // Deterministic: nearest level, ties toward the higher code.
    // Stochastic: unbiased randomized rounding.
    const double shift = cfg.stochastic_rounding ? rng.next_double() : 0.5;
    double code = std::floor(t + shift);
    code = std::clamp(code, 0.0, levels);
    p.mask[i] = static_cast<std::uint32_t>(code);
  }
  return p;
}

CompressedPayload rt_encode(const FeatureMap& x, const CodecConfig& cfg) {
  require_codec(cfg, Codec::RT);
  validate_feature_map(x);
  const std::size_t d = x.size();
  const std::size_t k = checked_k(cfg, d);

  // k sequential draws without replacement, each proportional to |x_i| over
  // the remaining indices; all-zero remainders fall back to uniform. Each
  // draw walks the full weight array: O(d*k) by construction.
  std::vector<double> weights(d);
  for (std::size_t i = 0; i < d; ++i)
    weights[i] = std::abs(static_cast<double>(x.data[i]));
  std::vector<char> taken(d, 0);
  SeededRng rng(cfg.seed);
  for (std::size_t draw = 0; draw < k; ++draw) {
    double total = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      if (!taken[i]) total += weights[i];
    std::size_t pick = d;
    if (total > 0.0) {
      const double u = rng.next_double() * total;
      double acc = 0.0;
      std::size_t last_weighted = d;
      for (std::size_t i = 0; i < d; ++i) {
        if (taken[i] || weights[i] <= 0.0) continue;
        last_weighted = i;
        acc += weights[i];
        if (acc > u) {
          pick = i;
          break;
        }
      }
      if (pick == d) pick = last_weighted;  // guard against FP underrun
    } else {
      std::uint64_t nth = rng.next_below(d - draw);
      for (std::size_t i = 0; i < d; ++i) {
        if (taken[i]) continue;
        if (nth == 0) {
          pick = i;
          break;
        }
        --nth;
      }
    }
    taken[pick] = 1;
  }

  CompressedPayload p;
  p.codec = Codec::RT;
  p.shape = x.shape;
  p.k = static_cast<std::uint32_t>(k);
  p.mask.assign(d, 0u);
  p.top_values.reserve(k);
  for (std::size_t i = 0; i < d; ++i) {
    if (!taken[i]) continue;
    p.mask[i] = 1u;
    p.top_values.push_back(x.data[i]);
  }
  return p;
}

CompressedPayload encode(const FeatureMap& x, const CodecConfig& cfg) {
  switch (cfg.codec) {
    case Codec::MS: return ms_encode(x, cfg);
    case Codec::SP: return sp_encode(x, cfg);
    case Codec::QU: return qu_encode(x, cfg);
    case Codec::RT: return rt_encode(x, cfg);
  }
  throw ParameterError("unknown codec");
}

void validate_payload(const CompressedPayload& p) {
  const std::size_t d = shape_elements(p.shape);
  if (p.shape.empty() || d == 0)
    throw CorruptPayloadError("payload shape must have positive dims");
  for (std::uint32_t dim : p.shape)
    if (dim == 0) throw CorruptPayloadError("payload shape must have positive dims");
  if (p.mask.size() != d)
    throw CorruptPayloadError("mask length does not match shape");
  for (float v : p.top_values)
    if (!std::isfinite(v))
      throw CorruptPayloadError("non-finite top value");

  switch (p.codec) {
    case Codec::MS: {
      if (p.mask_bits < 1 || p.mask_bits > kMaxFieldBits)
        throw CorruptPayloadError("mask_bits out of range");
      if (p.k < 1 || p.k > d || p.top_values.size() != p.k)
        throw CorruptPayloadError("k does not match top_values");
      const std::uint32_t sentinel = (1u << p.mask_bits) - 1u;
      const bool signed_mode = p.sign_mode == SignMode::SignBit;
      const std::uint32_t field_max =
          signed_mode ? (sentinel | (1u << p.mask_bits)) : sentinel;
      std::size_t sentinels = 0;
      for (std::uint32_t field : p.mask) {
        if (field > field_max)
          throw CorruptPayloadError("mask field exceeds width");
        if ((field & sentinel) == sentinel) {
          if (field != sentinel)
            throw CorruptPayloadError("sentinel with sign bit set");
          ++sentinels;
        }
      }
      if (sentinels != p.k)
        throw CorruptPayloadError("sentinel count does not match k");
      break;
    }
    case Codec::SP:
    case Codec::RT: {
      if (p.k < 1 || p.k > d || p.top_values.size() != p.k)
        throw CorruptPayloadError("k does not match top_values");
      std::size_t set = 0;
      for (std::uint32_t field : p.mask) {
        if (field > 1u) throw CorruptPayloadError("1-bit mask field exceeds width");
        set += field;
      }
      if (set != p.k)
        throw CorruptPayloadError("mask popcount does not match k");
      break;
    }
    case Codec::QU: {
      if (p.quant_bits < 1 || p.quant_bits > kMaxFieldBits)
        throw CorruptPayloadError("quant_bits out of range");
      if (p.k != 0 || !p.top_values.empty())
        throw CorruptPayloadError("QU payload carries no top values");
      if (!std::isfinite(p.range_min) || !std::isfinite(p.range_max) ||
          p.range_min > p.range_max)
        throw CorruptPayloadError("invalid quantization range");
      const std::uint32_t max_code = (1u << p.quant_bits) - 1u;
      for (std::uint32_t code : p.mask)
        if (code > max_code) throw CorruptPayloadError("code exceeds 2^q - 1");
      break;
    }
    default:
      throw CorruptPayloadError("unknown codec id");
  }
}

FeatureMap decode(const CompressedPayload& p) {
  validate_payload(p);
  const std::size_t d = p.mask.size();
  FeatureMap out;
  out.shape = p.shape;
  out.data.assign(d, 0.0f);

  switch (p.codec) {
    case Codec::MS: {
      const std::uint32_t sentinel = (1u << p.mask_bits) - 1u;
      const bool signed_mode = p.sign_mode == SignMode::SignBit;
      float top_min = std::abs(p.top_values[0]);
      for (float v : p.top_values) top_min = std::min(top_min, std::abs(v));
      std::size_t cursor = 0;
      for (std::size_t i = 0; i < d; ++i) {
        const std::uint32_t field = p.mask[i];
        if (field == sentinel) {
          out.data[i] = p.top_values[cursor++];
          continue;
        }
        const std::uint32_t code = field & sentinel;
        double value = static_cast<double>(code) * top_min / sentinel;
        if (signed_mode && (field >> p.mask_bits) != 0) value = -value;
        out.data[i] = static_cast<float>(value);
      }
      break;
    }
    case Codec::SP:
    case Codec::RT: {
      std::size_t cursor = 0;
      for (std::size_t i = 0; i < d; ++i)
        if (p.mask[i] != 0) out.data[i] = p.top_values[cursor++];
      break;
    }
    case Codec::QU: {
      const double levels = static_cast<double>((1u << p.quant_bits) - 1u);
      const double span =
          static_cast<double>(p.range_max) - static_cast<double>(p.range_min);
      for (std::size_t i = 0; i < d; ++i)
        out.data[i] = static_cast<float>(
            static_cast<double>(p.mask[i]) * span / levels + p.range_min);
      break;
    }
    default:
      throw CorruptPayloadError("unknown codec id");
  }
  return out;
}

ErrorReport compression_error(const FeatureMap& x, const FeatureMap& xhat) {
  if (x.shape != xhat.shape)
    throw InputError("compression_error: shape mismatch");
  ErrorReport report;
  report.abs_error = l2_distance(x, xhat);
  const double norm = l2_norm(x);
  report.rel_error = norm > 0.0 ? report.abs_error / norm : 0.0;
  return report;
}

double compression_rate(const CodecConfig& cfg, std::size_t d) {
  if (d == 0) throw ParameterError("compression_rate: d must be positive");
  const double dd = static_cast<double>(d);
  double bits = 0.0;
  switch (cfg.codec) {
    case Codec::MS: {
      check_field_bits(cfg.mask_bits, "mask_bits");
      const std::size_t k = checked_k(cfg, d);
      bits = static_cast<double>(cfg.mask_bits) * dd +
             static_cast<double>(kValueBits) * static_cast<double>(k);
      if (cfg.sign_mode == SignMode::SignBit) bits += dd;
      break;
    }
    case Codec::SP:
    case Codec::RT: {
      const std::size_t k = checked_k(cfg, d);
      bits = dd + static_cast<double>(kValueBits) * static_cast<double>(k);
      break;
    }
    case Codec::QU:
      check_field_bits(cfg.quant_bits, "quant_bits");
      // Range header is constant and excluded from the ratio.
      bits = static_cast<double>(cfg.quant_bits) * dd;
      break;
  }
  return 1.0 - bits / (static_cast<double>(kValueBits) * dd);
}

}  // namespace msc
