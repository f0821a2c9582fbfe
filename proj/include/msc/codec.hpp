#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "msc/tensor.hpp"

namespace msc {

enum class Codec : std::uint8_t { MS = 0, SP = 1, QU = 2, RT = 3 };

/// How MS handles signs. NonNegativeOnly rejects negative inputs (the
/// post-ReLU case); SignBit widens each mask field by one sign bit and
/// quantizes magnitudes.
enum class SignMode : std::uint8_t { NonNegativeOnly = 0, SignBit = 1 };

const char* to_string(Codec c);

struct CodecConfig {
  Codec codec = Codec::MS;
  double sparsification_ratio = 0.0;  // r in [0,1); k = floor((1-r)*d)
  std::uint32_t mask_bits = 2;        // b, MS only
  std::uint32_t quant_bits = 8;       // q, QU only
  SignMode sign_mode = SignMode::NonNegativeOnly;  // MS only
  std::uint64_t seed = 0;             // RT (and QU stochastic rounding)
  bool stochastic_rounding = false;   // QU: unbiased randomized rounding
};

/// Element bit width of FeatureMap values; fixed so the paper-exact
/// compression-rate arithmetic holds.
inline constexpr std::uint32_t kValueBits = 32;

/// Widest supported mask/quantization field.
inline constexpr std::uint32_t kMaxFieldBits = 24;

/// k = floor((1-r)*d).
std::size_t derived_k(double sparsification_ratio, std::size_t d);

struct CompressedPayload {
  Codec codec = Codec::MS;
  std::vector<std::uint32_t> shape;
  std::uint32_t k = 0;          // retained count (0 for QU)
  std::uint32_t mask_bits = 0;  // b for MS, 0 otherwise
  std::uint32_t quant_bits = 0; // q for QU, 0 otherwise
  SignMode sign_mode = SignMode::NonNegativeOnly;
  /// Retained values in original index order (empty for QU).
  std::vector<float> top_values;
  /// Per-element mask fields (MS: b(+1) bits, SP/RT: one bit) or QU codes.
  std::vector<std::uint32_t> mask;
  float range_min = 0.0f;  // QU only
  float range_max = 0.0f;  // QU only

  std::size_t d() const { return mask.size(); }
};

struct ErrorReport {
  double abs_error = 0.0;         // l2(xhat - x)
  double rel_error = 0.0;         // abs_error / l2(x), 0 for zero x
  double compression_rate = 0.0;  // filled by the caller's context
};

/// Indices of the k largest |values|, ties broken toward the lower index,
/// returned in ascending index order. O(d log k).
std::vector<std::uint32_t> select_top_k(std::span<const float> values,
                                        std::size_t k);

CompressedPayload ms_encode(const FeatureMap& x, const CodecConfig& cfg);
CompressedPayload sp_encode(const FeatureMap& x, const CodecConfig& cfg);
CompressedPayload qu_encode(const FeatureMap& x, const CodecConfig& cfg);
CompressedPayload rt_encode(const FeatureMap& x, const CodecConfig& cfg);

/// Dispatches on cfg.codec.
CompressedPayload encode(const FeatureMap& x, const CodecConfig& cfg);

/// Reconstructs the feature map. Throws CorruptPayloadError when the payload
/// is internally inconsistent.
FeatureMap decode(const CompressedPayload& p);

/// Throws CorruptPayloadError on any violated payload invariant.
void validate_payload(const CompressedPayload& p);

ErrorReport compression_error(const FeatureMap& x, const FeatureMap& xhat);

/// 1 - compressed_bits / (32 * d). Header bytes excluded.
double compression_rate(const CodecConfig& cfg, std::size_t d);

}  // namespace msc
