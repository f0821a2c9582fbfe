#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "msc/codec.hpp"

namespace msc {

// Normative frame layout (all integers little-endian, floats IEEE-754 LE):
//
//   magic       4 bytes  "MSC1"
//   codec_id    1 byte   0=MS 1=SP 2=QU 3=RT
//   flags       1 byte   bit0 = sign bit present (MS), bit1 = key-value mask
//   b_or_q      1 byte   MS: b, QU: q, SP/RT: 1
//   ndims       1 byte
//   dims        ndims * u32
//   k           u32
//   quant_range 2 * f32  (QU frames only)
//   mask        ceil(d*w/8) bytes, fields packed LSB-first
//               (key-value frames instead store k ascending u32 indices)
//   top_values  k * f32
//
// w is the packed field width: MS b (+1 with sign bit), SP/RT 1, QU q.
// Padding bits past d*w must be zero. Total length is fully determined by
// the header; anything shorter is `truncated`, anything longer
// `trailing_bytes`.

inline constexpr std::uint32_t kWireMagic = 0x3143534Du;  // "MSC1"
inline constexpr std::uint32_t kIndexBits = 32;           // f2 on the wire

std::vector<std::uint8_t> serialize(const CompressedPayload& p);
CompressedPayload deserialize(std::span<const std::uint8_t> bytes);

/// Exact byte length serialize() would produce.
std::size_t frame_size(const CompressedPayload& p);

/// True when a SP/RT frame stores indices instead of the 1-bit mask
/// (sparsity strictly above the key-value crossover, i.e. 32*k < d).
bool uses_key_value(const CompressedPayload& p);

enum class StorageScheme : std::uint8_t { Mask = 0, KeyValue = 1 };

struct StorageCost {
  StorageScheme scheme;
  std::uint64_t bits;
  std::uint64_t d;
  std::uint64_t k;
  std::uint32_t f1;       // value bit width (32)
  std::uint32_t w_or_f2;  // mask field width, or key bit width
};

/// Mask: w*d + 32*k bits. KeyValue: (32+f2)*k bits.
StorageCost storage_cost(StorageScheme scheme, std::uint64_t d,
                         std::uint64_t k, std::uint32_t w, std::uint32_t f2);

/// Sparsity 1 - 1/f2 above which key-value storage beats the 1-bit mask.
double crossover_sparsity(std::uint32_t f2);

}  // namespace msc
