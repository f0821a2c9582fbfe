#include "msc/wire.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace msc {

const char* to_string(WireErrorCode code) {
  switch (code) {
    case WireErrorCode::bad_magic: return "bad_magic";
    case WireErrorCode::unknown_codec: return "unknown_codec";
    case WireErrorCode::bad_header: return "bad_header";
    case WireErrorCode::truncated: return "truncated";
    case WireErrorCode::trailing_bytes: return "trailing_bytes";
    case WireErrorCode::nonzero_padding: return "nonzero_padding";
    case WireErrorCode::sentinel_mismatch: return "sentinel_mismatch";
    case WireErrorCode::value_range: return "value_range";
  }
  return "unknown";
}

namespace {

constexpr std::uint8_t kFlagSignBit = 0x01;
constexpr std::uint8_t kFlagKeyValue = 0x02;
constexpr std::size_t kMaxDims = 16;
constexpr std::uint64_t kMaxElements = 1ull << 31;

std::uint32_t field_width(const CompressedPayload& p) {
  switch (p.codec) {
    case Codec::MS:
      return p.mask_bits + (p.sign_mode == SignMode::SignBit ? 1u : 0u);
    case Codec::SP:
    case Codec::RT:
      return 1u;
    case Codec::QU:
      return p.quant_bits;
  }
  return 0u;
}

struct Writer {
  std::vector<std::uint8_t> out;

  void u8(std::uint8_t v) { out.push_back(v); }
  void u32(std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 24));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
};

struct Reader {
  std::span<const std::uint8_t> buf;
  std::size_t pos = 0;

  void need(std::size_t n, const char* what) {
    if (buf.size() - pos < n)
      throw WireError(WireErrorCode::truncated, what);
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return buf[pos++];
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = static_cast<std::uint32_t>(buf[pos]) |
                      static_cast<std::uint32_t>(buf[pos + 1]) << 8 |
                      static_cast<std::uint32_t>(buf[pos + 2]) << 16 |
                      static_cast<std::uint32_t>(buf[pos + 3]) << 24;
    pos += 4;
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
};

std::size_t mask_section_bytes(const CompressedPayload& p, bool key_value) {
  if (key_value) return 4u * static_cast<std::size_t>(p.k);
  const std::uint64_t bits =
      static_cast<std::uint64_t>(p.d()) * field_width(p);
  return static_cast<std::size_t>((bits + 7) / 8);
}

}  // namespace

bool uses_key_value(const CompressedPayload& p) {
  if (p.codec != Codec::SP && p.codec != Codec::RT) return false;
  return static_cast<std::uint64_t>(kIndexBits) * p.k < p.d();
}

std::size_t frame_size(const CompressedPayload& p) {
  std::size_t n = 4 + 1 + 1 + 1 + 1 + 4 * p.shape.size() + 4;
  if (p.codec == Codec::QU) n += 8;
  n += mask_section_bytes(p, uses_key_value(p));
  n += 4u * p.top_values.size();
  return n;
}

std::vector<std::uint8_t> serialize(const CompressedPayload& p) {
  validate_payload(p);
  if (p.shape.size() > kMaxDims)
    throw WireError(WireErrorCode::bad_header, "too many dims");
  if (shape_elements(p.shape) > kMaxElements)
    throw WireError(WireErrorCode::bad_header, "tensor too large for frame");

  const bool key_value = uses_key_value(p);
  const std::uint32_t w = field_width(p);

  Writer wr;
  wr.out.reserve(frame_size(p));
  wr.u32(kWireMagic);
  wr.u8(static_cast<std::uint8_t>(p.codec));
  std::uint8_t flags = 0;
  if (p.codec == Codec::MS && p.sign_mode == SignMode::SignBit)
    flags |= kFlagSignBit;
  if (key_value) flags |= kFlagKeyValue;
  wr.u8(flags);
  switch (p.codec) {
    case Codec::MS: wr.u8(static_cast<std::uint8_t>(p.mask_bits)); break;
    case Codec::QU: wr.u8(static_cast<std::uint8_t>(p.quant_bits)); break;
    default: wr.u8(1); break;
  }
  wr.u8(static_cast<std::uint8_t>(p.shape.size()));
  for (std::uint32_t dim : p.shape) wr.u32(dim);
  wr.u32(p.k);
  if (p.codec == Codec::QU) {
    wr.f32(p.range_min);
    wr.f32(p.range_max);
  }

  if (key_value) {
    for (std::uint32_t i = 0; i < p.mask.size(); ++i)
      if (p.mask[i] != 0) wr.u32(i);
  } else {
    std::vector<std::uint8_t> packed(mask_section_bytes(p, false), 0u);
    std::uint64_t bit = 0;
    for (std::uint32_t field : p.mask) {
      for (std::uint32_t j = 0; j < w; ++j, ++bit) {
        if (field >> j & 1u)
          packed[bit >> 3] |= static_cast<std::uint8_t>(1u << (bit & 7));
      }
    }
    wr.out.insert(wr.out.end(), packed.begin(), packed.end());
  }
  for (float v : p.top_values) wr.f32(v);
  return wr.out;
}

CompressedPayload deserialize(std::span<const std::uint8_t> bytes) {
  Reader rd{bytes};
  if (rd.u32("magic") != kWireMagic)
    throw WireError(WireErrorCode::bad_magic, "expected MSC1");
  const std::uint8_t codec_id = rd.u8("codec id");
  if (codec_id > 3)
    throw WireError(WireErrorCode::unknown_codec,
                    "codec id " + std::to_string(codec_id));
  const Codec codec = static_cast<Codec>(codec_id);
  const std::uint8_t flags = rd.u8("flags");
  if (flags & ~(kFlagSignBit | kFlagKeyValue))
    throw WireError(WireErrorCode::bad_header, "unknown flag bits");
  const bool sign_flag = flags & kFlagSignBit;
  const bool key_value = flags & kFlagKeyValue;
  if (sign_flag && codec != Codec::MS)
    throw WireError(WireErrorCode::bad_header, "sign flag outside MS");
  if (key_value && codec != Codec::SP && codec != Codec::RT)
    throw WireError(WireErrorCode::bad_header, "key-value flag outside SP/RT");
  const std::uint8_t b_or_q = rd.u8("field width");
  if (b_or_q < 1 || b_or_q > kMaxFieldBits)
    throw WireError(WireErrorCode::bad_header, "field width out of range");
  if ((codec == Codec::SP || codec == Codec::RT) && b_or_q != 1)
    throw WireError(WireErrorCode::bad_header, "SP/RT field width must be 1");
  const std::uint8_t ndims = rd.u8("ndims");
  if (ndims < 1 || ndims > kMaxDims)
    throw WireError(WireErrorCode::bad_header, "ndims out of range");

  CompressedPayload p;
  p.codec = codec;
  p.sign_mode = sign_flag ? SignMode::SignBit : SignMode::NonNegativeOnly;
  if (codec == Codec::MS) p.mask_bits = b_or_q;
  if (codec == Codec::QU) p.quant_bits = b_or_q;

  std::uint64_t d = 1;
  p.shape.reserve(ndims);
  for (std::uint8_t i = 0; i < ndims; ++i) {
    const std::uint32_t dim = rd.u32("dims");
    if (dim == 0) throw WireError(WireErrorCode::bad_header, "zero dim");
    d *= dim;
    if (d > kMaxElements)
      throw WireError(WireErrorCode::bad_header, "tensor too large");
    p.shape.push_back(dim);
  }

  p.k = rd.u32("k");
  if (codec == Codec::QU) {
    if (p.k != 0)
      throw WireError(WireErrorCode::bad_header, "QU frames carry k = 0");
    p.range_min = rd.f32("quant range");
    p.range_max = rd.f32("quant range");
    if (!std::isfinite(p.range_min) || !std::isfinite(p.range_max) ||
        p.range_min > p.range_max)
      throw WireError(WireErrorCode::value_range, "invalid quant range");
  } else if (p.k < 1 || p.k > d) {
    throw WireError(WireErrorCode::bad_header, "k out of range");
  }

  const std::uint32_t w =
      codec == Codec::MS ? b_or_q + (sign_flag ? 1u : 0u) : b_or_q;
  const std::size_t mask_bytes =
      key_value ? 4u * static_cast<std::size_t>(p.k)
                : static_cast<std::size_t>((d * w + 7) / 8);
  const std::size_t value_bytes = 4u * static_cast<std::size_t>(p.k);
  const std::size_t expected = rd.pos + mask_bytes + value_bytes;
  if (bytes.size() < expected)
    throw WireError(WireErrorCode::truncated, "frame shorter than header declares");
  if (bytes.size() > expected)
    throw WireError(WireErrorCode::trailing_bytes, "bytes past declared frame end");

  p.mask.assign(static_cast<std::size_t>(d), 0u);
  if (key_value) {
    std::uint32_t prev = 0;
    for (std::uint32_t i = 0; i < p.k; ++i) {
      const std::uint32_t idx = rd.u32("key-value index");
      if (idx >= d || (i > 0 && idx <= prev))
        throw WireError(WireErrorCode::sentinel_mismatch,
                        "key-value indices must be ascending and in range");
      p.mask[idx] = 1u;
      prev = idx;
    }
  } else {
    rd.need(mask_bytes, "mask section");
    const std::uint8_t* base = bytes.data() + rd.pos;
    std::uint64_t bit = 0;
    for (std::uint64_t i = 0; i < d; ++i) {
      std::uint32_t field = 0;
      for (std::uint32_t j = 0; j < w; ++j, ++bit)
        field |= static_cast<std::uint32_t>(base[bit >> 3] >> (bit & 7) & 1u)
                 << j;
      p.mask[static_cast<std::size_t>(i)] = field;
    }
    for (std::uint64_t pad = d * w; pad < mask_bytes * 8ull; ++pad)
      if (base[pad >> 3] >> (pad & 7) & 1u)
        throw WireError(WireErrorCode::nonzero_padding,
                        "padding bits must be zero");
    rd.pos += mask_bytes;
  }

  p.top_values.reserve(p.k);
  for (std::uint32_t i = 0; i < p.k; ++i) {
    const float v = rd.f32("top values");
    if (!std::isfinite(v))
      throw WireError(WireErrorCode::value_range, "non-finite top value");
    p.top_values.push_back(v);
  }

  try {
    validate_payload(p);
  } catch (const CorruptPayloadError& e) {
    throw WireError(WireErrorCode::sentinel_mismatch, e.what());
  }
  return p;
}

StorageCost storage_cost(StorageScheme scheme, std::uint64_t d,
                         std::uint64_t k, std::uint32_t w, std::uint32_t f2) {
  if (k > d) throw ParameterError("storage_cost: k must not exceed d");
  StorageCost cost;
  cost.scheme = scheme;
  cost.d = d;
  cost.k = k;
  cost.f1 = kValueBits;
  if (scheme == StorageScheme::Mask) {
    if (w < 1) throw ParameterError("storage_cost: mask width must be >= 1");
    cost.w_or_f2 = w;
    cost.bits = w * d + static_cast<std::uint64_t>(kValueBits) * k;
  } else {
    if (f2 < 1) throw ParameterError("storage_cost: key width must be >= 1");
    cost.w_or_f2 = f2;
    cost.bits = (static_cast<std::uint64_t>(kValueBits) + f2) * k;
  }
  return cost;
}

double crossover_sparsity(std::uint32_t f2) {
  if (f2 < 1) throw ParameterError("crossover_sparsity: f2 must be >= 1");
  return 1.0 - 1.0 / static_cast<double>(f2);
}

}  // namespace msc
