#include "msc/tensor.hpp"

#include <cmath>
#include <limits>

namespace msc {

std::size_t shape_elements(const std::vector<std::uint32_t>& shape) {
  std::size_t n = 1;
  for (std::uint32_t dim : shape) n *= dim;
  return shape.empty() ? 0 : n;
}

void validate_feature_map(const FeatureMap& x) {
  if (x.shape.empty()) throw InputError("feature map needs at least one dim");
  std::size_t n = 1;
  for (std::uint32_t dim : x.shape) {
    if (dim == 0) throw InputError("feature map dims must be positive");
    n *= dim;
  }
  if (n != x.data.size())
    throw InputError("shape product does not match element count");
  for (float v : x.data) {
    if (!std::isfinite(v)) throw InputError("feature map values must be finite");
  }
}

FeatureMap make_feature_map(std::vector<std::uint32_t> shape,
                            std::vector<float> data) {
  FeatureMap x{std::move(shape), std::move(data)};
  validate_feature_map(x);
  return x;
}

double l2_norm(const FeatureMap& x) {
  double acc = 0.0;
  for (float v : x.data) acc += static_cast<double>(v) * v;
  return std::sqrt(acc);
}

double l2_distance(const FeatureMap& a, const FeatureMap& b) {
  if (a.data.size() != b.data.size())
    throw InputError("l2_distance: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    double diff = static_cast<double>(a.data[i]) - b.data[i];
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

FeatureMap relu(const FeatureMap& x) {
  FeatureMap out = x;
  for (float& v : out.data) v = v > 0.0f ? v : 0.0f;
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

SeededRng::SeededRng(std::uint64_t seed) {
  std::uint64_t s = seed;
  for (auto& word : state_) word = splitmix64(s);
}

std::uint64_t SeededRng::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double SeededRng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t SeededRng::next_below(std::uint64_t n) {
  if (n == 0) throw ParameterError("next_below: n must be positive");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

double SeededRng::next_normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // Box-Muller; u1 nudged away from zero so log stays finite.
  const double u1 = next_double();
  const double u2 = next_double();
  const double r = std::sqrt(-2.0 * std::log(u1 + 0x1.0p-53));
  const double theta = 2.0 * 3.14159265358979323846 * u2;
  cached_normal_ = r * std::sin(theta);
  has_cached_normal_ = true;
  return r * std::cos(theta);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = seed;
  (void)splitmix64(s);
  s ^= 0xA0761D6478BD642Full + a;
  (void)splitmix64(s);
  s ^= 0xE7037ED1A0B428DBull + b;
  return splitmix64(s);
}

FeatureMap synthetic_activations(std::size_t d, SeededRng& rng) {
  FeatureMap x;
  x.shape = {static_cast<std::uint32_t>(d)};
  x.data.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double g = rng.next_normal();
    const double h = rng.next_normal();
    const double v = g * std::exp(h);
    x.data[i] = v > 0.0 ? static_cast<float>(v) : 0.0f;
  }
  return x;
}

}  // namespace msc
