#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "msc/errors.hpp"

namespace msc {

/// Dense 32-bit float tensor. Shape is metadata only: every operation in the
/// library works on the flat row-major vector.
struct FeatureMap {
  std::vector<std::uint32_t> shape;
  std::vector<float> data;

  std::size_t size() const { return data.size(); }
};

std::size_t shape_elements(const std::vector<std::uint32_t>& shape);

/// Builds a FeatureMap and checks its invariants: positive dims, shape product
/// equal to the element count, all values finite.
FeatureMap make_feature_map(std::vector<std::uint32_t> shape,
                            std::vector<float> data);

/// Throws InputError if the map violates the FeatureMap invariants.
void validate_feature_map(const FeatureMap& x);

double l2_norm(const FeatureMap& x);
double l2_distance(const FeatureMap& a, const FeatureMap& b);
FeatureMap relu(const FeatureMap& x);

/// xoshiro256** seeded through splitmix64. The unsigned 64-bit stream is the
/// portable contract: identical seeds give identical streams everywhere.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform double in [0, 1), 53 random bits.
  double next_double();
  /// Uniform integer in [0, n), n > 0. Rejection sampled, unbiased.
  std::uint64_t next_below(std::uint64_t n);
  /// Standard normal via Box-Muller; draws two uniforms per pair.
  double next_normal();

 private:
  std::array<std::uint64_t, 4> state_{};
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// Mixes words into a fresh seed (splitmix64 chain). Used to derive
/// independent sub-streams from one experiment seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

/// Synthetic post-ReLU feature map with heavy-tailed activations:
/// x_i = relu(g_i * exp(h_i)) with g, h standard normal. Mimics the sparse,
/// outlier-dominated profile of CNN cutlayer activations.
FeatureMap synthetic_activations(std::size_t d, SeededRng& rng);

}  // namespace msc
