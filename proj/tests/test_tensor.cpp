#include <doctest.h>

#include <cmath>

#include "msc/tensor.hpp"
#include "test_util.hpp"

using namespace msc;

TEST_CASE("l2_norm basics") {
  CHECK(l2_norm(make_feature_map({3}, {0.f, 0.f, 0.f})) == 0.0);
  CHECK(l2_norm(make_feature_map({2}, {3.f, 4.f})) == doctest::Approx(5.0));
  CHECK(l2_norm(make_feature_map({1}, {0.f})) == 0.0);
}

TEST_CASE("l2_norm matches straight-loop oracle on a random 16-vector") {
  const std::vector<float> vals = testutil::random_nonneg_vector(16, 99);
  const FeatureMap x = make_feature_map({16}, vals);
  const double oracle = testutil::oracle_l2(vals);
  CHECK(l2_norm(x) == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("l2_norm is absolutely homogeneous") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SeededRng rng(seed);
    FeatureMap x = synthetic_activations(64, rng);
    const double c = rng.next_normal() * 3.0;
    FeatureMap scaled = x;
    for (float& v : scaled.data) v = static_cast<float>(c * v);
    CHECK(l2_norm(scaled) ==
          doctest::Approx(std::abs(c) * l2_norm(x)).epsilon(1e-6));
  }
}

TEST_CASE("relu sign cases and idempotency") {
  const FeatureMap x = make_feature_map({3}, {-1.f, 0.f, 2.f});
  const FeatureMap r = relu(x);
  CHECK(r.data == std::vector<float>{0.f, 0.f, 2.f});

  const FeatureMap all_neg = make_feature_map({4}, {-5.f, -0.5f, -1e10f, -0.f});
  for (float v : relu(all_neg).data) CHECK(v == 0.0f);

  SeededRng rng(7);
  FeatureMap noise;
  noise.shape = {128};
  noise.data.resize(128);
  for (float& v : noise.data) v = static_cast<float>(rng.next_normal());
  const FeatureMap once = relu(noise);
  CHECK(relu(once).data == once.data);
  for (std::size_t i = 0; i < noise.data.size(); ++i)
    CHECK(once.data[i] == std::max(0.0f, noise.data[i]));
}

TEST_CASE("feature map invariants are enforced") {
  CHECK_THROWS_AS(make_feature_map({2}, {1.f}), InputError);
  CHECK_THROWS_AS(make_feature_map({0}, {}), InputError);
  CHECK_THROWS_AS(make_feature_map({1}, {NAN}), InputError);
  CHECK_THROWS_AS(make_feature_map({}, {}), InputError);
}

TEST_CASE("seeded rng streams are reproducible") {
  SeededRng a(0xDEADBEEFull);
  SeededRng b(0xDEADBEEFull);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

  SeededRng c(1), d(2);
  bool all_equal = true;
  for (int i = 0; i < 16; ++i) all_equal &= c.next_u64() == d.next_u64();
  CHECK_FALSE(all_equal);
}

TEST_CASE("rng doubles stay in [0,1) and next_below is in range") {
  SeededRng rng(42);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  for (int i = 0; i < 1000; ++i) CHECK(rng.next_below(7) < 7);
}

TEST_CASE("rng normal moments are sane") {
  SeededRng rng(3);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.next_normal();
    sum += z;
    sum_sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(sum_sq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("synthetic activations are a valid post-relu map") {
  SeededRng rng(11);
  const FeatureMap x = synthetic_activations(4096, rng);
  CHECK(x.size() == 4096);
  std::size_t zeros = 0;
  for (float v : x.data) {
    CHECK(v >= 0.0f);
    if (v == 0.0f) ++zeros;
  }
  // Roughly half the gaussian preimage is negative.
  CHECK(zeros > 1500);
  CHECK(zeros < 2600);
}
