#include <doctest.h>

#include "msc/sweep.hpp"

using namespace msc;

TEST_CASE("match_rates derives the equal-rate settings") {
  // d=4096: b=2, k2=128 -> q1 = 2 + 32*128/4096 = 3, k1 = 128 + 4096/32.
  const MatchedRates m = match_rates({2, 128}, 4096);
  CHECK(m.q1 == 3);
  CHECK(m.k1 == 256);
  CHECK(m.k_rt == 256);
  CHECK(m.rate == doctest::Approx(0.90625).epsilon(1e-12));
  // All three bit budgets agree.
  CHECK(2 * 4096 + 32 * 128 == 3 * 4096);
  CHECK(2 * 4096 + 32 * 128 == 4096 + 32 * 256);
}

TEST_CASE("match_rates rejects fractional matches") {
  CHECK_THROWS_AS(match_rates({2, 100}, 4096), ParameterError);  // q1 frac
  CHECK_THROWS_AS(match_rates({2, 0}, 4096), ParameterError);
  CHECK_THROWS_AS(match_rates({0, 128}, 4096), ParameterError);
  // d not divisible by 32: k1 = (b-1)*d/32 + k2 goes fractional for b=2.
  CHECK_THROWS_AS(match_rates({2, 100}, 1000), ParameterError);
}

TEST_CASE("error sweep is deterministic and thread-count independent") {
  const RatePoint points[] = {{2, 128}, {3, 128}};
  const auto a = run_error_sweep(1024, points, 4, 99, 1);
  const auto b = run_error_sweep(1024, points, 4, 99, 4);
  REQUIRE(a.size() == b.size());
  REQUIRE(a.size() == 8);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].codec == b[i].codec);
    CHECK(a[i].mean_abs_error == b[i].mean_abs_error);
    CHECK(a[i].std_abs_error == b[i].std_abs_error);
    CHECK(a[i].compression_rate == b[i].compression_rate);
  }
}

TEST_CASE("error sweep rows carry the shared rate per point") {
  const RatePoint points[] = {{2, 32}};
  const auto rows = run_error_sweep(1024, points, 3, 5, 1);
  REQUIRE(rows.size() == 4);
  for (const SweepRow& r : rows) {
    CHECK(r.compression_rate == rows[0].compression_rate);
    CHECK(r.d == 1024);
    CHECK(r.seed_count == 3);
    CHECK(r.mean_abs_error > 0.0);
  }
}
