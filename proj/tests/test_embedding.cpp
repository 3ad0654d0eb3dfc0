#include <catch2/catch.hpp>

#include <cmath>
#include <numbers>

#include "kdee/embedding.hpp"
#include "oracles.hpp"

using kdee::takens_embed;
using kdee::TimeSeries;

TEST_CASE("takens embedding matches the direct construction") {
  const TimeSeries x{{1, 2, 3, 4, 5}, 1.0};

  SECTION("tau=1, N=2") {
    const auto cloud = takens_embed(x, 1, 2);
    REQUIRE(cloud.size() == 3);
    CHECK(cloud.xs == std::vector<double>{1, 2, 3});
    CHECK(cloud.ys == std::vector<double>{2, 3, 4});
  }
  SECTION("tau=2, N=2") {
    const auto cloud = takens_embed(x, 2, 2);
    REQUIRE(cloud.size() == 3);
    CHECK(cloud.xs == std::vector<double>{1, 2, 3});
    CHECK(cloud.ys == std::vector<double>{3, 4, 5});
  }
}

TEST_CASE("constant series embeds onto the diagonal") {
  const TimeSeries x{std::vector<double>(20, 4.25), 1.0};
  const auto cloud = takens_embed(x, 3, 5);
  REQUIRE(cloud.size() == 15);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(cloud.xs[i] == 4.25);
    CHECK(cloud.ys[i] == 4.25);
  }
}

TEST_CASE("embedding parameter and data errors") {
  const TimeSeries x{{1, 2, 3, 4, 5}, 1.0};
  CHECK_THROWS_AS(takens_embed(x, 3, 2), kdee::ParameterError);
  CHECK_THROWS_AS(takens_embed(x, 0, 2), kdee::ParameterError);
  CHECK_THROWS_AS(takens_embed(x, 5, 5), kdee::InsufficientDataError);
  CHECK_THROWS_AS(takens_embed(x, 5, 6), kdee::InsufficientDataError);
}

TEST_CASE("embedding agrees with the brute-force double loop") {
  kdee::SplitMix64 stream(0xE3BEDDE5u);
  const auto samples = oracles::random_series(stream, 50);
  const TimeSeries x{samples, 1.0};
  for (std::size_t n_max = 1; n_max <= 10; ++n_max) {
    for (std::size_t tau = 1; tau <= n_max; ++tau) {
      const auto expected = oracles::takens_brute_force(samples, tau, n_max);
      const auto cloud = takens_embed(x, tau, n_max);
      REQUIRE(cloud.size() == expected.size());
      REQUIRE(cloud.size() == samples.size() - n_max);
      for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(cloud.xs[i] == expected[i].first);
        CHECK(cloud.ys[i] == expected[i].second);
      }
    }
  }
}

TEST_CASE("output point (a,b) satisfies a=x_i, b=x_{i+tau}") {
  kdee::SplitMix64 stream(77);
  const auto samples = oracles::random_series(stream, 120);
  const TimeSeries x{samples, 1.0};
  const std::size_t tau = 7, n_max = 11;
  const auto cloud = takens_embed(x, tau, n_max);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(cloud.xs[i] == samples[i]);
    CHECK(cloud.ys[i] == samples[i + tau]);
  }
}

TEST_CASE("quarter-period delay of a sinusoid traces a circle") {
  const double amplitude = 2.0;
  const std::size_t period = 40;
  TimeSeries x;
  x.sample_rate_hz = 1000.0;
  for (std::size_t i = 0; i < 600; ++i)
    x.samples.push_back(amplitude *
                        std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / period));
  const std::size_t tau = period / 4;
  const auto cloud = takens_embed(x, tau, tau);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double r2 = (cloud.xs[i] / amplitude) * (cloud.xs[i] / amplitude) +
                      (cloud.ys[i] / amplitude) * (cloud.ys[i] / amplitude);
    CHECK(r2 == Approx(1.0).margin(1e-9));
  }
}
