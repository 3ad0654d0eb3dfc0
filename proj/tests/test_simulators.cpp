#include <catch2/catch.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include "kdee/simulators.hpp"
#include "kdee/spectral.hpp"

using kdee::all_formats;
using kdee::awgn_sigma;
using kdee::format_by_name;
using kdee::interference_background;
using kdee::LorenzConfig;
using kdee::lorenz_x;
using kdee::make_injection_record;
using kdee::modulate;
using kdee::RfSimConfig;
using kdee::TimeSeries;

namespace {

double mean_square(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("every constellation has unit average power") {
  REQUIRE(all_formats().size() == 14);
  for (const auto& format : all_formats()) {
    double power = 0.0;
    for (const auto& c : format.constellation) power += std::norm(c);
    power /= static_cast<double>(format.constellation.size());
    INFO(format.name);
    CHECK(power == Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("OOK constellation is {0, sqrt(2)}") {
  const auto& ook = format_by_name("OOK");
  REQUIRE(ook.constellation.size() == 2);
  CHECK(std::abs(ook.constellation[0]) == Approx(0.0).margin(1e-15));
  CHECK(std::abs(ook.constellation[1]) == Approx(std::sqrt(2.0)).margin(1e-12));
}

TEST_CASE("modulated signals have unit RMS and exact length") {
  RfSimConfig cfg;
  for (const auto& format : all_formats()) {
    const auto signal = modulate(format, cfg, 1234);
    INFO(format.name);
    REQUIRE(signal.size() == 5000);
    CHECK(signal.sample_rate_hz == 5000.0);
    const double rms = std::sqrt(mean_square(signal.samples));
    CHECK(std::fabs(rms - 1.0) <= 1e-9);
  }
}

TEST_CASE("all-ones BPSK concentrates at the carrier") {
  RfSimConfig cfg;
  const auto& bpsk = format_by_name("BPSK");
  const std::vector<std::size_t> symbols(cfg.symbols, 0);  // all +1
  const auto signal = kdee::modulate_symbols(bpsk, symbols, cfg);
  const auto psd = kdee::periodogram(signal.samples);
  std::size_t peak = 0;
  for (std::size_t k = 1; k < psd.size() / 2; ++k)
    if (psd[k] > psd[peak]) peak = k;
  const double peak_hz = static_cast<double>(peak) * cfg.fs_hz / static_cast<double>(psd.size());
  CHECK(peak_hz == Approx(100.0).margin(2.0));
}

TEST_CASE("awgn sigma hand values") {
  TimeSeries unit{{1.0, -1.0, 1.0, -1.0}, 1.0};
  CHECK(awgn_sigma(unit, 0.0) == Approx(1.0).epsilon(1e-12));
  CHECK(awgn_sigma(unit, 10.0) == Approx(std::sqrt(0.1)).epsilon(1e-12));
  TimeSeries two{{std::sqrt(2.0), -std::sqrt(2.0)}, 1.0};
  CHECK(awgn_sigma(two, 0.0) == Approx(std::sqrt(2.0)).epsilon(1e-12));
  TimeSeries zero{{0.0, 0.0}, 1.0};
  CHECK_THROWS_AS(awgn_sigma(zero, 0.0), kdee::ParameterError);
}

TEST_CASE("interference background hits the SIR target") {
  RfSimConfig cfg;
  cfg.sir_db = 4.0;
  const auto background = interference_background(cfg, 31415, 1.0);
  REQUIRE(background.size() == 5000);
  const double achieved = 10.0 * std::log10(1.0 / mean_square(background.samples));
  CHECK(achieved == Approx(4.0).margin(0.1));
}

TEST_CASE("interference spectral mass stays inside 75..125 Hz") {
  RfSimConfig cfg;
  cfg.sir_db = 0.0;
  const auto background = interference_background(cfg, 2718, 1.0);
  const auto psd = kdee::periodogram(background.samples);
  const double bin_hz = cfg.fs_hz / static_cast<double>(psd.size());
  double total = 0.0, in_band = 0.0;
  for (std::size_t k = 0; k < psd.size(); ++k) {
    // Fold to the one-sided frequency axis.
    const double freq = std::min(static_cast<double>(k), static_cast<double>(psd.size() - k)) * bin_hz;
    total += psd[k];
    if (freq >= 75.0 && freq <= 125.0) in_band += psd[k];
  }
  CHECK((total - in_band) / total < 0.05);
}

TEST_CASE("interference is deterministic per seed") {
  RfSimConfig cfg;
  const auto a = interference_background(cfg, 5, 1.0);
  const auto b = interference_background(cfg, 5, 1.0);
  const auto c = interference_background(cfg, 6, 1.0);
  CHECK(a.samples == b.samples);
  CHECK(a.samples != c.samples);
}

TEST_CASE("sub-channel layout realizes 20 centers over 80..120 Hz") {
  const auto centers = kdee::subchannel_centers(kdee::InterferenceLayout{});
  REQUIRE(centers.size() == 20);
  CHECK(centers.front() >= 80.0);
  CHECK(centers.back() <= 120.0);
  int below = 0, above = 0;
  for (double c : centers) (c < 100.0 ? below : above)++;
  CHECK(below == 10);
  CHECK(above == 10);
}

TEST_CASE("injection records") {
  RfSimConfig cfg;
  cfg.snr_db = 6.0;
  cfg.sir_db = 6.0;
  const auto rec = make_injection_record(format_by_name("16QAM"), cfg, 777);
  REQUIRE(rec.truth.size() == 1);
  const auto& iv = rec.truth[0];

  SECTION("interval length and placement follow the protocol") {
    CHECK(iv.end - iv.start >= 1000);
    CHECK(iv.end - iv.start <= 2000);
    CHECK(iv.start >= 2500);
    CHECK(iv.end <= 5000);
  }

  SECTION("outside the interval the record equals the background bitwise") {
    const auto background_noise = [&] {
      kdee::SplitMix64 stream = kdee::derive_stream(777, "noise");
      const auto modulated = modulate(format_by_name("16QAM"), cfg, kdee::derive_seed(777, "modulation"));
      double p = 0.0;
      for (std::size_t i = iv.start; i < iv.end; ++i) p += modulated.samples[i] * modulated.samples[i];
      p /= static_cast<double>(iv.end - iv.start);
      const double sigma = std::sqrt(p / std::pow(10.0, cfg.snr_db / 10.0));
      return kdee::gaussian_noise_exact_power(5000, sigma, stream);
    }();
    const auto interference = interference_background(cfg, kdee::derive_seed(777, "background"),
                                                      [&] {
                                                        const auto modulated = modulate(
                                                            format_by_name("16QAM"), cfg,
                                                            kdee::derive_seed(777, "modulation"));
                                                        double p = 0.0;
                                                        for (std::size_t i = iv.start; i < iv.end; ++i)
                                                          p += modulated.samples[i] * modulated.samples[i];
                                                        return p / static_cast<double>(iv.end - iv.start);
                                                      }());
    for (std::size_t i = 0; i < iv.start; ++i)
      CHECK(rec.series.samples[i] == background_noise[i] + interference.samples[i]);
  }

  SECTION("achieved SNR and SIR match the targets within 0.1 dB") {
    // Re-measure from the generated components' RMS over the full record.
    const auto modulated = modulate(format_by_name("16QAM"), cfg, kdee::derive_seed(777, "modulation"));
    double p_inj = 0.0;
    for (std::size_t i = iv.start; i < iv.end; ++i) p_inj += modulated.samples[i] * modulated.samples[i];
    p_inj /= static_cast<double>(iv.end - iv.start);
    const auto interference = interference_background(cfg, kdee::derive_seed(777, "background"), p_inj);
    const double p_interf = mean_square(interference.samples);
    const double achieved_sir = 10.0 * std::log10(p_inj / p_interf);
    CHECK(achieved_sir == Approx(cfg.sir_db).margin(0.1));
    std::vector<double> noise(rec.series.samples);
    for (std::size_t i = 0; i < noise.size(); ++i) noise[i] -= interference.samples[i];
    for (std::size_t i = iv.start; i < iv.end; ++i) noise[i] -= modulated.samples[i];
    const double achieved_snr = 10.0 * std::log10(p_inj / mean_square(noise));
    CHECK(achieved_snr == Approx(cfg.snr_db).margin(0.1));
  }

  SECTION("same seed reproduces the record bitwise") {
    const auto again = make_injection_record(format_by_name("16QAM"), cfg, 777);
    CHECK(again.series.samples == rec.series.samples);
    CHECK(again.truth == rec.truth);
  }
}

TEST_CASE("sine records") {
  kdee::SineParams p;
  p.freq_hz = 5.0;
  p.fs_hz = 500.0;
  p.length = 1000;
  p.amplitude = 2.0;
  p.noise_sigma = 0.0;
  p.seed = 3;

  SECTION("noiseless sine is exact") {
    const auto rec = kdee::sine_record(p);
    for (std::size_t i = 0; i < rec.series.size(); ++i) {
      const double expected =
          2.0 * std::sin(2.0 * std::numbers::pi * 5.0 * static_cast<double>(i) / 500.0);
      CHECK(rec.series.samples[i] == expected);
    }
  }

  SECTION("abs-sine insert is nonnegative inside the interval") {
    const auto rec = kdee::abs_sine_insert(p, 400, 100);
    REQUIRE(rec.truth.size() == 1);
    CHECK(rec.truth[0] == kdee::LabeledInterval{400, 500, "abs_sine"});
    for (std::size_t i = 400; i < 500; ++i) CHECK(rec.series.samples[i] >= 0.0);
  }

  SECTION("insert out of range is rejected") {
    CHECK_THROWS_AS(kdee::abs_sine_insert(p, 950, 100), kdee::ParameterError);
  }
}

TEST_CASE("rk4 integrates exp decay to 1e-10") {
  auto f = [](const std::array<double, 1>& y) { return std::array<double, 1>{-y[0]}; };
  std::array<double, 1> y{1.0};
  const double dt = 1.0 / 150.0;
  for (int i = 0; i < 150; ++i) y = kdee::rk4_step(f, y, dt);
  CHECK(std::fabs(y[0] - std::exp(-1.0)) < 1e-10);
}

TEST_CASE("lorenz origin is a fixed point") {
  LorenzConfig cfg;
  auto f = [&cfg](const std::array<double, 3>& s) {
    return std::array<double, 3>{cfg.sigma * (s[1] - s[0]), s[0] * (cfg.rho - s[2]) - s[1],
                                 s[0] * s[1] - cfg.beta * s[2]};
  };
  const auto next = kdee::rk4_step(f, std::array<double, 3>{0.0, 0.0, 0.0}, 1.0 / 150.0);
  CHECK(next == std::array<double, 3>{0.0, 0.0, 0.0});
}

TEST_CASE("lorenz trajectory is reproducible and bounded") {
  LorenzConfig cfg;
  cfg.duration_s = 120.0;  // shortened for the reproducibility check
  const auto a = lorenz_x(cfg);
  const auto b = lorenz_x(cfg);
  REQUIRE(a.samples == b.samples);
  CHECK(a.sample_rate_hz == 150.0);
  CHECK(a.size() == static_cast<std::size_t>(120 * 150 - std::ceil(93.0 * 150.0)));

  // Full-duration trajectory stays bounded at these parameters.
  const auto full = lorenz_x(LorenzConfig{});
  CHECK(full.size() == 150000 - 13950);
  double max_abs = 0.0;
  for (double v : full.samples) max_abs = std::max(max_abs, std::fabs(v));
  CHECK(max_abs < 100.0);
}
