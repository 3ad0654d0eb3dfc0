#include <catch2/catch.hpp>

#include <cmath>

#include "kdee/evaluation.hpp"

using kdee::f1_overlap;
using kdee::F1Result;
using kdee::LabeledInterval;
using kdee::OverlapDenominator;
using kdee::spearman;

TEST_CASE("f1_overlap counts") {
  const std::vector<std::size_t> starts{0, 128, 256, 384, 512};
  const std::vector<LabeledInterval> truth{{200, 500, "injection"}};
  // Positive-truth windows (len 256, >= 25% overlap = 64 samples):
  //   [0,256) overlap 56 -> no; [128,384) overlap 184 -> yes;
  //   [256,512) overlap 244 -> yes; [384,640) overlap 116 -> yes;
  //   [512,768) overlap 0 -> no.

  SECTION("perfect detector") {
    const std::vector<bool> flags{false, true, true, true, false};
    const auto r = f1_overlap(starts, 256, flags, truth);
    CHECK(r.tp == 3);
    CHECK(r.fp == 0);
    CHECK(r.fn == 0);
    CHECK(r.f1 == 1.0);
  }

  SECTION("no flags, nonempty truth") {
    const std::vector<bool> flags{false, false, false, false, false};
    const auto r = f1_overlap(starts, 256, flags, truth);
    CHECK(r.f1 == 0.0);
    CHECK(r.fn == 3);
  }

  SECTION("boundary overlap counts as positive") {
    // Window [0,256) against truth starting at 192: overlap exactly 64 = 25%.
    const std::vector<std::size_t> one{0};
    const std::vector<LabeledInterval> boundary{{192, 600, "x"}};
    const auto r = f1_overlap(one, 256, std::vector<bool>{true}, boundary);
    CHECK(r.tp == 1);
    const std::vector<LabeledInterval> short_of_boundary{{193, 600, "x"}};
    const auto r2 = f1_overlap(one, 256, std::vector<bool>{true}, short_of_boundary);
    CHECK(r2.fp == 1);
  }

  SECTION("permutation invariance") {
    const std::vector<bool> flags{true, false, true, false, true};
    const auto direct = f1_overlap(starts, 256, flags, truth);
    const std::vector<std::size_t> shuffled_starts{512, 0, 384, 128, 256};
    const std::vector<bool> shuffled_flags{true, true, false, false, true};
    const auto shuffled = f1_overlap(shuffled_starts, 256, shuffled_flags, truth);
    CHECK(direct.tp == shuffled.tp);
    CHECK(direct.fp == shuffled.fp);
    CHECK(direct.fn == shuffled.fn);
  }

  SECTION("raising min_overlap never adds positive windows") {
    const std::vector<bool> flags(5, true);
    std::size_t prev_positive = 1000;
    for (double ov : {0.05, 0.25, 0.5, 0.75, 1.0}) {
      const auto r = f1_overlap(starts, 256, flags, truth, ov);
      const std::size_t positive = r.tp;  // all flagged, so tp == positive count
      CHECK(positive <= prev_positive);
      prev_positive = positive;
    }
  }

  SECTION("truth-denominated overlap") {
    // Tiny truth fully inside a window: fraction of window is small, fraction
    // of truth is 1.
    const std::vector<std::size_t> one{0};
    const std::vector<LabeledInterval> tiny{{10, 20, "x"}};
    const auto window_denom = f1_overlap(one, 256, std::vector<bool>{true}, tiny, 0.25,
                                         OverlapDenominator::window);
    CHECK(window_denom.fp == 1);
    const auto truth_denom = f1_overlap(one, 256, std::vector<bool>{true}, tiny, 0.25,
                                        OverlapDenominator::truth);
    CHECK(truth_denom.tp == 1);
  }
}

TEST_CASE("f1 from counts handles empty denominators") {
  const auto r = kdee::f1_from_counts(0, 0, 0);
  CHECK(r.precision == 0.0);
  CHECK(r.recall == 0.0);
  CHECK(r.f1 == 0.0);
}

TEST_CASE("spearman rank correlation") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  SECTION("monotone increasing") {
    const std::vector<double> y{2, 4, 9, 16, 30};
    CHECK(spearman(x, y) == Approx(1.0));
  }
  SECTION("monotone decreasing") {
    const std::vector<double> y{5, 4, 3, 2, 1};
    CHECK(spearman(x, y) == Approx(-1.0));
  }
  SECTION("ties get midranks") {
    const std::vector<double> y{1, 1, 2, 2, 3};
    CHECK(spearman(x, y) > 0.9);
  }
}

TEST_CASE("delta-ke sweep smoke at reduced scale") {
  kdee::DeltaKeSweepConfig cfg;
  cfg.formats = {kdee::Format::BPSK, kdee::Format::QPSK};
  cfg.snr_grid = {-10, 0, 10};
  cfg.trials = 2;
  cfg.decimations = {1, 2};
  cfg.length = 1500;
  cfg.tau_max = 25;
  cfg.seed = 64;
  const auto sweep = kdee::sweep_delta_ke(cfg);
  REQUIRE(sweep.points.size() == 6);  // 3 SNRs x 2 decimations
  for (const auto& pt : sweep.points) {
    CHECK(pt.count == 4);  // trials x formats
    CHECK(pt.stddev >= 0.0);
  }
  // Pooled means should rise from -10 dB to +10 dB at decimation 1.
  CHECK(sweep.points[0].snr_db == -10.0);
  CHECK(sweep.points[2].snr_db == 10.0);
  CHECK(sweep.points[2].mean > sweep.points[0].mean);

  SECTION("same seed reproduces the sweep exactly") {
    const auto again = kdee::sweep_delta_ke(cfg);
    REQUIRE(again.points.size() == sweep.points.size());
    for (std::size_t i = 0; i < sweep.points.size(); ++i) {
      CHECK(again.points[i].mean == sweep.points[i].mean);
      CHECK(again.points[i].stddev == sweep.points[i].stddev);
    }
  }
}

TEST_CASE("detection sweep smoke at reduced scale") {
  kdee::DetectionSweepConfig cfg;
  cfg.formats = {kdee::Format::BPSK};
  cfg.snr_sir_grid = {10.0};
  cfg.trials = 3;
  cfg.methods = {kdee::Representation::kde, kdee::Representation::psd};
  cfg.window.grid_nx = 64;
  cfg.window.grid_ny = 64;
  cfg.seed = 11;
  const auto sweep = kdee::sweep_detection(cfg);
  REQUIRE(sweep.points.size() == 2);
  for (const auto& pt : sweep.points) {
    CHECK(pt.records == 3);
    CHECK(pt.pooled.f1 >= 0.0);
    CHECK(pt.pooled.f1 <= 1.0);
  }
  const auto again = kdee::sweep_detection(cfg);
  for (std::size_t i = 0; i < sweep.points.size(); ++i)
    CHECK(again.points[i].pooled.f1 == sweep.points[i].pooled.f1);
}

TEST_CASE("timing harness reports sane numbers") {
  kdee::RfSimConfig sim;
  const auto rec = kdee::make_injection_record(kdee::format_by_name("BPSK"), sim, 5150);
  kdee::WindowConfig wc;
  wc.grid_nx = 32;
  wc.grid_ny = 32;
  const auto timing = kdee::time_method(kdee::Representation::psd, rec.series, wc, 3);
  CHECK(timing.repeats == 3);
  CHECK(timing.mean_s > 0.0);
  CHECK(timing.min_s <= timing.mean_s);
}
