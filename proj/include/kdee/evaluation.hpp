#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "kdee/core.hpp"
#include "kdee/detector.hpp"
#include "kdee/kdee_stat.hpp"
#include "kdee/parallel.hpp"
#include "kdee/rng.hpp"
#include "kdee/simulators.hpp"

namespace kdee {

struct F1Result {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

inline F1Result f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  F1Result r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

// Which length the overlap fraction is measured against.
enum class OverlapDenominator { window, truth };

// Window-level F1: a window is positive-truth when its overlap with the truth
// intervals reaches min_overlap of the window length (boundary inclusive).
// With OverlapDenominator::truth, the fraction is taken against each truth
// interval's own length instead.
inline F1Result f1_overlap(const std::vector<std::size_t>& window_starts, std::size_t window_len,
                           const std::vector<bool>& flagged,
                           const std::vector<LabeledInterval>& truth, double min_overlap = 0.25,
                           OverlapDenominator denom = OverlapDenominator::window) {
  if (window_starts.size() != flagged.size()) throw ParameterError("windows and flags must align");
  if (window_len == 0) throw ParameterError("window_len must be positive");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t k = 0; k < window_starts.size(); ++k) {
    const std::size_t w_lo = window_starts[k];
    const std::size_t w_hi = w_lo + window_len;
    bool positive = false;
    for (const auto& iv : truth) {
      const std::size_t lo = std::max(w_lo, iv.start);
      const std::size_t hi = std::min(w_hi, iv.end);
      const std::size_t overlap = hi > lo ? hi - lo : 0;
      const std::size_t denominator =
          denom == OverlapDenominator::window ? window_len : iv.end - iv.start;
      if (static_cast<double>(overlap) >= min_overlap * static_cast<double>(denominator)) {
        positive = true;
        break;
      }
    }
    if (flagged[k] && positive) ++tp;
    else if (flagged[k] && !positive) ++fp;
    else if (!flagged[k] && positive) ++fn;
  }
  return f1_from_counts(tp, fp, fn);
}

inline F1Result f1_overlap(const DetectionReport& report, const std::vector<LabeledInterval>& truth,
                           double min_overlap = 0.25,
                           OverlapDenominator denom = OverlapDenominator::window) {
  return f1_overlap(report.window_starts, report.window_len, report.flagged, truth, min_overlap,
                    denom);
}

// Spearman rank correlation with midrank ties.
inline double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw ParameterError("spearman needs paired data");
  auto ranks = [](std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double mid = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = mid;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(xs);
  const auto ry = ranks(ys);
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// ---------------------------------------------------------------------------
// Delta-KE vs SNR correlation sweep
// ---------------------------------------------------------------------------

struct DeltaKeSweepConfig {
  std::vector<Format> formats;
  std::vector<double> snr_grid = {-10, -7, -4, -1, 2, 5, 8, 11};
  std::size_t trials = 10;
  std::vector<std::size_t> decimations = {1, 2, 3, 4};
  std::size_t length = 3000;  // samples before decimation
  std::size_t tau_max = 50;
  std::uint64_t seed = 0;
};

struct DeltaKeSweepPoint {
  double snr_db = 0.0;
  std::size_t decimation = 1;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};

struct DeltaKeSweep {
  std::vector<DeltaKeSweepPoint> points;  // ordered by (decimation, snr)
};

// Generates trials x formats modulated signals with AWGN per SNR point,
// computes delta-KE per (signal, decimation), and pools mean/std across
// formats and trials. Deterministic for a given seed; trials run in parallel
// into preallocated slots.
inline DeltaKeSweep sweep_delta_ke(const DeltaKeSweepConfig& cfg) {
  if (cfg.formats.empty()) throw ParameterError("sweep needs at least one format");
  if (cfg.trials < 1) throw ParameterError("sweep needs at least one trial");
  RfSimConfig sim;
  if (cfg.length % sim.samples_per_symbol != 0)
    throw ParameterError("length must be a multiple of samples_per_symbol");
  sim.symbols = cfg.length / sim.samples_per_symbol;

  const std::size_t n_formats = cfg.formats.size();
  const std::size_t n_snr = cfg.snr_grid.size();
  const std::size_t n_dec = cfg.decimations.size();
  const std::size_t cases = n_formats * n_snr * cfg.trials;
  std::vector<std::vector<double>> results(cases, std::vector<double>(n_dec, 0.0));

  parallel_for_each_index(cases, [&](std::size_t case_idx) {
    const std::size_t f = case_idx % n_formats;
    const std::size_t s = (case_idx / n_formats) % n_snr;
    const std::size_t trial = case_idx / (n_formats * n_snr);
    RfSimConfig local = sim;
    local.snr_db = cfg.snr_grid[s];
    const ModulationFormat& fmt = format_by_id(cfg.formats[f]);
    const std::uint64_t case_seed = derive_seed(cfg.seed, "delta-ke-sweep", f, s, trial);
    TimeSeries signal = modulate(fmt, local, case_seed);
    const double sigma = awgn_sigma(signal, local.snr_db);
    SplitMix64 noise_stream = derive_stream(case_seed, "noise");
    const auto noise = gaussian_noise_exact_power(signal.size(), sigma, noise_stream);
    for (std::size_t i = 0; i < signal.size(); ++i) signal.samples[i] += noise[i];
    for (std::size_t d = 0; d < n_dec; ++d) {
      const TimeSeries reduced = decimate(signal, cfg.decimations[d]);
      results[case_idx][d] = kdee_profile(reduced, cfg.tau_max).delta_ke.value;
    }
  });

  DeltaKeSweep out;
  for (std::size_t d = 0; d < n_dec; ++d) {
    for (std::size_t s = 0; s < n_snr; ++s) {
      DeltaKeSweepPoint pt;
      pt.snr_db = cfg.snr_grid[s];
      pt.decimation = cfg.decimations[d];
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
        for (std::size_t f = 0; f < n_formats; ++f) {
          sum += results[trial * n_formats * n_snr + s * n_formats + f][d];
          ++count;
        }
      }
      pt.count = count;
      pt.mean = sum / static_cast<double>(count);
      double ss = 0.0;
      for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
        for (std::size_t f = 0; f < n_formats; ++f) {
          const double v = results[trial * n_formats * n_snr + s * n_formats + f][d];
          ss += (v - pt.mean) * (v - pt.mean);
        }
      }
      pt.stddev = count > 1 ? std::sqrt(ss / static_cast<double>(count - 1)) : 0.0;
      out.points.push_back(pt);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Detection F1 sweep across SNR+SIR levels
// ---------------------------------------------------------------------------

struct DetectionSweepConfig {
  std::vector<Format> formats;
  std::vector<double> snr_sir_grid = {-10, -8, -6, -4, -2, 0, 2, 4, 6, 8, 10};
  std::size_t trials = 10;
  std::vector<Representation> methods = {Representation::kde, Representation::psd,
                                         Representation::delta_ke};
  WindowConfig window;
  double min_overlap = 0.25;
  std::uint64_t seed = 0;
};

struct DetectionSweepPoint {
  double snr_sir_db = 0.0;
  Representation method = Representation::kde;
  F1Result pooled;       // counts summed over all records at this level
  double mean_f1 = 0.0;  // across per-record F1 scores
  double std_f1 = 0.0;
  std::size_t records = 0;
};

struct DetectionSweep {
  std::vector<DetectionSweepPoint> points;  // ordered by (level, method)
};

inline DetectionSweep sweep_detection(const DetectionSweepConfig& cfg) {
  if (cfg.formats.empty()) throw ParameterError("sweep needs at least one format");
  if (cfg.trials < 1) throw ParameterError("sweep needs at least one trial");
  if (cfg.methods.empty()) throw ParameterError("sweep needs at least one method");

  const std::size_t n_formats = cfg.formats.size();
  const std::size_t n_levels = cfg.snr_sir_grid.size();
  const std::size_t n_methods = cfg.methods.size();
  const std::size_t cases = n_formats * n_levels * cfg.trials;
  std::vector<std::vector<F1Result>> results(cases, std::vector<F1Result>(n_methods));

  parallel_for_each_index(cases, [&](std::size_t case_idx) {
    const std::size_t f = case_idx % n_formats;
    const std::size_t lv = (case_idx / n_formats) % n_levels;
    const std::size_t trial = case_idx / (n_formats * n_levels);
    RfSimConfig sim;
    sim.snr_db = cfg.snr_sir_grid[lv];
    sim.sir_db = cfg.snr_sir_grid[lv];
    const ModulationFormat& fmt = format_by_id(cfg.formats[f]);
    const LabeledRecord rec =
        make_injection_record(fmt, sim, derive_seed(cfg.seed, "detection-sweep", f, lv, trial));
    for (std::size_t m = 0; m < n_methods; ++m) {
      WindowConfig wc = cfg.window;
      wc.representation = cfg.methods[m];
      const DetectionReport report = detect(rec.series, wc);
      results[case_idx][m] = f1_overlap(report, rec.truth, cfg.min_overlap);
    }
  });

  DetectionSweep out;
  for (std::size_t lv = 0; lv < n_levels; ++lv) {
    for (std::size_t m = 0; m < n_methods; ++m) {
      DetectionSweepPoint pt;
      pt.snr_sir_db = cfg.snr_sir_grid[lv];
      pt.method = cfg.methods[m];
      std::size_t tp = 0, fp = 0, fn = 0;
      std::vector<double> f1s;
      for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
        for (std::size_t f = 0; f < n_formats; ++f) {
          const F1Result& r = results[trial * n_formats * n_levels + lv * n_formats + f][m];
          tp += r.tp;
          fp += r.fp;
          fn += r.fn;
          f1s.push_back(r.f1);
        }
      }
      pt.pooled = f1_from_counts(tp, fp, fn);
      pt.records = f1s.size();
      double sum = 0.0;
      for (double v : f1s) sum += v;
      pt.mean_f1 = sum / static_cast<double>(f1s.size());
      double ss = 0.0;
      for (double v : f1s) ss += (v - pt.mean_f1) * (v - pt.mean_f1);
      pt.std_f1 = f1s.size() > 1 ? std::sqrt(ss / static_cast<double>(f1s.size() - 1)) : 0.0;
      out.points.push_back(pt);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Timing
// ---------------------------------------------------------------------------

struct TimingResult {
  double mean_s = 0.0;
  double std_s = 0.0;
  double min_s = 0.0;
  std::size_t repeats = 0;
};

// Wall-clock of one full sliding-window analysis: mean over `repeats` runs
// after one warmup.
inline TimingResult time_method(Representation method, const TimeSeries& series, WindowConfig cfg,
                                std::size_t repeats = 5) {
  if (repeats < 1) throw ParameterError("timing needs at least one repeat");
  cfg.representation = method;
  (void)detect(series, cfg);  // warmup
  std::vector<double> times(repeats);
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    (void)detect(series, cfg);
    const auto t1 = std::chrono::steady_clock::now();
    times[r] = std::chrono::duration<double>(t1 - t0).count();
  }
  TimingResult out;
  out.repeats = repeats;
  out.min_s = *std::min_element(times.begin(), times.end());
  double sum = 0.0;
  for (double t : times) sum += t;
  out.mean_s = sum / static_cast<double>(repeats);
  double ss = 0.0;
  for (double t : times) ss += (t - out.mean_s) * (t - out.mean_s);
  out.std_s = repeats > 1 ? std::sqrt(ss / static_cast<double>(repeats - 1)) : 0.0;
  return out;
}

}  // namespace kdee
