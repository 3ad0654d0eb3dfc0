#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kdee/core.hpp"
#include "kdee/density.hpp"
#include "kdee/embedding.hpp"
#include "kdee/infotheory.hpp"
#include "kdee/kdee_stat.hpp"
#include "kdee/spectral.hpp"

namespace kdee {

enum class Representation { kde, psd, delta_ke };

inline std::string to_string(Representation r) {
  switch (r) {
    case Representation::kde: return "kde";
    case Representation::psd: return "psd";
    case Representation::delta_ke: return "delta-ke";
  }
  return "?";
}

inline Representation representation_from_string(const std::string& s) {
  if (s == "kde") return Representation::kde;
  if (s == "psd") return Representation::psd;
  if (s == "delta-ke" || s == "delta_ke") return Representation::delta_ke;
  throw ParameterError("unknown representation '" + s + "'");
}

// Flagging side for the modified z-score. Auto: KL statistics flag one-sided
// (divergence from baseline only grows under change), delta-ke two-sided.
enum class ZSides { auto_sided, one_sided, two_sided };

struct WindowConfig {
  std::size_t window_len = 256;
  std::size_t stride = 128;
  std::size_t baseline_count = 10;  // W
  double z_threshold = 3.5;
  Representation representation = Representation::kde;
  std::size_t tau = 13;               // embedding delay inside each window
  std::size_t delta_ke_tau_max = 25;  // sweep bound for the delta-ke statistic
  int grid_nx = 128;
  int grid_ny = 128;
  ZSides z_sides = ZSides::auto_sided;
  bool regularize_renormalize = true;  // renormalize after the 0.001*max floor
  // Streaming (causal) mode: each window is scored against a trailing history
  // of recent statistics only, and windows that fire are quarantined from both
  // the baseline and the history so a long event cannot swallow its own
  // reference. Batch mode (default) is the retrospective per-record analysis.
  bool streaming = false;
  std::size_t streaming_history = 50;     // trailing statistics used per score
  std::size_t streaming_min_history = 8;  // scores start once this many are banked
};

inline void validate(const WindowConfig& cfg) {
  if (cfg.stride == 0 || cfg.stride > cfg.window_len)
    throw ParameterError("stride must satisfy 0 < stride <= window_len");
  if (cfg.baseline_count < 3) throw ParameterError("baseline_count must be >= 3");
  if (!(cfg.z_threshold > 0.0)) throw ParameterError("z_threshold must be positive");
  if (cfg.tau < 1) throw ParameterError("tau must be >= 1");
  if (cfg.window_len <= cfg.tau + 2)
    throw ParameterError("window_len too short for the embedding delay");
  if (cfg.representation == Representation::delta_ke) {
    if (cfg.delta_ke_tau_max < 1 || cfg.window_len <= cfg.delta_ke_tau_max + 2)
      throw ParameterError("window_len too short for delta_ke_tau_max");
  }
  if (cfg.streaming && (cfg.streaming_history < 3 || cfg.streaming_min_history < 3 ||
                        cfg.streaming_min_history > cfg.streaming_history))
    throw ParameterError("streaming history must satisfy 3 <= min <= max");
}

// Per-window statistics plus the flagged intervals they merge into.
struct DetectionReport {
  std::size_t window_len = 0;
  std::vector<std::size_t> window_starts;
  std::vector<double> statistic;
  std::vector<double> z_scores;
  std::vector<bool> flagged;
  std::vector<LabeledInterval> intervals;  // merged maximal flagged runs, label "detected"
  bool degenerate_scale = false;           // MAD hit zero somewhere; affected scores forced to 0
};

// Window start offsets 0, stride, 2*stride, ...; trailing partial window dropped.
inline std::vector<std::size_t> segment(const TimeSeries& series, const WindowConfig& cfg) {
  validate(cfg);
  if (series.samples.size() < cfg.window_len)
    throw InsufficientDataError("series shorter than one window");
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + cfg.window_len <= series.samples.size(); s += cfg.stride)
    starts.push_back(s);
  return starts;
}

// Z = 0.6745 (x - median) / MAD. All-equal inputs (MAD = 0) score 0 everywhere;
// the caller is told through *degenerate.
inline std::vector<double> modified_z_scores(std::span<const double> values,
                                             bool* degenerate = nullptr) {
  if (values.size() < 3) throw ParameterError("modified z-scores need at least 3 values");
  auto median_of = [](std::vector<double> v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double med = v[mid];
    if (v.size() % 2 == 0) {
      med = 0.5 * (med + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
    }
    return med;
  };
  const double med = median_of({values.begin(), values.end()});
  std::vector<double> absdev(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) absdev[i] = std::fabs(values[i] - med);
  const double mad = median_of(std::move(absdev));
  std::vector<double> z(values.size(), 0.0);
  if (mad > 0.0) {
    for (std::size_t i = 0; i < values.size(); ++i) z[i] = 0.6745 * (values[i] - med) / mad;
  } else if (degenerate) {
    *degenerate = true;
  }
  return z;
}

// Maximal consecutive flagged runs become one interval from the first start to
// the last start + window_len.
inline std::vector<LabeledInterval> merge_flags(const std::vector<bool>& flags,
                                                const std::vector<std::size_t>& starts,
                                                std::size_t window_len) {
  if (flags.size() != starts.size()) throw ParameterError("flags and starts must align");
  std::vector<LabeledInterval> out;
  std::size_t i = 0;
  while (i < flags.size()) {
    if (!flags[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < flags.size() && flags[j + 1]) ++j;
    out.push_back(LabeledInterval{starts[i], starts[j] + window_len, "detected"});
    i = j + 1;
  }
  return out;
}

namespace detector_detail {

inline bool two_sided_flags(const WindowConfig& cfg) {
  return cfg.z_sides == ZSides::two_sided ||
         (cfg.z_sides == ZSides::auto_sided && cfg.representation == Representation::delta_ke);
}

// Statistic for window k against the given baseline window indices (empty for
// representations that need no baseline).
using StatFn = std::function<double(std::size_t k, std::span<const std::size_t> baseline)>;

// Shared engine behind the detector variants. `warmup` windows at the start
// carry statistic 0 and only feed the baseline.
//
// Batch mode: every scored window's baseline is the W immediately preceding
// windows, and the modified z-scores are taken over all scored statistics of
// the record at once.
//
// Streaming mode: windows are processed in order; the baseline is the W most
// recent windows that did NOT fire, the z reference is a trailing history of
// non-fired statistics, and scoring starts once streaming_min_history values
// are banked. Quarantining fired windows keeps a long-lived change from
// absorbing the reference that is supposed to expose it.
inline DetectionReport run_detector(std::vector<std::size_t> starts, const WindowConfig& cfg,
                                    bool needs_baseline, const StatFn& stat) {
  const std::size_t n = starts.size();
  const std::size_t w = cfg.baseline_count;
  if (n < w + 1)
    throw InsufficientDataError("need at least baseline_count+1 windows, got " + std::to_string(n));
  const std::size_t warmup = needs_baseline ? w : 0;
  const bool two_sided = two_sided_flags(cfg);

  DetectionReport report;
  report.window_len = cfg.window_len;
  report.statistic.assign(n, 0.0);
  report.z_scores.assign(n, 0.0);
  report.flagged.assign(n, false);

  if (!cfg.streaming) {
    std::vector<std::size_t> baseline;
    for (std::size_t k = warmup; k < n; ++k) {
      baseline.clear();
      if (needs_baseline) {
        for (std::size_t m = k - w; m < k; ++m) baseline.push_back(m);
      }
      report.statistic[k] = stat(k, baseline);
    }
    const std::size_t scored = n - warmup;
    if (scored >= 3) {
      const auto z = modified_z_scores(
          std::span<const double>(report.statistic.data() + warmup, scored),
          &report.degenerate_scale);
      for (std::size_t i = 0; i < scored; ++i) report.z_scores[warmup + i] = z[i];
    }
    for (std::size_t k = warmup; k < n; ++k) {
      const double z = report.z_scores[k];
      report.flagged[k] = two_sided ? std::fabs(z) > cfg.z_threshold : z > cfg.z_threshold;
    }
  } else {
    std::deque<std::size_t> normal;  // windows admitted to the baseline
    std::deque<double> history;     // their recent statistics
    std::vector<std::size_t> baseline;
    for (std::size_t k = 0; k < n; ++k) {
      if (k < warmup) {
        normal.push_back(k);
        continue;
      }
      baseline.clear();
      if (needs_baseline) baseline.assign(normal.end() - static_cast<std::ptrdiff_t>(w), normal.end());
      const double x = stat(k, baseline);
      report.statistic[k] = x;
      bool fired = false;
      if (history.size() >= cfg.streaming_min_history) {
        std::vector<double> ref(history.begin(), history.end());
        ref.push_back(x);
        const auto z = modified_z_scores(ref, &report.degenerate_scale);
        report.z_scores[k] = z.back();
        fired = two_sided ? std::fabs(z.back()) > cfg.z_threshold : z.back() > cfg.z_threshold;
      }
      report.flagged[k] = fired;
      if (!fired) {
        normal.push_back(k);
        history.push_back(x);
        if (history.size() > cfg.streaming_history) history.pop_front();
      }
    }
  }
  report.window_starts = std::move(starts);
  report.intervals = merge_flags(report.flagged, report.window_starts, cfg.window_len);
  return report;
}

struct CloudBox {
  double lo_x, hi_x, lo_y, hi_y;
};

// Per-window bounding box pre-expanded by 3 kernel standard deviations, i.e.
// the same margin auto_grid would use for that cloud alone.
inline CloudBox expanded_box(const PointCloud& cloud) {
  const GridSpec s = auto_grid(cloud, 2, 2);
  return CloudBox{s.x0, s.x0 + 2.0 * s.dx, s.y0, s.y0 + 2.0 * s.dy};
}

}  // namespace detector_detail

// Sliding-baseline change detection on the KDE representation: each scored
// window's KDE is compared (symmetrized regularized KL) against the pointwise
// median of the W baseline windows' KDEs, all evaluated on one grid spanning
// the union of the W+1 expanded cloud bounding boxes.
inline DetectionReport detect_sliding_baseline(const TimeSeries& series, WindowConfig cfg) {
  cfg.representation = Representation::kde;
  validate(cfg);
  validate(series);
  auto starts = segment(series, cfg);
  const std::size_t n_windows = starts.size();

  std::vector<PointCloud> clouds(n_windows);
  std::vector<detector_detail::CloudBox> boxes(n_windows);
  for (std::size_t k = 0; k < n_windows; ++k) {
    clouds[k] = takens_embed(slice(series, starts[k], cfg.window_len), cfg.tau, cfg.tau);
    boxes[k] = detector_detail::expanded_box(clouds[k]);
  }

  // Consecutive comparisons usually share the union box, so memoize each
  // window's KDE for the spec it was last evaluated on.
  std::vector<std::optional<DensityGrid>> cache(n_windows);
  auto kde_on = [&](std::size_t k, const GridSpec& spec) -> const DensityGrid& {
    if (!cache[k] || !(cache[k]->spec == spec)) cache[k] = estimate_kde(clouds[k], spec);
    return *cache[k];
  };

  std::vector<DensityGrid> baseline_grids;
  auto stat = [&](std::size_t k, std::span<const std::size_t> baseline) {
    detector_detail::CloudBox u = boxes[k];
    for (std::size_t m : baseline) {
      u.lo_x = std::min(u.lo_x, boxes[m].lo_x);
      u.hi_x = std::max(u.hi_x, boxes[m].hi_x);
      u.lo_y = std::min(u.lo_y, boxes[m].lo_y);
      u.hi_y = std::max(u.hi_y, boxes[m].hi_y);
    }
    GridSpec spec;
    spec.x0 = u.lo_x;
    spec.y0 = u.lo_y;
    spec.nx = cfg.grid_nx;
    spec.ny = cfg.grid_ny;
    spec.dx = (u.hi_x - u.lo_x) / spec.nx;
    spec.dy = (u.hi_y - u.lo_y) / spec.ny;
    baseline_grids.clear();
    for (std::size_t m : baseline) baseline_grids.push_back(kde_on(m, spec));
    const DensityGrid median = median_grid(baseline_grids);
    return symmetrized_kl_regularized(median, kde_on(k, spec), cfg.regularize_renormalize).value;
  };
  return detector_detail::run_detector(std::move(starts), cfg, true, stat);
}

// PSD variant: per-window representation is the normalized Hann periodogram,
// the baseline is the binwise median renormalized to sum 1, and the statistic
// is the same symmetrized regularized KL over frequency bins.
inline DetectionReport detect_psd_baseline(const TimeSeries& series, WindowConfig cfg) {
  cfg.representation = Representation::psd;
  validate(cfg);
  validate(series);
  auto starts = segment(series, cfg);
  const std::size_t n_windows = starts.size();

  std::vector<std::vector<double>> psds(n_windows);
  for (std::size_t k = 0; k < n_windows; ++k) {
    psds[k] = normalized_periodogram(
        std::span<const double>(series.samples.data() + starts[k], cfg.window_len));
  }

  const std::size_t bins = cfg.window_len;
  std::vector<double> baseline_psd(bins);
  std::vector<double> scratch;
  auto stat = [&](std::size_t k, std::span<const std::size_t> baseline) {
    const std::size_t w = baseline.size();
    scratch.resize(w);
    for (std::size_t b = 0; b < bins; ++b) {
      for (std::size_t m = 0; m < w; ++m) scratch[m] = psds[baseline[m]][b];
      const std::size_t mid = w / 2;
      std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(mid),
                       scratch.end());
      double med = scratch[mid];
      if (w % 2 == 0)
        med = 0.5 * (med + *std::max_element(scratch.begin(),
                                             scratch.begin() + static_cast<std::ptrdiff_t>(mid)));
      baseline_psd[b] = med;
    }
    double mass = 0.0;
    for (double v : baseline_psd) mass += v;
    if (!(mass > 0.0)) throw NumericError("PSD baseline has zero mass");
    for (double& v : baseline_psd) v /= mass;
    return symmetrized_kl_regularized(std::span<const double>(baseline_psd),
                                      std::span<const double>(psds[k]), cfg.regularize_renormalize)
        .value;
  };
  return detector_detail::run_detector(std::move(starts), cfg, true, stat);
}

// Delta-KE variant: the per-window statistic is the range of KE_tau over
// tau = 1..delta_ke_tau_max within the window; flags are two-sided by default
// since injections can raise or lower structure. The statistic needs no
// baseline, so every window is scored; zeroing the first W would shrink the
// background population the z-scores rest on and measurably hurts recall on
// long injections.
inline DetectionReport detect_delta_ke(const TimeSeries& series, WindowConfig cfg) {
  cfg.representation = Representation::delta_ke;
  validate(cfg);
  validate(series);
  const auto starts = segment(series, cfg);
  auto stat = [&](std::size_t k, std::span<const std::size_t>) {
    const TimeSeries window = slice(series, starts[k], cfg.window_len);
    return kdee_profile(window, cfg.delta_ke_tau_max, cfg.grid_nx, cfg.grid_ny).delta_ke.value;
  };
  return detector_detail::run_detector(starts, cfg, false, stat);
}

inline DetectionReport detect(const TimeSeries& series, const WindowConfig& cfg) {
  switch (cfg.representation) {
    case Representation::kde: return detect_sliding_baseline(series, cfg);
    case Representation::psd: return detect_psd_baseline(series, cfg);
    case Representation::delta_ke: return detect_delta_ke(series, cfg);
  }
  throw ParameterError("unknown representation");
}

}  // namespace kdee
