#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "kdee/core.hpp"

namespace kdee {

// Symmetric Hann window of length n.
inline std::vector<double> hann_window(std::size_t n) {
  if (n < 2) throw ParameterError("window length must be >= 2");
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                 static_cast<double>(n - 1)));
  return w;
}

// Full-length DFT via a precomputed twiddle table; O(n^2) is plenty for the
// window sizes the detector uses and keeps arbitrary lengths exact.
inline std::vector<std::complex<double>> dft(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> twiddle(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    twiddle[k] = {std::cos(angle), std::sin(angle)};
  }
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc{0.0, 0.0};
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += x[i] * twiddle[idx];
      idx += k;
      if (idx >= n) idx -= n;
    }
    out[k] = acc;
  }
  return out;
}

// |DFT|^2 / n of the mean-removed, Hann-tapered samples. With this scaling the
// bin sum equals the tapered signal energy (Parseval), so normalizing the bins
// to sum 1 yields a proper discrete distribution over frequency.
inline std::vector<double> periodogram(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw InsufficientDataError("periodogram needs at least 2 samples");
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(n);
  const std::vector<double> taper = hann_window(n);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = (samples[i] - mean) * taper[i];
  const auto spectrum = dft(x);
  std::vector<double> psd(n);
  for (std::size_t k = 0; k < n; ++k) psd[k] = std::norm(spectrum[k]) / static_cast<double>(n);
  return psd;
}

inline std::vector<double> normalized_periodogram(std::span<const double> samples) {
  std::vector<double> psd = periodogram(samples);
  double total = 0.0;
  for (double v : psd) total += v;
  if (!(total > 0.0)) {
    // Constant window: put all mass in the DC bin.
    psd.assign(psd.size(), 0.0);
    psd[0] = 1.0;
    return psd;
  }
  const double inv = 1.0 / total;
  for (double& v : psd) v *= inv;
  return psd;
}

}  // namespace kdee
