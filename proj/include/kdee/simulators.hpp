#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "kdee/core.hpp"
#include "kdee/rng.hpp"

namespace kdee {

// ---------------------------------------------------------------------------
// Modulation formats
// ---------------------------------------------------------------------------

enum class Format {
  BPSK,
  QPSK,
  OQPSK,
  Pi4QPSK,
  PSK8,
  PSK16,
  OOK,
  ASK4,
  ASK8,
  QAM16,
  QAM64,
  QAM32,
  APSK16,
  APSK32,
};

struct ModulationFormat {
  Format id = Format::BPSK;
  std::string name;
  std::vector<std::complex<double>> constellation;  // unit average power
};

namespace sim_detail {

inline std::vector<std::complex<double>> psk_points(unsigned bits_per_symbol, double offset_rad) {
  const unsigned m = 1u << bits_per_symbol;
  std::vector<std::complex<double>> pts(m);
  for (unsigned k = 0; k < m; ++k) {
    const unsigned gray = (k >> 1) ^ k;
    const double angle = 2.0 * std::numbers::pi * gray / m + offset_rad;
    pts[k] = {std::cos(angle), std::sin(angle)};
  }
  return pts;
}

inline std::vector<std::complex<double>> normalized(std::vector<std::complex<double>> pts) {
  double power = 0.0;
  for (const auto& c : pts) power += std::norm(c);
  power /= static_cast<double>(pts.size());
  const double scale = 1.0 / std::sqrt(power);
  for (auto& c : pts) c *= scale;
  return pts;
}

inline std::vector<std::complex<double>> ask_points(const std::vector<double>& levels) {
  std::vector<std::complex<double>> pts;
  pts.reserve(levels.size());
  for (double l : levels) pts.emplace_back(l, 0.0);
  return normalized(std::move(pts));
}

inline std::vector<std::complex<double>> square_qam(int side) {
  std::vector<std::complex<double>> pts;
  for (int a = -side + 1; a <= side - 1; a += 2)
    for (int b = -side + 1; b <= side - 1; b += 2) pts.emplace_back(a, b);
  return normalized(std::move(pts));
}

inline std::vector<std::complex<double>> cross_qam32() {
  std::vector<std::complex<double>> pts;
  for (int a = -5; a <= 5; a += 2)
    for (int b = -5; b <= 5; b += 2) {
      if (std::abs(a) == 5 && std::abs(b) == 5) continue;  // clipped corners
      pts.emplace_back(a, b);
    }
  return normalized(std::move(pts));
}

// DVB-S2 style ring constellations; ratios are outer-to-inner radius.
inline std::vector<std::complex<double>> apsk(const std::vector<int>& ring_counts,
                                              const std::vector<double>& ring_ratios) {
  std::vector<std::complex<double>> pts;
  for (std::size_t r = 0; r < ring_counts.size(); ++r) {
    const double radius = ring_ratios[r];
    const int count = ring_counts[r];
    const double offset = std::numbers::pi / count;
    for (int k = 0; k < count; ++k) {
      const double angle = 2.0 * std::numbers::pi * k / count + offset;
      pts.emplace_back(radius * std::cos(angle), radius * std::sin(angle));
    }
  }
  return normalized(std::move(pts));
}

}  // namespace sim_detail

inline const std::vector<ModulationFormat>& all_formats() {
  using sim_detail::apsk;
  using sim_detail::ask_points;
  using sim_detail::cross_qam32;
  using sim_detail::normalized;
  using sim_detail::psk_points;
  using sim_detail::square_qam;
  static const std::vector<ModulationFormat> formats = [] {
    const double q = std::numbers::pi / 4.0;
    std::vector<ModulationFormat> f;
    f.push_back({Format::BPSK, "BPSK", {{1.0, 0.0}, {-1.0, 0.0}}});
    f.push_back({Format::QPSK, "QPSK", psk_points(2, q)});
    f.push_back({Format::OQPSK, "OQPSK", psk_points(2, q)});
    f.push_back({Format::Pi4QPSK, "Pi4QPSK", psk_points(2, q)});
    f.push_back({Format::PSK8, "8PSK", psk_points(3, 0.0)});
    f.push_back({Format::PSK16, "16PSK", psk_points(4, 0.0)});
    f.push_back({Format::OOK, "OOK", normalized({{0.0, 0.0}, {1.0, 0.0}})});
    f.push_back({Format::ASK4, "4ASK", ask_points({-3, -1, 1, 3})});
    f.push_back({Format::ASK8, "8ASK", ask_points({-7, -5, -3, -1, 1, 3, 5, 7})});
    f.push_back({Format::QAM16, "16QAM", square_qam(4)});
    f.push_back({Format::QAM64, "64QAM", square_qam(8)});
    f.push_back({Format::QAM32, "32QAM", cross_qam32()});
    f.push_back({Format::APSK16, "16APSK", apsk({4, 12}, {1.0, 2.6})});
    f.push_back({Format::APSK32, "32APSK", apsk({4, 12, 16}, {1.0, 2.53, 4.30})});
    return f;
  }();
  return formats;
}

inline const ModulationFormat& format_by_name(const std::string& name) {
  for (const auto& f : all_formats()) {
    if (f.name == name) return f;
  }
  throw ParameterError("unknown modulation format '" + name + "'");
}

inline const ModulationFormat& format_by_id(Format id) {
  for (const auto& f : all_formats()) {
    if (f.id == id) return f;
  }
  throw ParameterError("unknown modulation format id");
}

// ---------------------------------------------------------------------------
// RF simulation configuration
// ---------------------------------------------------------------------------

// Layout of the narrowband interference background. Defaults realize 20
// sub-channels in 4 bands filling 80-120 Hz: band width 6.25 Hz, sub-channel
// centers spaced 1.25 Hz, 5 Hz gaps between bands.
struct InterferenceLayout {
  double band_lo_hz = 80.0;
  int bands = 4;
  int subchannels_per_band = 5;
  double band_width_hz = 6.25;
  double subchannel_spacing_hz = 1.25;
  double band_gap_hz = 5.0;
  double symbol_rate_hz = 1.0;  // per sub-channel, ~1 Hz occupied bandwidth
};

inline std::vector<double> subchannel_centers(const InterferenceLayout& l) {
  if (l.bands < 1 || l.subchannels_per_band < 1) throw ParameterError("interference layout empty");
  std::vector<double> centers;
  for (int b = 0; b < l.bands; ++b) {
    const double band_start = l.band_lo_hz + b * (l.band_width_hz + l.band_gap_hz);
    const double margin = 0.5 * (l.band_width_hz - (l.subchannels_per_band - 1) * l.subchannel_spacing_hz);
    if (margin < 0.0) throw ParameterError("sub-channels do not fit in band width");
    for (int k = 0; k < l.subchannels_per_band; ++k)
      centers.push_back(band_start + margin + k * l.subchannel_spacing_hz);
  }
  return centers;
}

struct RfSimConfig {
  double fs_hz = 5000.0;
  std::size_t symbols = 100;
  std::size_t samples_per_symbol = 50;
  double carrier_hz = 100.0;  // 1 cycle per symbol at the defaults
  double rolloff = 0.25;
  std::size_t rc_span_symbols = 8;
  double snr_db = 10.0;
  double sir_db = 10.0;
  InterferenceLayout interference;

  std::size_t length() const { return symbols * samples_per_symbol; }
};

inline void validate(const RfSimConfig& cfg) {
  if (!(cfg.fs_hz > 0.0)) throw ParameterError("fs_hz must be positive");
  if (cfg.symbols < 1) throw ParameterError("symbols must be >= 1");
  if (cfg.samples_per_symbol < 2) throw ParameterError("samples_per_symbol must be >= 2");
  if (!(cfg.carrier_hz > 0.0) || cfg.carrier_hz >= cfg.fs_hz / 2.0)
    throw ParameterError("carrier must lie below Nyquist");
  if (!(cfg.rolloff > 0.0) || cfg.rolloff > 1.0) throw ParameterError("rolloff must be in (0, 1]");
  if (cfg.rc_span_symbols < 2) throw ParameterError("rc_span_symbols must be >= 2");
}

// ---------------------------------------------------------------------------
// Pulse shaping
// ---------------------------------------------------------------------------

// Raised-cosine impulse response sampled at sps points per symbol, truncated
// to span_symbols and energy-normalized. The removable singularities at
// t = +-1/(2*rolloff) take their limit value (rolloff/2)*sin(pi/(2*rolloff)).
inline std::vector<double> raised_cosine_taps(std::size_t sps, std::size_t span_symbols,
                                              double rolloff) {
  if (sps < 1 || span_symbols < 1) throw ParameterError("invalid raised-cosine geometry");
  if (!(rolloff > 0.0) || rolloff > 1.0) throw ParameterError("rolloff must be in (0, 1]");
  const std::size_t half = span_symbols * sps / 2;
  std::vector<double> taps(2 * half + 1);
  for (std::size_t k = 0; k < taps.size(); ++k) {
    const double t = (static_cast<double>(k) - static_cast<double>(half)) / static_cast<double>(sps);
    const double denom = 1.0 - 4.0 * rolloff * rolloff * t * t;
    double v;
    if (std::fabs(denom) < 1e-8) {
      v = 0.5 * rolloff * std::sin(std::numbers::pi / (2.0 * rolloff));
    } else {
      const double sinc = t == 0.0 ? 1.0
                                   : std::sin(std::numbers::pi * t) / (std::numbers::pi * t);
      v = sinc * std::cos(std::numbers::pi * rolloff * t) / denom;
    }
    taps[k] = v;
  }
  double energy = 0.0;
  for (double v : taps) energy += v * v;
  const double scale = 1.0 / std::sqrt(energy);
  for (double& v : taps) v *= scale;
  return taps;
}

// ---------------------------------------------------------------------------
// Modulated passband signal
// ---------------------------------------------------------------------------

// Pulse-shapes the given symbol indices, mixes onto the carrier, and rescales
// to unit RMS. OQPSK delays the quadrature arm half a symbol; Pi4QPSK rotates
// alternate symbols by -+pi/4.
inline TimeSeries modulate_symbols(const ModulationFormat& format,
                                   const std::vector<std::size_t>& symbol_indices,
                                   const RfSimConfig& cfg) {
  validate(cfg);
  if (symbol_indices.size() != cfg.symbols)
    throw ParameterError("symbol count does not match config");
  const std::size_t sps = cfg.samples_per_symbol;
  const std::size_t len = cfg.length();
  const auto taps = raised_cosine_taps(sps, cfg.rc_span_symbols, cfg.rolloff);
  const std::ptrdiff_t group_delay = static_cast<std::ptrdiff_t>(taps.size() / 2);

  std::vector<double> bb_i(len, 0.0), bb_q(len, 0.0);
  const std::ptrdiff_t q_offset =
      format.id == Format::OQPSK ? static_cast<std::ptrdiff_t>(sps / 2) : 0;
  for (std::size_t s = 0; s < symbol_indices.size(); ++s) {
    std::size_t idx = symbol_indices[s];
    if (idx >= format.constellation.size()) throw ParameterError("symbol index out of range");
    std::complex<double> sym = format.constellation[idx];
    if (format.id == Format::Pi4QPSK) {
      const double rot = (s % 2 == 0 ? -1.0 : 1.0) * std::numbers::pi / 4.0;
      sym *= std::complex<double>{std::cos(rot), std::sin(rot)};
    }
    const std::ptrdiff_t center = static_cast<std::ptrdiff_t>(s * sps);
    for (std::size_t k = 0; k < taps.size(); ++k) {
      const std::ptrdiff_t pos = center + static_cast<std::ptrdiff_t>(k) - group_delay;
      if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(len)) bb_i[pos] += sym.real() * taps[k];
      const std::ptrdiff_t pos_q = pos + q_offset;
      if (pos_q >= 0 && pos_q < static_cast<std::ptrdiff_t>(len)) bb_q[pos_q] += sym.imag() * taps[k];
    }
  }

  TimeSeries out;
  out.sample_rate_hz = cfg.fs_hz;
  out.samples.resize(len);
  const double omega = 2.0 * std::numbers::pi * cfg.carrier_hz / cfg.fs_hz;
  double power = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double phase = omega * static_cast<double>(i);
    const double v = bb_i[i] * std::cos(phase) - bb_q[i] * std::sin(phase);
    out.samples[i] = v;
    power += v * v;
  }
  power /= static_cast<double>(len);
  if (!(power > 0.0)) throw NumericError("modulated signal has zero power");
  const double scale = 1.0 / std::sqrt(power);
  for (double& v : out.samples) v *= scale;
  return out;
}

inline TimeSeries modulate(const ModulationFormat& format, const RfSimConfig& cfg,
                           std::uint64_t seed) {
  SplitMix64 stream = derive_stream(seed, "symbols");
  std::vector<std::size_t> indices(cfg.symbols);
  for (auto& idx : indices)
    idx = static_cast<std::size_t>(stream.uniform_int(0, format.constellation.size() - 1));
  return modulate_symbols(format, indices, cfg);
}

// ---------------------------------------------------------------------------
// Noise and interference
// ---------------------------------------------------------------------------

// sigma = sqrt(P_signal / 10^(snr_db/10)) with P_signal the mean squared sample.
inline double awgn_sigma(const TimeSeries& signal, double snr_db) {
  if (signal.samples.empty()) throw ParameterError("awgn_sigma needs a nonempty signal");
  double power = 0.0;
  for (double v : signal.samples) power += v * v;
  power /= static_cast<double>(signal.samples.size());
  if (!(power > 0.0)) throw ParameterError("zero-power signal");
  return std::sqrt(power / std::pow(10.0, snr_db / 10.0));
}

// Gaussian noise vector whose realized mean-square power is exactly sigma^2,
// so measured SNR equals the target instead of drifting by sampling error.
inline std::vector<double> gaussian_noise_exact_power(std::size_t n, double sigma,
                                                      SplitMix64& stream) {
  std::vector<double> noise(n);
  double power = 0.0;
  for (double& v : noise) {
    v = stream.normal();
    power += v * v;
  }
  power /= static_cast<double>(n);
  const double scale = power > 0.0 ? sigma / std::sqrt(power) : 0.0;
  for (double& v : noise) v *= scale;
  return noise;
}

// Sum of the 20 narrowband sub-channel signals (random-symbol BPSK at
// ~1 symbol/s, raised-cosine shaped, random carrier phase each), scaled so the
// realized background power satisfies the SIR equation against
// reference_power.
inline TimeSeries interference_background(const RfSimConfig& cfg, std::uint64_t seed,
                                          double reference_power = 1.0) {
  validate(cfg);
  const std::size_t len = cfg.length();
  const auto centers = subchannel_centers(cfg.interference);
  const double symbol_rate = cfg.interference.symbol_rate_hz;
  if (!(symbol_rate > 0.0)) throw ParameterError("interference symbol rate must be positive");
  const auto period = static_cast<std::size_t>(std::llround(cfg.fs_hz / symbol_rate));
  if (period < 2) throw ParameterError("interference symbol period too short");
  const std::size_t span = cfg.rc_span_symbols;
  const auto taps = raised_cosine_taps(period, span, cfg.rolloff);
  const auto group_delay = static_cast<std::ptrdiff_t>(taps.size() / 2);

  std::vector<double> background(len, 0.0);
  std::vector<double> sub(len);
  for (std::size_t c = 0; c < centers.size(); ++c) {
    SplitMix64 stream = derive_stream(seed, "interference", c);
    const double phase0 = stream.uniform(0.0, 2.0 * std::numbers::pi);
    std::fill(sub.begin(), sub.end(), 0.0);
    const auto first_symbol = -static_cast<std::ptrdiff_t>(span / 2) - 1;
    const auto last_symbol =
        static_cast<std::ptrdiff_t>(len / period) + static_cast<std::ptrdiff_t>(span / 2) + 1;
    for (std::ptrdiff_t s = first_symbol; s <= last_symbol; ++s) {
      const double amp = stream.uniform_int(0, 1) == 0 ? -1.0 : 1.0;
      const std::ptrdiff_t center = s * static_cast<std::ptrdiff_t>(period);
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, center - group_delay);
      const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(len) - 1,
                                                         center + group_delay);
      for (std::ptrdiff_t i = lo; i <= hi; ++i)
        sub[static_cast<std::size_t>(i)] += amp * taps[static_cast<std::size_t>(i - center + group_delay)];
    }
    const double omega = 2.0 * std::numbers::pi * centers[c] / cfg.fs_hz;
    for (std::size_t i = 0; i < len; ++i)
      background[i] += sub[i] * std::cos(omega * static_cast<double>(i) + phase0);
  }

  double power = 0.0;
  for (double v : background) power += v * v;
  power /= static_cast<double>(len);
  if (!(power > 0.0)) throw NumericError("interference background has zero power");
  const double target_power = reference_power / std::pow(10.0, cfg.sir_db / 10.0);
  const double scale = std::sqrt(target_power / power);
  TimeSeries out;
  out.sample_rate_hz = cfg.fs_hz;
  out.samples.resize(len);
  for (std::size_t i = 0; i < len; ++i) out.samples[i] = background[i] * scale;
  return out;
}

// ---------------------------------------------------------------------------
// Injection records
// ---------------------------------------------------------------------------

namespace sim_detail {

inline double mean_square(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

inline std::string format_double(double v);

}  // namespace sim_detail

// Background = interference + AWGN over the full record; the modulated signal
// is added only inside a random interval of length Uniform[0.2t, 0.4t] whose
// start falls in the latter half. SNR and SIR are both referenced to the
// injected segment's realized power, per the paper's convention of scaling
// each separately and summing.
inline LabeledRecord make_injection_record(const ModulationFormat& format, const RfSimConfig& cfg,
                                           std::uint64_t seed) {
  validate(cfg);
  const TimeSeries modulated = modulate(format, cfg, derive_seed(seed, "modulation"));
  const std::size_t t = modulated.size();

  SplitMix64 placement = derive_stream(seed, "placement");
  const double t_real = static_cast<double>(t);
  auto length = static_cast<std::size_t>(std::llround(placement.uniform(0.2 * t_real, 0.4 * t_real)));
  length = std::max<std::size_t>(1, std::min(length, t));
  const std::size_t lo = t / 2;
  std::size_t start;
  if (t >= length && t - length >= lo) {
    start = placement.uniform_int(lo, t - length);
  } else {
    start = lo;  // infeasible placement: clamp the end instead
  }
  const std::size_t end = std::min(start + length, t);

  const double injected_power = sim_detail::mean_square(
      std::span<const double>(modulated.samples.data() + start, end - start));
  if (!(injected_power > 0.0)) throw NumericError("injected segment has zero power");

  const double sigma = std::sqrt(injected_power / std::pow(10.0, cfg.snr_db / 10.0));
  SplitMix64 noise_stream = derive_stream(seed, "noise");
  const std::vector<double> noise = gaussian_noise_exact_power(t, sigma, noise_stream);
  const TimeSeries interference =
      interference_background(cfg, derive_seed(seed, "background"), injected_power);

  LabeledRecord rec;
  rec.series.sample_rate_hz = cfg.fs_hz;
  rec.series.samples.resize(t);
  for (std::size_t i = 0; i < t; ++i) rec.series.samples[i] = noise[i] + interference.samples[i];
  for (std::size_t i = start; i < end; ++i) rec.series.samples[i] += modulated.samples[i];
  rec.truth.push_back(LabeledInterval{start, end, "injection"});

  rec.meta["generator"] = "injection";
  rec.meta["format"] = format.name;
  rec.meta["seed"] = std::to_string(seed);
  rec.meta["snr_db"] = sim_detail::format_double(cfg.snr_db);
  rec.meta["sir_db"] = sim_detail::format_double(cfg.sir_db);
  rec.meta["fs_hz"] = sim_detail::format_double(cfg.fs_hz);
  rec.meta["symbols"] = std::to_string(cfg.symbols);
  rec.meta["samples_per_symbol"] = std::to_string(cfg.samples_per_symbol);
  rec.meta["carrier_hz"] = sim_detail::format_double(cfg.carrier_hz);
  rec.meta["rolloff"] = sim_detail::format_double(cfg.rolloff);
  rec.meta["injection_start"] = std::to_string(start);
  rec.meta["injection_end"] = std::to_string(end);
  return rec;
}

// Noise + interference only (empty truth); power levels referenced to a unit
// RMS injection that is never added.
inline LabeledRecord make_background_record(const RfSimConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  const std::size_t t = cfg.length();
  const double sigma = std::sqrt(1.0 / std::pow(10.0, cfg.snr_db / 10.0));
  SplitMix64 noise_stream = derive_stream(seed, "noise");
  const std::vector<double> noise = gaussian_noise_exact_power(t, sigma, noise_stream);
  const TimeSeries interference = interference_background(cfg, derive_seed(seed, "background"), 1.0);
  LabeledRecord rec;
  rec.series.sample_rate_hz = cfg.fs_hz;
  rec.series.samples.resize(t);
  for (std::size_t i = 0; i < t; ++i) rec.series.samples[i] = noise[i] + interference.samples[i];
  rec.meta["generator"] = "background";
  rec.meta["seed"] = std::to_string(seed);
  rec.meta["snr_db"] = sim_detail::format_double(cfg.snr_db);
  rec.meta["sir_db"] = sim_detail::format_double(cfg.sir_db);
  rec.meta["fs_hz"] = sim_detail::format_double(cfg.fs_hz);
  return rec;
}

// ---------------------------------------------------------------------------
// Synthetic sinusoid records
// ---------------------------------------------------------------------------

struct SineParams {
  double freq_hz = 100.0;
  double amplitude = 1.0;
  double phase_rad = 0.0;
  double noise_sigma = 0.0;
  std::size_t length = 5000;
  double fs_hz = 5000.0;
  std::uint64_t seed = 0;
};

inline LabeledRecord sine_record(const SineParams& p) {
  if (p.length < 1) throw ParameterError("length must be >= 1");
  if (!(p.fs_hz > 0.0)) throw ParameterError("fs must be positive");
  SplitMix64 stream = derive_stream(p.seed, "sine-noise");
  LabeledRecord rec;
  rec.series.sample_rate_hz = p.fs_hz;
  rec.series.samples.resize(p.length);
  for (std::size_t i = 0; i < p.length; ++i) {
    const double clean = p.amplitude * std::sin(2.0 * std::numbers::pi * p.freq_hz *
                                                    static_cast<double>(i) / p.fs_hz +
                                                p.phase_rad);
    rec.series.samples[i] = clean + p.noise_sigma * stream.normal();
  }
  rec.meta["generator"] = "sine";
  rec.meta["seed"] = std::to_string(p.seed);
  rec.meta["freq_hz"] = sim_detail::format_double(p.freq_hz);
  rec.meta["amplitude"] = sim_detail::format_double(p.amplitude);
  rec.meta["phase_rad"] = sim_detail::format_double(p.phase_rad);
  rec.meta["noise_sigma"] = sim_detail::format_double(p.noise_sigma);
  rec.meta["fs_hz"] = sim_detail::format_double(p.fs_hz);
  return rec;
}

// Same sinusoid but with [start, start+len) replaced by the rectified clean
// waveform plus fresh noise, and the interval recorded as truth.
inline LabeledRecord abs_sine_insert(const SineParams& p, std::size_t start, std::size_t len) {
  if (start + len > p.length || len == 0) throw ParameterError("insert interval out of range");
  LabeledRecord rec = sine_record(p);
  SplitMix64 fresh = derive_stream(p.seed, "abs-sine-insert");
  for (std::size_t i = start; i < start + len; ++i) {
    const double clean = p.amplitude * std::sin(2.0 * std::numbers::pi * p.freq_hz *
                                                    static_cast<double>(i) / p.fs_hz +
                                                p.phase_rad);
    rec.series.samples[i] = std::fabs(clean) + p.noise_sigma * fresh.normal();
  }
  rec.truth.push_back(LabeledInterval{start, start + len, "abs_sine"});
  rec.meta["generator"] = "abs_sine_insert";
  rec.meta["insert_start"] = std::to_string(start);
  rec.meta["insert_len"] = std::to_string(len);
  return rec;
}

// ---------------------------------------------------------------------------
// Lorenz system
// ---------------------------------------------------------------------------

struct LorenzConfig {
  double sigma = 10.0;
  double beta = 8.0 / 3.0;
  double rho = 166.18;  // type-I intermittency
  double rate_hz = 150.0;
  double duration_s = 1000.0;
  double discard_s = 93.0;
  std::array<double, 3> initial_state{1.0, 1.0, 1.0};
};

// One classical RK4 step of y' = f(y).
template <typename F, std::size_t N>
std::array<double, N> rk4_step(F&& f, const std::array<double, N>& y, double dt) {
  std::array<double, N> k1 = f(y);
  std::array<double, N> tmp;
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
  std::array<double, N> k2 = f(tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
  std::array<double, N> k3 = f(tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + dt * k3[i];
  std::array<double, N> k4 = f(tmp);
  std::array<double, N> out;
  for (std::size_t i = 0; i < N; ++i)
    out[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

// Integrates the Lorenz equations at fixed step 1/rate_hz, discards the first
// discard_s seconds, and returns the x component. Fully deterministic.
inline TimeSeries lorenz_x(const LorenzConfig& cfg) {
  if (!(cfg.rate_hz > 0.0)) throw ParameterError("rate must be positive");
  if (!(cfg.discard_s >= 0.0) || cfg.discard_s >= cfg.duration_s)
    throw ParameterError("discard must lie inside the duration");
  const auto steps = static_cast<std::size_t>(std::llround(cfg.duration_s * cfg.rate_hz));
  const auto discard = static_cast<std::size_t>(std::ceil(cfg.discard_s * cfg.rate_hz));
  if (discard >= steps) throw ParameterError("nothing left after discard");
  const double dt = 1.0 / cfg.rate_hz;
  auto f = [&cfg](const std::array<double, 3>& s) {
    return std::array<double, 3>{cfg.sigma * (s[1] - s[0]), s[0] * (cfg.rho - s[2]) - s[1],
                                 s[0] * s[1] - cfg.beta * s[2]};
  };
  std::array<double, 3> state = cfg.initial_state;
  TimeSeries out;
  out.sample_rate_hz = cfg.rate_hz;
  out.samples.reserve(steps - discard);
  for (std::size_t i = 0; i < steps; ++i) {
    if (i >= discard) out.samples.push_back(state[0]);
    state = rk4_step(f, state, dt);
    if (!std::isfinite(state[0]) || !std::isfinite(state[1]) || !std::isfinite(state[2]))
      throw NumericError("Lorenz integration diverged at step " + std::to_string(i));
  }
  return out;
}

namespace sim_detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace sim_detail

}  // namespace kdee
