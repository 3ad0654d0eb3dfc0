#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace kdee {

// Error taxonomy. The CLI maps ParameterError/ValidationError/ParseError/IoError
// to exit code 1 and NumericError to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t row)
      : ValidationError(what + " (row " + std::to_string(row) + ")"), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// Uniformly sampled real-valued sequence. Immutable by convention after
// construction; safe to share across threads.
struct TimeSeries {
  std::vector<double> samples;
  double sample_rate_hz = 1.0;

  std::size_t size() const { return samples.size(); }
  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }
};

inline void validate(const TimeSeries& ts) {
  if (ts.samples.empty()) throw ValidationError("time series must contain at least one sample");
  if (!(ts.sample_rate_hz > 0.0) || !std::isfinite(ts.sample_rate_hz))
    throw ValidationError("sample_rate_hz must be positive and finite");
  for (std::size_t i = 0; i < ts.samples.size(); ++i) {
    if (!std::isfinite(ts.samples[i]))
      throw ValidationError("non-finite sample at index " + std::to_string(i));
  }
}

// Half-open sample-index interval [start, end) with a class label.
struct LabeledInterval {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string label;

  bool operator==(const LabeledInterval&) const = default;
};

inline void validate(const LabeledInterval& iv, std::size_t series_len) {
  if (!(iv.start < iv.end)) throw ValidationError("interval start must be < end");
  if (iv.end > series_len) throw ValidationError("interval end exceeds series length");
}

struct LabeledRecord {
  TimeSeries series;
  std::vector<LabeledInterval> truth;            // sorted by start, non-overlapping per label
  std::map<std::string, std::string> meta;       // generator config, seed, achieved levels, ...
};

inline void validate(const LabeledRecord& rec) {
  validate(rec.series);
  for (const auto& iv : rec.truth) validate(iv, rec.series.size());
  for (std::size_t i = 1; i < rec.truth.size(); ++i) {
    if (rec.truth[i].start < rec.truth[i - 1].start)
      throw ValidationError("intervals must be sorted by start");
  }
  // Non-overlap is required per label only.
  for (std::size_t i = 0; i < rec.truth.size(); ++i) {
    for (std::size_t j = i + 1; j < rec.truth.size(); ++j) {
      const auto& a = rec.truth[i];
      const auto& b = rec.truth[j];
      if (a.label == b.label && a.end > b.start && b.end > a.start)
        throw ValidationError("overlapping intervals share label '" + a.label + "'");
    }
  }
}

// Entropy/divergence values carry an explicit unit.
struct Bits {
  double value = 0.0;

  friend bool operator==(Bits a, Bits b) { return a.value == b.value; }
  friend auto operator<=>(Bits a, Bits b) { return a.value <=> b.value; }
  friend Bits operator-(Bits a, Bits b) { return Bits{a.value - b.value}; }
};

inline TimeSeries slice(const TimeSeries& ts, std::size_t start, std::size_t len) {
  if (start + len > ts.samples.size()) throw ParameterError("slice out of range");
  return TimeSeries{{ts.samples.begin() + static_cast<std::ptrdiff_t>(start),
                     ts.samples.begin() + static_cast<std::ptrdiff_t>(start + len)},
                    ts.sample_rate_hz};
}

// Keep every d-th sample; the rate drops accordingly.
inline TimeSeries decimate(const TimeSeries& ts, std::size_t factor) {
  if (factor == 0) throw ParameterError("decimation factor must be >= 1");
  if (factor == 1) return ts;
  TimeSeries out;
  out.sample_rate_hz = ts.sample_rate_hz / static_cast<double>(factor);
  out.samples.reserve(ts.samples.size() / factor + 1);
  for (std::size_t i = 0; i < ts.samples.size(); i += factor) out.samples.push_back(ts.samples[i]);
  return out;
}

}  // namespace kdee
