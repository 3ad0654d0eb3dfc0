#pragma once

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "kdee/core.hpp"
#include "kdee/density.hpp"
#include "kdee/detector.hpp"
#include "kdee/evaluation.hpp"

namespace kdee {

enum class RecordFormat { csv, json };

inline RecordFormat record_format_from_string(const std::string& s) {
  if (s == "csv") return RecordFormat::csv;
  if (s == "json") return RecordFormat::json;
  throw ParameterError("unknown record format '" + s + "'");
}

// Guess from the extension; default to CSV.
inline RecordFormat record_format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".json" ? RecordFormat::json : RecordFormat::csv;
}

namespace io_detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& field, std::size_t row) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || (end && *end != '\0') || errno == ERANGE)
    throw ParseError("cannot parse number '" + field + "'", row);
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current += c;
    }
  }
  fields.push_back(current);
  return fields;
}

// All file outputs go through a temp file + rename so a failed run never
// leaves a partial file at the destination.
inline void write_atomically(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot rename temp file onto '" + path.string() + "': " + ec.message());
  }
}

}  // namespace io_detail

// Converts contiguous runs of equal non-empty labels to intervals.
inline std::vector<LabeledInterval> labels_to_intervals(const std::vector<std::string>& labels) {
  std::vector<LabeledInterval> out;
  std::size_t i = 0;
  while (i < labels.size()) {
    if (labels[i].empty()) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < labels.size() && labels[j + 1] == labels[i]) ++j;
    out.push_back(LabeledInterval{i, j + 1, labels[i]});
    i = j + 1;
  }
  return out;
}

// Inverse of labels_to_intervals; requires non-overlapping intervals since a
// row carries a single label.
inline std::vector<std::string> intervals_to_labels(const std::vector<LabeledInterval>& intervals,
                                                    std::size_t length) {
  std::vector<std::string> labels(length);
  for (const auto& iv : intervals) {
    validate(iv, length);
    for (std::size_t i = iv.start; i < iv.end; ++i) {
      if (!labels[i].empty() && labels[i] != iv.label)
        throw ValidationError("overlapping intervals with different labels cannot be row-encoded");
      labels[i] = iv.label;
    }
  }
  return labels;
}

inline LabeledRecord read_record_csv(const std::filesystem::path& path,
                                     std::optional<double> sample_rate_hint = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  LabeledRecord rec;
  std::vector<std::string> labels;
  std::string line;
  std::size_t row = 0;
  bool header_seen = false;
  bool has_label_column = false;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    if (line[0] == '#') {
      // Metadata comment: "# key=value".
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        std::string key = line.substr(1, eq - 1);
        std::string value = line.substr(eq + 1);
        while (!key.empty() && key.front() == ' ') key.erase(key.begin());
        while (!key.empty() && key.back() == ' ') key.pop_back();
        if (!value.empty() && value.back() == '\r') value.pop_back();
        rec.meta[key] = value;
      }
      continue;
    }
    const auto fields = io_detail::split_csv_line(line);
    if (!header_seen) {
      if (fields.size() < 2 || fields[0] != "index" || fields[1] != "value")
        throw ParseError("expected header 'index,value[,label]'", row);
      has_label_column = fields.size() >= 3 && fields[2] == "label";
      header_seen = true;
      continue;
    }
    if (fields.size() < 2 || fields.size() > 3)
      throw ParseError("expected 2 or 3 fields, got " + std::to_string(fields.size()), row);
    (void)io_detail::parse_double(fields[0], row);  // index column: must parse
    const double value = io_detail::parse_double(fields[1], row);
    if (!std::isfinite(value)) throw ValidationError("non-finite value at row " + std::to_string(row));
    rec.series.samples.push_back(value);
    labels.push_back(has_label_column && fields.size() >= 3 ? fields[2] : "");
  }
  if (!header_seen || rec.series.samples.empty())
    throw ValidationError("empty record in '" + path.string() + "'");

  if (auto it = rec.meta.find("sample_rate_hz"); it != rec.meta.end()) {
    rec.series.sample_rate_hz = io_detail::parse_double(it->second, 0);
  } else if (sample_rate_hint) {
    rec.series.sample_rate_hz = *sample_rate_hint;
    rec.meta["sample_rate_hz"] = io_detail::format_double(*sample_rate_hint);
  } else {
    throw ValidationError("sample rate missing: no '# sample_rate_hz=' line and no --rate flag");
  }
  rec.truth = labels_to_intervals(labels);
  validate(rec);
  return rec;
}

inline LabeledRecord read_record_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), 0);
  }
  LabeledRecord rec;
  try {
    rec.series.sample_rate_hz = doc.at("sample_rate_hz").get<double>();
    rec.series.samples = doc.at("samples").get<std::vector<double>>();
    if (doc.contains("intervals")) {
      for (const auto& iv : doc.at("intervals")) {
        rec.truth.push_back(LabeledInterval{iv.at("start").get<std::size_t>(),
                                            iv.at("end").get<std::size_t>(),
                                            iv.at("label").get<std::string>()});
      }
    }
    if (doc.contains("meta")) {
      for (const auto& [key, value] : doc.at("meta").items())
        rec.meta[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("record schema mismatch: ") + e.what(), 0);
  }
  validate(rec);
  return rec;
}

inline LabeledRecord read_record(const std::filesystem::path& path, RecordFormat format,
                                 std::optional<double> sample_rate_hint = std::nullopt) {
  return format == RecordFormat::csv ? read_record_csv(path, sample_rate_hint)
                                     : read_record_json(path);
}

inline void write_record_csv(const LabeledRecord& rec, const std::filesystem::path& path) {
  validate(rec);
  const auto labels = intervals_to_labels(rec.truth, rec.series.size());
  const bool has_labels = !rec.truth.empty();
  std::ostringstream out;
  out << "# sample_rate_hz=" << io_detail::format_double(rec.series.sample_rate_hz) << "\n";
  for (const auto& [key, value] : rec.meta) {
    if (key == "sample_rate_hz") continue;
    out << "# " << key << "=" << value << "\n";
  }
  out << (has_labels ? "index,value,label\n" : "index,value\n");
  for (std::size_t i = 0; i < rec.series.size(); ++i) {
    out << i << ',' << io_detail::format_double(rec.series.samples[i]);
    if (has_labels) out << ',' << labels[i];
    out << '\n';
  }
  io_detail::write_atomically(path, out.str());
}

inline void write_record_json(const LabeledRecord& rec, const std::filesystem::path& path) {
  validate(rec);
  nlohmann::json doc;
  doc["sample_rate_hz"] = rec.series.sample_rate_hz;
  doc["samples"] = rec.series.samples;
  doc["intervals"] = nlohmann::json::array();
  for (const auto& iv : rec.truth)
    doc["intervals"].push_back({{"start", iv.start}, {"end", iv.end}, {"label", iv.label}});
  doc["meta"] = nlohmann::json::object();
  for (const auto& [key, value] : rec.meta) doc["meta"][key] = value;
  io_detail::write_atomically(path, doc.dump(2) + "\n");
}

inline void write_record(const LabeledRecord& rec, const std::filesystem::path& path,
                         RecordFormat format) {
  if (format == RecordFormat::csv) write_record_csv(rec, path);
  else write_record_json(rec, path);
}

// ---------------------------------------------------------------------------
// Density grids, detection reports, scores
// ---------------------------------------------------------------------------

// CSV matrix dump (one row per grid row) with the grid geometry in comments.
inline void write_grid_csv(const DensityGrid& grid, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "# x0=" << io_detail::format_double(grid.spec.x0)
      << " y0=" << io_detail::format_double(grid.spec.y0)
      << " dx=" << io_detail::format_double(grid.spec.dx)
      << " dy=" << io_detail::format_double(grid.spec.dy) << " nx=" << grid.spec.nx
      << " ny=" << grid.spec.ny << "\n";
  for (int j = 0; j < grid.spec.ny; ++j) {
    for (int i = 0; i < grid.spec.nx; ++i) {
      if (i) out << ',';
      out << io_detail::format_double(grid.values[static_cast<std::size_t>(j) * grid.spec.nx + i]);
    }
    out << '\n';
  }
  io_detail::write_atomically(path, out.str());
}

inline void write_report_csv(const DetectionReport& report, const std::filesystem::path& path,
                             const std::map<std::string, std::string>& meta = {}) {
  std::ostringstream out;
  for (const auto& [key, value] : meta) out << "# " << key << "=" << value << "\n";
  out << "start,statistic,z,flag\n";
  for (std::size_t k = 0; k < report.window_starts.size(); ++k) {
    out << report.window_starts[k] << ',' << io_detail::format_double(report.statistic[k]) << ','
        << io_detail::format_double(report.z_scores[k]) << ',' << (report.flagged[k] ? 1 : 0)
        << '\n';
  }
  io_detail::write_atomically(path, out.str());
}

inline nlohmann::json report_to_json(const DetectionReport& report,
                                     const std::map<std::string, std::string>& meta = {}) {
  nlohmann::json doc;
  doc["window_len"] = report.window_len;
  doc["window_starts"] = report.window_starts;
  doc["statistic"] = report.statistic;
  doc["z_scores"] = report.z_scores;
  doc["flagged"] = report.flagged;
  doc["degenerate_scale"] = report.degenerate_scale;
  doc["intervals"] = nlohmann::json::array();
  for (const auto& iv : report.intervals)
    doc["intervals"].push_back({{"start", iv.start}, {"end", iv.end}, {"label", iv.label}});
  doc["meta"] = nlohmann::json::object();
  for (const auto& [key, value] : meta) doc["meta"][key] = value;
  return doc;
}

inline DetectionReport report_from_json(const nlohmann::json& doc) {
  DetectionReport report;
  try {
    report.window_len = doc.at("window_len").get<std::size_t>();
    report.window_starts = doc.at("window_starts").get<std::vector<std::size_t>>();
    report.statistic = doc.at("statistic").get<std::vector<double>>();
    report.z_scores = doc.at("z_scores").get<std::vector<double>>();
    report.flagged = doc.at("flagged").get<std::vector<bool>>();
    if (doc.contains("degenerate_scale")) report.degenerate_scale = doc.at("degenerate_scale").get<bool>();
    if (doc.contains("intervals")) {
      for (const auto& iv : doc.at("intervals"))
        report.intervals.push_back(LabeledInterval{iv.at("start").get<std::size_t>(),
                                                   iv.at("end").get<std::size_t>(),
                                                   iv.at("label").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report schema mismatch: ") + e.what(), 0);
  }
  return report;
}

inline DetectionReport read_report_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), 0);
  }
  return report_from_json(doc);
}

inline void write_intervals_json(const std::vector<LabeledInterval>& intervals,
                                 const std::filesystem::path& path,
                                 const std::map<std::string, std::string>& meta = {}) {
  nlohmann::json doc;
  doc["intervals"] = nlohmann::json::array();
  for (const auto& iv : intervals)
    doc["intervals"].push_back({{"start", iv.start}, {"end", iv.end}, {"label", iv.label}});
  doc["meta"] = nlohmann::json::object();
  for (const auto& [key, value] : meta) doc["meta"][key] = value;
  io_detail::write_atomically(path, doc.dump(2) + "\n");
}

inline nlohmann::json f1_to_json(const F1Result& r) {
  return {{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1},
          {"tp", r.tp},               {"fp", r.fp},         {"fn", r.fn}};
}

}  // namespace kdee
