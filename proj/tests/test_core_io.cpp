#include <catch2/catch.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "kdee/io.hpp"
#include "kdee/simulators.hpp"

using kdee::LabeledInterval;
using kdee::LabeledRecord;
using kdee::read_record;
using kdee::RecordFormat;
using kdee::TimeSeries;
using kdee::write_record;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("kdee_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  static inline int counter = 0;
};

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_CASE("three-row csv parses into a bare series") {
  TempDir dir;
  const auto file = dir.path / "basic.csv";
  write_text(file, "index,value\n0,1.0\n1,2.0\n2,3.0\n");
  const auto rec = read_record(file, RecordFormat::csv, 1.0);
  CHECK(rec.series.samples == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(rec.series.sample_rate_hz == 1.0);
  CHECK(rec.truth.empty());
}

TEST_CASE("label runs become intervals") {
  TempDir dir;
  const auto file = dir.path / "labels.csv";
  write_text(file, "index,value,label\n0,0.0,n\n1,1.0,n\n2,2.0,a\n3,3.0,a\n4,4.0,n\n");
  const auto rec = read_record(file, RecordFormat::csv, 10.0);
  REQUIRE(rec.truth.size() == 3);
  CHECK(rec.truth[1] == LabeledInterval{2, 4, "a"});
}

TEST_CASE("labels_to_intervals and intervals_to_labels are mutually inverse") {
  kdee::SplitMix64 stream(2718);
  const std::vector<std::string> alphabet{"", "", "a", "b"};
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::string> labels(40);
    for (auto& l : labels) l = alphabet[stream.uniform_int(0, alphabet.size() - 1)];
    const auto intervals = kdee::labels_to_intervals(labels);
    CHECK(kdee::intervals_to_labels(intervals, labels.size()) == labels);
  }
}

TEST_CASE("csv error paths") {
  TempDir dir;
  SECTION("NaN value") {
    const auto file = dir.path / "nan.csv";
    write_text(file, "index,value\n0,1.0\n1,NaN\n");
    CHECK_THROWS_AS(read_record(file, RecordFormat::csv, 1.0), kdee::ValidationError);
  }
  SECTION("malformed row reports its number") {
    const auto file = dir.path / "bad.csv";
    write_text(file, "index,value\n0,1.0\n1,zebra\n");
    try {
      read_record(file, RecordFormat::csv, 1.0);
      FAIL("expected ParseError");
    } catch (const kdee::ParseError& e) {
      CHECK(e.row() == 3);
    }
  }
  SECTION("empty file") {
    const auto file = dir.path / "empty.csv";
    write_text(file, "");
    CHECK_THROWS_AS(read_record(file, RecordFormat::csv, 1.0), kdee::ValidationError);
  }
  SECTION("missing sample rate") {
    const auto file = dir.path / "norate.csv";
    write_text(file, "index,value\n0,1.0\n");
    CHECK_THROWS_AS(read_record(file, RecordFormat::csv), kdee::ValidationError);
  }
  SECTION("missing file") {
    CHECK_THROWS_AS(read_record(dir.path / "nope.csv", RecordFormat::csv, 1.0), kdee::IoError);
  }
}

TEST_CASE("csv round trip is exact") {
  TempDir dir;
  LabeledRecord rec;
  rec.series = TimeSeries{{1.0, 2.0, 3.0, -0.125, 1e-17, 3.14159265358979312}, 250.0};
  rec.truth.push_back(LabeledInterval{2, 4, "a"});
  rec.meta["seed"] = "42";
  const auto file = dir.path / "roundtrip.csv";
  write_record(rec, file, RecordFormat::csv);
  const auto back = read_record(file, RecordFormat::csv);
  CHECK(back.series.samples == rec.series.samples);
  CHECK(back.series.sample_rate_hz == rec.series.sample_rate_hz);
  CHECK(back.truth == rec.truth);
  CHECK(back.meta.at("seed") == "42");
}

TEST_CASE("interval record writes per-row labels") {
  TempDir dir;
  LabeledRecord rec;
  rec.series = TimeSeries{{0, 1, 2, 3, 4}, 1.0};
  rec.truth.push_back(LabeledInterval{2, 4, "a"});
  const auto file = dir.path / "runs.csv";
  write_record(rec, file, RecordFormat::csv);
  std::ifstream in(file);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 7);  // meta + header + 5 rows
  CHECK(lines[2] == "0,0,");
  CHECK(lines[4] == "2,2,a");
  CHECK(lines[5] == "3,3,a");
  CHECK(lines[6] == "4,4,");
}

TEST_CASE("json round trip of a simulated record") {
  TempDir dir;
  kdee::RfSimConfig cfg;
  const auto rec = kdee::make_injection_record(kdee::format_by_name("QPSK"), cfg, 99);
  REQUIRE(rec.series.size() == 5000);
  const auto file = dir.path / "sim.json";
  write_record(rec, file, RecordFormat::json);
  const auto back = read_record(file, RecordFormat::json);
  REQUIRE(back.series.samples.size() == rec.series.samples.size());
  for (std::size_t i = 0; i < rec.series.samples.size(); ++i) {
    const double a = rec.series.samples[i];
    const double b = back.series.samples[i];
    CHECK(std::fabs(a - b) <= 1e-12 * std::max(1.0, std::fabs(a)));
  }
  CHECK(back.truth == rec.truth);
  CHECK(back.meta.at("format") == "QPSK");
}

TEST_CASE("series validation rejects bad inputs") {
  CHECK_THROWS_AS(kdee::validate(TimeSeries{{}, 1.0}), kdee::ValidationError);
  CHECK_THROWS_AS(kdee::validate(TimeSeries{{1.0}, 0.0}), kdee::ValidationError);
  CHECK_THROWS_AS(kdee::validate(TimeSeries{{1.0, std::nan("")}, 1.0}), kdee::ValidationError);
}

TEST_CASE("record validation rejects overlapping same-label intervals") {
  LabeledRecord rec;
  rec.series = TimeSeries{std::vector<double>(10, 0.0), 1.0};
  rec.truth.push_back(LabeledInterval{1, 5, "a"});
  rec.truth.push_back(LabeledInterval{4, 8, "a"});
  CHECK_THROWS_AS(kdee::validate(rec), kdee::ValidationError);
  rec.truth[1].label = "b";  // different labels may overlap
  CHECK_NOTHROW(kdee::validate(rec));
}

TEST_CASE("unwritable path raises an I/O error") {
  LabeledRecord rec;
  rec.series = TimeSeries{{1.0, 2.0}, 1.0};
  CHECK_THROWS_AS(write_record(rec, "/nonexistent-dir/x.csv", RecordFormat::csv), kdee::IoError);
}

TEST_CASE("malformed json raises a parse error") {
  TempDir dir;
  const auto file = dir.path / "broken.json";
  write_text(file, "{ not valid json");
  CHECK_THROWS_AS(read_record(file, RecordFormat::json), kdee::ParseError);
  const auto schema = dir.path / "schema.json";
  write_text(schema, "{\"samples\": [1.0]}");
  CHECK_THROWS_AS(read_record(schema, RecordFormat::json), kdee::ParseError);
}

TEST_CASE("decimate keeps every d-th sample") {
  const TimeSeries ts{{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, 100.0};
  const auto out = kdee::decimate(ts, 3);
  CHECK(out.samples == std::vector<double>{0, 3, 6, 9});
  CHECK(out.sample_rate_hz == Approx(100.0 / 3.0));
}
