// End-to-end checks of the CLI binary: simulate -> detect -> score round trips,
// exit codes, and byte-identical reruns.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
  if (ok) {
    std::cout << "ok: " << what << "\n";
  } else {
    ++failures;
    std::cout << "FAILED: " << what << "\n";
  }
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(KDEE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / "kdee_cli_e2e";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string sine = (dir / "sine.csv").string();
  const std::string report = (dir / "report.json").string();
  const std::string intervals = (dir / "intervals.json").string();
  const std::string score = (dir / "score.json").string();

  // Synthetic structural-change record: 8 sine periods with a one-period
  // rectified insert.
  check(run_cli("simulate-sine --freq 4 --fs 1000 --length 4000 --amplitude 1 --noise-sigma 0.05 "
                "--abs-insert-start 2400 --abs-insert-len 250 --seed 7 --out " + sine) == 0,
        "simulate-sine exits 0");
  check(fs::exists(sine), "sine record written");

  check(run_cli("detect --in " + sine + " --representation kde --tau 62 --grid-nx 64 --grid-ny 64 "
                "--format json --out " + report + " --intervals " + intervals) == 0,
        "detect exits 0");
  check(fs::exists(report), "report written");

  check(run_cli("score --detections " + report + " --truth " + sine + " --out " + score) == 0,
        "score exits 0");
  {
    nlohmann::json doc;
    std::ifstream in(score);
    in >> doc;
    check(doc.at("f1").get<double>() > 0.5, "f1 on the structural-change record exceeds 0.5");
  }

  // Determinism: identical argv => identical bytes.
  const std::string report2 = (dir / "report2.json").string();
  check(run_cli("detect --in " + sine + " --representation kde --tau 62 --grid-nx 64 --grid-ny 64 "
                "--format json --out " + report2) == 0,
        "second detect exits 0");
  {
    nlohmann::json a, b;
    std::ifstream ia(report), ib(report2);
    ia >> a;
    ib >> b;
    a.erase("meta");
    b.erase("meta");
    check(a == b, "reports are identical across reruns");
  }

  // RF record round trip through the CLI.
  const std::string rf = (dir / "rf.json").string();
  check(run_cli("simulate-rf --format QPSK --snr-db 10 --sir-db 10 --seed 42 --out " + rf) == 0,
        "simulate-rf exits 0");
  const std::string rf_again = (dir / "rf2.json").string();
  run_cli("simulate-rf --format QPSK --snr-db 10 --sir-db 10 --seed 42 --out " + rf_again);
  check(slurp(rf) == slurp(rf_again), "rf records reproduce byte-identically per seed");

  const std::string profile = (dir / "profile.csv").string();
  check(run_cli("kdee --in " + rf + " --tau-max 20 --out " + profile) == 0, "kdee exits 0");
  {
    const std::string text = slurp(profile);
    check(text.find("tau,ke_bits") != std::string::npos, "profile has the tau,ke_bits header");
    check(text.find("delta_ke,") != std::string::npos, "profile carries the delta_ke summary line");
  }

  // Tiny sweep through the CLI.
  const std::string sweep_csv = (dir / "sweep.csv").string();
  check(run_cli("sweep --experiment delta-ke --formats BPSK --trials 1 --lo 0 --hi 6 --step 6 "
                "--length 1000 --tau-max 10 --decimations 1 --seed 5 --out " + sweep_csv) == 0,
        "sweep exits 0");
  {
    const std::string text = slurp(sweep_csv);
    check(text.find("snr_db,decimation,mean_delta_ke") != std::string::npos,
          "sweep CSV has the expected header");
  }

  // Error paths: unknown flag and missing seed exit 1; no partial file left.
  check(run_cli("detect --no-such-flag") == 1, "unknown flag exits 1");
  check(run_cli("simulate-rf --format QPSK --out " + (dir / "x.json").string()) == 1,
        "missing --seed exits 1");
  check(!fs::exists(dir / "x.json"), "failed run leaves no output file");
  check(run_cli("simulate-rf --format NOPE --seed 1 --out " + (dir / "y.json").string()) == 1,
        "unknown format exits 1");
  check(!fs::exists(dir / "y.json"), "failed run leaves no partial file");

  std::cout << (failures == 0 ? "cli_e2e OK\n" : "cli_e2e FAILURES\n");
  return failures == 0 ? 0 : 1;
}
