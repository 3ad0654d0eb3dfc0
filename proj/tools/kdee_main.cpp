// kdee — time-series structure and change detection via delay embeddings,
// kernel density estimation, and entropy/KL statistics.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kdee/detector.hpp"
#include "kdee/evaluation.hpp"
#include "kdee/io.hpp"
#include "kdee/kdee_stat.hpp"
#include "kdee/parallel.hpp"
#include "kdee/simulators.hpp"

namespace {

using kdee::LabeledRecord;
using kdee::RecordFormat;

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

LabeledRecord load_record(const std::string& path, std::optional<double> rate) {
  return kdee::read_record(path, kdee::record_format_for_path(path), rate);
}

void save_record(const LabeledRecord& rec, const std::string& path) {
  kdee::write_record(rec, path, kdee::record_format_for_path(path));
}

std::vector<kdee::Format> parse_formats(const std::string& csv) {
  std::vector<kdee::Format> formats;
  if (csv == "all") {
    for (const auto& f : kdee::all_formats()) formats.push_back(f.id);
    return formats;
  }
  std::stringstream ss(csv);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (!name.empty()) formats.push_back(kdee::format_by_name(name).id);
  }
  if (formats.empty()) throw kdee::ParameterError("no modulation formats given");
  return formats;
}

std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0.0)) throw kdee::ParameterError("grid step must be positive");
  std::vector<double> grid;
  for (double v = lo; v <= hi + 1e-9; v += step) grid.push_back(v);
  if (grid.empty()) throw kdee::ParameterError("empty sweep grid");
  return grid;
}

struct DetectFlags {
  std::string representation = "kde";
  kdee::WindowConfig window;
  bool streaming = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--representation", representation, "kde|psd|delta-ke")
        ->check(CLI::IsMember({"kde", "psd", "delta-ke"}));
    cmd->add_option("--window", window.window_len, "window length in samples");
    cmd->add_option("--stride", window.stride, "window stride in samples");
    cmd->add_option("--baseline-count", window.baseline_count, "baseline window count W");
    cmd->add_option("--threshold", window.z_threshold, "modified z-score threshold");
    cmd->add_option("--tau", window.tau, "embedding delay inside windows");
    cmd->add_option("--delta-ke-tau-max", window.delta_ke_tau_max,
                    "tau sweep bound for the delta-ke statistic");
    cmd->add_option("--grid-nx", window.grid_nx, "KDE grid columns");
    cmd->add_option("--grid-ny", window.grid_ny, "KDE grid rows");
    cmd->add_flag("--streaming", streaming,
                  "causal mode: trailing-history z-scores with fired windows quarantined");
    cmd->add_option("--streaming-history", window.streaming_history, "trailing statistics kept");
    cmd->add_option("--streaming-min-history", window.streaming_min_history,
                    "statistics banked before scoring starts");
  }

  kdee::WindowConfig resolve() const {
    kdee::WindowConfig cfg = window;
    cfg.representation = kdee::representation_from_string(representation);
    cfg.streaming = streaming;
    return cfg;
  }
};

std::map<std::string, std::string> window_meta(const kdee::WindowConfig& cfg) {
  return {{"representation", kdee::to_string(cfg.representation)},
          {"window_len", std::to_string(cfg.window_len)},
          {"stride", std::to_string(cfg.stride)},
          {"baseline_count", std::to_string(cfg.baseline_count)},
          {"z_threshold", fmt_double(cfg.z_threshold)},
          {"tau", std::to_string(cfg.tau)},
          {"delta_ke_tau_max", std::to_string(cfg.delta_ke_tau_max)},
          {"grid_nx", std::to_string(cfg.grid_nx)},
          {"grid_ny", std::to_string(cfg.grid_ny)},
          {"streaming", cfg.streaming ? "1" : "0"}};
}

int run(int argc, char** argv) {
  CLI::App app{"Time-series structure and change detection via KDE entropy statistics"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "cap worker threads (0 = all cores); output is identical for any value");

  // --- simulate-rf ---------------------------------------------------------
  auto* sim_rf = app.add_subcommand("simulate-rf", "generate an RF injection or background record");
  std::string rf_format = "BPSK", rf_out;
  std::uint64_t rf_seed = 0;
  bool rf_background_only = false;
  kdee::RfSimConfig rf_cfg;
  sim_rf->add_option("--format", rf_format, "modulation format name");
  sim_rf->add_option("--snr-db", rf_cfg.snr_db, "target SNR in dB");
  sim_rf->add_option("--sir-db", rf_cfg.sir_db, "target SIR in dB");
  sim_rf->add_option("--symbols", rf_cfg.symbols, "symbol count");
  sim_rf->add_option("--samples-per-symbol", rf_cfg.samples_per_symbol, "samples per symbol");
  sim_rf->add_option("--fs", rf_cfg.fs_hz, "sample rate in Hz");
  sim_rf->add_option("--carrier", rf_cfg.carrier_hz, "carrier frequency in Hz");
  sim_rf->add_option("--rolloff", rf_cfg.rolloff, "raised-cosine roll-off");
  sim_rf->add_flag("--background-only", rf_background_only, "emit noise+interference with no injection");
  sim_rf->add_option("--seed", rf_seed, "RNG seed")->required();
  sim_rf->add_option("--out", rf_out, "output record path (.csv or .json)")->required();

  // --- simulate-lorenz -----------------------------------------------------
  auto* sim_lorenz = app.add_subcommand("simulate-lorenz", "generate the intermittent Lorenz x series");
  kdee::LorenzConfig lorenz_cfg;
  std::string lorenz_out;
  sim_lorenz->add_option("--rho", lorenz_cfg.rho, "Lorenz rho");
  sim_lorenz->add_option("--sigma", lorenz_cfg.sigma, "Lorenz sigma");
  sim_lorenz->add_option("--beta", lorenz_cfg.beta, "Lorenz beta");
  sim_lorenz->add_option("--rate", lorenz_cfg.rate_hz, "integration rate in Hz");
  sim_lorenz->add_option("--duration", lorenz_cfg.duration_s, "duration in seconds");
  sim_lorenz->add_option("--discard", lorenz_cfg.discard_s, "transient seconds to discard");
  sim_lorenz->add_option("--x0", lorenz_cfg.initial_state[0], "initial x");
  sim_lorenz->add_option("--y0", lorenz_cfg.initial_state[1], "initial y");
  sim_lorenz->add_option("--z0", lorenz_cfg.initial_state[2], "initial z");
  sim_lorenz->add_option("--out", lorenz_out, "output record path")->required();

  // --- simulate-sine -------------------------------------------------------
  auto* sim_sine = app.add_subcommand("simulate-sine", "generate a sinusoid, optionally with an |sin| insert");
  kdee::SineParams sine_cfg;
  std::string sine_out;
  std::size_t insert_start = 0, insert_len = 0;
  sim_sine->add_option("--freq", sine_cfg.freq_hz, "sine frequency in Hz");
  sim_sine->add_option("--amplitude", sine_cfg.amplitude, "amplitude");
  sim_sine->add_option("--phase", sine_cfg.phase_rad, "initial phase in radians");
  sim_sine->add_option("--noise-sigma", sine_cfg.noise_sigma, "additive gaussian noise sigma");
  sim_sine->add_option("--length", sine_cfg.length, "sample count");
  sim_sine->add_option("--fs", sine_cfg.fs_hz, "sample rate in Hz");
  sim_sine->add_option("--abs-insert-start", insert_start, "start of the |sin| insert");
  sim_sine->add_option("--abs-insert-len", insert_len, "length of the |sin| insert (0 = none)");
  sim_sine->add_option("--seed", sine_cfg.seed, "RNG seed")->required();
  sim_sine->add_option("--out", sine_out, "output record path")->required();

  // --- kdee ----------------------------------------------------------------
  auto* kdee_cmd = app.add_subcommand("kdee", "KE_tau profile and delta-KE of a record");
  std::string kdee_in, kdee_out, dump_grid_path;
  std::size_t tau_max = 50, dump_grid_tau = 1, kdee_decimate = 1;
  int kdee_grid_nx = 128, kdee_grid_ny = 128;
  std::optional<double> kdee_rate;
  double kdee_rate_value = 0.0;
  auto* kdee_rate_opt = kdee_cmd->add_option("--rate", kdee_rate_value, "sample rate for CSV inputs without one");
  kdee_cmd->add_option("--in", kdee_in, "input record (.csv or .json)")->required();
  kdee_cmd->add_option("--tau-max", tau_max, "delay upper bound N (profile runs tau=1..N)");
  kdee_cmd->add_option("--decimate", kdee_decimate, "keep every d-th sample first");
  kdee_cmd->add_option("--grid-nx", kdee_grid_nx, "KDE grid columns");
  kdee_cmd->add_option("--grid-ny", kdee_grid_ny, "KDE grid rows");
  kdee_cmd->add_option("--out", kdee_out, "output CSV (tau,ke_bits rows plus delta_ke line)");
  kdee_cmd->add_option("--dump-grid", dump_grid_path, "dump the KDE grid at --dump-grid-tau as CSV");
  kdee_cmd->add_option("--dump-grid-tau", dump_grid_tau, "tau whose grid to dump");

  // --- detect ----------------------------------------------------------------
  auto* detect_cmd = app.add_subcommand("detect", "sliding-baseline change detection");
  std::string detect_in, detect_out, detect_intervals, detect_format = "csv";
  std::optional<double> detect_rate;
  double detect_rate_value = 0.0;
  DetectFlags detect_flags;
  detect_cmd->add_option("--in", detect_in, "input record (.csv or .json)")->required();
  auto* detect_rate_opt = detect_cmd->add_option("--rate", detect_rate_value, "sample rate for CSV inputs without one");
  detect_flags.add_to(detect_cmd);
  detect_cmd->add_option("--out", detect_out, "report output (CSV, or JSON with --format json)");
  detect_cmd->add_option("--intervals", detect_intervals, "flagged intervals JSON path");
  detect_cmd->add_option("--format", detect_format, "report format: csv|json")
      ->check(CLI::IsMember({"csv", "json"}));

  // --- sweep -----------------------------------------------------------------
  auto* sweep_cmd = app.add_subcommand("sweep", "delta-ke or detection experiment sweeps");
  std::string experiment = "delta-ke", sweep_out, sweep_formats = "all", sweep_methods = "kde,psd,delta-ke";
  std::uint64_t sweep_seed = 0;
  std::size_t sweep_trials = 10, sweep_length = 3000, sweep_tau_max = 50;
  double lo = -10.0, hi = 11.0, step = 3.0;
  bool sweep_grid_given = false;
  std::string sweep_decimations = "1,2,3,4";
  DetectFlags sweep_window;
  double sweep_min_overlap = 0.25;
  sweep_cmd->add_option("--experiment", experiment, "delta-ke|detection")
      ->check(CLI::IsMember({"delta-ke", "detection"}));
  sweep_cmd->add_option("--formats", sweep_formats, "comma-separated modulation formats or 'all'");
  sweep_cmd->add_option("--trials", sweep_trials, "trials per grid point and format");
  auto* lo_opt = sweep_cmd->add_option("--lo", lo, "grid low endpoint (dB)");
  sweep_cmd->add_option("--hi", hi, "grid high endpoint (dB)");
  sweep_cmd->add_option("--step", step, "grid step (dB)");
  sweep_cmd->add_option("--length", sweep_length, "signal length for delta-ke sweeps");
  sweep_cmd->add_option("--tau-max", sweep_tau_max, "profile tau bound for delta-ke sweeps");
  sweep_cmd->add_option("--decimations", sweep_decimations, "comma-separated decimation factors");
  sweep_cmd->add_option("--methods", sweep_methods, "comma-separated detector methods");
  sweep_cmd->add_option("--min-overlap", sweep_min_overlap, "window overlap fraction for F1");
  sweep_window.add_to(sweep_cmd);
  sweep_cmd->add_option("--seed", sweep_seed, "RNG seed")->required();
  sweep_cmd->add_option("--out", sweep_out, "results CSV path")->required();

  // --- score -----------------------------------------------------------------
  auto* score_cmd = app.add_subcommand("score", "window-level F1 of a detection report against truth");
  std::string score_detections, score_truth, score_out, score_denominator = "window";
  double score_min_overlap = 0.25;
  std::optional<double> score_rate;
  double score_rate_value = 0.0;
  score_cmd->add_option("--detections", score_detections, "detection report JSON")->required();
  score_cmd->add_option("--truth", score_truth, "truth record (.csv or .json)")->required();
  auto* score_rate_opt = score_cmd->add_option("--rate", score_rate_value, "sample rate for CSV truth without one");
  score_cmd->add_option("--min-overlap", score_min_overlap, "overlap fraction threshold");
  score_cmd->add_option("--overlap-denominator", score_denominator, "window|truth")
      ->check(CLI::IsMember({"window", "truth"}));
  score_cmd->add_option("--out", score_out, "write the F1 JSON here as well");

  // --- bench -----------------------------------------------------------------
  auto* bench_cmd = app.add_subcommand("bench", "wall-clock timing of the detector methods");
  std::string bench_in, bench_methods = "kde,psd,delta-ke";
  std::size_t bench_repeats = 5;
  std::optional<double> bench_rate;
  double bench_rate_value = 0.0;
  DetectFlags bench_flags;
  bench_cmd->add_option("--in", bench_in, "input record")->required();
  auto* bench_rate_opt = bench_cmd->add_option("--rate", bench_rate_value, "sample rate for CSV inputs without one");
  bench_cmd->add_option("--methods", bench_methods, "comma-separated methods to time");
  bench_cmd->add_option("--repeats", bench_repeats, "timed repeats after one warmup");
  bench_flags.add_to(bench_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints the message / usage text
    return code == 0 ? 0 : 1;
  }
  if (threads > 0) kdee::set_max_threads(threads);
  if (*kdee_rate_opt) kdee_rate = kdee_rate_value;
  if (*detect_rate_opt) detect_rate = detect_rate_value;
  if (*score_rate_opt) score_rate = score_rate_value;
  if (*bench_rate_opt) bench_rate = bench_rate_value;

  if (sim_rf->parsed()) {
    const LabeledRecord rec =
        rf_background_only
            ? kdee::make_background_record(rf_cfg, rf_seed)
            : kdee::make_injection_record(kdee::format_by_name(rf_format), rf_cfg, rf_seed);
    save_record(rec, rf_out);
    std::cout << "wrote " << rf_out << " (" << rec.series.size() << " samples)\n";
    return 0;
  }

  if (sim_lorenz->parsed()) {
    LabeledRecord rec;
    rec.series = kdee::lorenz_x(lorenz_cfg);
    rec.meta["generator"] = "lorenz";
    rec.meta["rho"] = fmt_double(lorenz_cfg.rho);
    rec.meta["sigma"] = fmt_double(lorenz_cfg.sigma);
    rec.meta["beta"] = fmt_double(lorenz_cfg.beta);
    rec.meta["rate_hz"] = fmt_double(lorenz_cfg.rate_hz);
    rec.meta["duration_s"] = fmt_double(lorenz_cfg.duration_s);
    rec.meta["discard_s"] = fmt_double(lorenz_cfg.discard_s);
    save_record(rec, lorenz_out);
    std::cout << "wrote " << lorenz_out << " (" << rec.series.size() << " samples)\n";
    return 0;
  }

  if (sim_sine->parsed()) {
    const LabeledRecord rec = insert_len > 0 ? kdee::abs_sine_insert(sine_cfg, insert_start, insert_len)
                                             : kdee::sine_record(sine_cfg);
    save_record(rec, sine_out);
    std::cout << "wrote " << sine_out << " (" << rec.series.size() << " samples)\n";
    return 0;
  }

  if (kdee_cmd->parsed()) {
    LabeledRecord rec = load_record(kdee_in, kdee_rate);
    const kdee::TimeSeries series = kdee::decimate(rec.series, kdee_decimate);
    const auto profile = kdee::kdee_profile(series, tau_max, kdee_grid_nx, kdee_grid_ny);
    std::ostringstream csv;
    csv << "# input=" << kdee_in << "\n# tau_max=" << tau_max << "\n# decimate=" << kdee_decimate
        << "\n";
    csv << "tau,ke_bits\n";
    for (std::size_t i = 0; i < profile.taus.size(); ++i)
      csv << profile.taus[i] << ',' << fmt_double(profile.ke_values[i].value) << '\n';
    csv << "delta_ke," << fmt_double(profile.delta_ke.value) << '\n';
    if (!kdee_out.empty()) {
      kdee::io_detail::write_atomically(kdee_out, csv.str());
      std::cout << "delta_ke " << fmt_double(profile.delta_ke.value) << "\n";
    } else {
      std::cout << csv.str();
    }
    if (!dump_grid_path.empty()) {
      const auto cloud = kdee::takens_embed(series, dump_grid_tau, tau_max);
      kdee::write_grid_csv(kdee::estimate_kde(cloud, kdee_grid_nx, kdee_grid_ny), dump_grid_path);
    }
    return 0;
  }

  if (detect_cmd->parsed()) {
    const LabeledRecord rec = load_record(detect_in, detect_rate);
    const kdee::WindowConfig cfg = detect_flags.resolve();
    const kdee::DetectionReport report = kdee::detect(rec.series, cfg);
    if (report.degenerate_scale)
      std::cerr << "warning: degenerate statistic scale (MAD = 0); affected z-scores forced to 0\n";
    auto meta = window_meta(cfg);
    meta["input"] = detect_in;
    if (!detect_out.empty()) {
      if (detect_format == "json")
        kdee::io_detail::write_atomically(detect_out, kdee::report_to_json(report, meta).dump(2) + "\n");
      else
        kdee::write_report_csv(report, detect_out, meta);
    }
    if (!detect_intervals.empty()) kdee::write_intervals_json(report.intervals, detect_intervals, meta);
    std::cout << report.intervals.size() << " interval(s) flagged over " << report.window_starts.size()
              << " windows\n";
    for (const auto& iv : report.intervals)
      std::cout << "  [" << iv.start << ", " << iv.end << ")\n";
    return 0;
  }

  if (sweep_cmd->parsed()) {
    if (experiment == "delta-ke") {
      kdee::DeltaKeSweepConfig cfg;
      cfg.formats = parse_formats(sweep_formats);
      cfg.snr_grid = make_grid(lo, hi, step);
      cfg.trials = sweep_trials;
      cfg.length = sweep_length;
      cfg.tau_max = sweep_tau_max;
      cfg.seed = sweep_seed;
      cfg.decimations.clear();
      std::stringstream ss(sweep_decimations);
      std::string tok;
      while (std::getline(ss, tok, ','))
        if (!tok.empty()) cfg.decimations.push_back(std::stoul(tok));
      const auto sweep = kdee::sweep_delta_ke(cfg);
      std::ostringstream csv;
      csv << "# experiment=delta-ke seed=" << sweep_seed << " trials=" << sweep_trials
          << " formats=" << sweep_formats << "\n";
      csv << "snr_db,decimation,mean_delta_ke,std_delta_ke,count\n";
      for (const auto& pt : sweep.points)
        csv << fmt_double(pt.snr_db) << ',' << pt.decimation << ',' << fmt_double(pt.mean) << ','
            << fmt_double(pt.stddev) << ',' << pt.count << '\n';
      kdee::io_detail::write_atomically(sweep_out, csv.str());
      std::cout << "wrote " << sweep_out << " (" << sweep.points.size() << " points)\n";
    } else {
      kdee::DetectionSweepConfig cfg;
      cfg.formats = parse_formats(sweep_formats);
      if (!*lo_opt) {  // detection default grid differs from the delta-ke one
        lo = -10.0;
        hi = 10.0;
        step = 2.0;
      }
      cfg.snr_sir_grid = make_grid(lo, hi, step);
      cfg.trials = sweep_trials;
      cfg.window = sweep_window.resolve();
      cfg.min_overlap = sweep_min_overlap;
      cfg.seed = sweep_seed;
      cfg.methods.clear();
      std::stringstream ss(sweep_methods);
      std::string tok;
      while (std::getline(ss, tok, ','))
        if (!tok.empty()) cfg.methods.push_back(kdee::representation_from_string(tok));
      const auto sweep = kdee::sweep_detection(cfg);
      std::ostringstream csv;
      csv << "# experiment=detection seed=" << sweep_seed << " trials=" << sweep_trials
          << " formats=" << sweep_formats << "\n";
      csv << "snr_sir_db,method,pooled_f1,precision,recall,mean_f1,std_f1,records\n";
      for (const auto& pt : sweep.points)
        csv << fmt_double(pt.snr_sir_db) << ',' << kdee::to_string(pt.method) << ','
            << fmt_double(pt.pooled.f1) << ',' << fmt_double(pt.pooled.precision) << ','
            << fmt_double(pt.pooled.recall) << ',' << fmt_double(pt.mean_f1) << ','
            << fmt_double(pt.std_f1) << ',' << pt.records << '\n';
      kdee::io_detail::write_atomically(sweep_out, csv.str());
      std::cout << "wrote " << sweep_out << " (" << sweep.points.size() << " points)\n";
    }
    return 0;
  }

  if (score_cmd->parsed()) {
    const kdee::DetectionReport report = kdee::read_report_json(score_detections);
    const LabeledRecord truth = load_record(score_truth, score_rate);
    const auto denom =
        score_denominator == "truth" ? kdee::OverlapDenominator::truth : kdee::OverlapDenominator::window;
    const auto result = kdee::f1_overlap(report, truth.truth, score_min_overlap, denom);
    const auto doc = kdee::f1_to_json(result);
    std::cout << doc.dump(2) << "\n";
    if (!score_out.empty()) kdee::io_detail::write_atomically(score_out, doc.dump(2) + "\n");
    return 0;
  }

  if (bench_cmd->parsed()) {
    const LabeledRecord rec = load_record(bench_in, bench_rate);
    const kdee::WindowConfig cfg = bench_flags.resolve();
    std::stringstream ss(bench_methods);
    std::string tok;
    std::cout << "method,mean_s,std_s,min_s,repeats\n";
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      const auto method = kdee::representation_from_string(tok);
      const auto timing = kdee::time_method(method, rec.series, cfg, bench_repeats);
      std::cout << tok << ',' << fmt_double(timing.mean_s) << ',' << fmt_double(timing.std_s) << ','
                << fmt_double(timing.min_s) << ',' << timing.repeats << '\n';
    }
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const kdee::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 2;
  } catch (const kdee::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
