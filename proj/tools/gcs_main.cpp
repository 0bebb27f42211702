// Command-line front end: calibrate, eval, report, sensitivity, synth, bias,
// plus an adapter for foreign gaze CSV layouts.
//
// Exit codes: 0 success, 2 input/usage error, 3 degenerate calibration,
// 4 config fingerprint mismatch.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gcs/gcs.hpp"

namespace {

// Frame-dependent parameters use out-of-range sentinels so "not passed"
// can fall back to defaults derived from the actual frame.
struct ConfigFlags {
  int sm_cols = 8;
  int sm_rows = 8;
  double sm_gap = 0.0;
  double sm_scale = -1.0;
  double sm_max = 1.0;
  double map_sigma = -1.0;
  int map_downsample = 0;
  int coverage_grid = 4;
  int entropy_bins = 16;
  double collapse_threshold = -1.0;
  double tau = 1.0;
  double epsilon = 1e-6;
  double lambda = 0.1;
};

void add_config_flags(CLI::App* cmd, ConfigFlags* f) {
  cmd->add_option("--sm-grid-cols", f->sm_cols, "ScanMatch grid columns")->capture_default_str();
  cmd->add_option("--sm-grid-rows", f->sm_rows, "ScanMatch grid rows")->capture_default_str();
  cmd->add_option("--sm-gap", f->sm_gap, "ScanMatch gap penalty, must be <= 0")
      ->capture_default_str();
  cmd->add_option("--sm-substitution-scale", f->sm_scale,
                  "ScanMatch substitution distance scale (default: 1/grid diagonal, so the "
                  "farthest cell pair scores 0)");
  cmd->add_option("--sm-max-score", f->sm_max, "ScanMatch per-token score for a perfect match")
      ->capture_default_str();
  cmd->add_option("--map-sigma", f->map_sigma,
                  "fixation map Gaussian sigma in px (default: width/16)");
  cmd->add_option("--map-downsample", f->map_downsample,
                  "fixation map downsample factor (default: 1 for frames up to 128 px, else 4)");
  cmd->add_option("--coverage-grid", f->coverage_grid, "coverage grid cells per side")
      ->capture_default_str();
  cmd->add_option("--entropy-bins", f->entropy_bins, "direction entropy angular bins")
      ->capture_default_str();
  cmd->add_option("--collapse-threshold", f->collapse_threshold,
                  "collapsed-saccade amplitude threshold in px (default: 1% of frame diagonal)");
  cmd->add_option("--tau", f->tau, "movement similarity temperature")->capture_default_str();
  cmd->add_option("--epsilon", f->epsilon, "movement distance regularizer")
      ->capture_default_str();
  cmd->add_option("--lambda", f->lambda, "movement term weight in the composite score")
      ->capture_default_str();
  cmd->set_config("--config", "", "read options from a key=value file (flags win over the file)");
}

gcs::GcsConfig resolve_config(const ConfigFlags& f, const gcs::Frame& frame) {
  gcs::GcsConfig cfg;
  cfg.metrics.sm = gcs::ScanMatchConfig::defaults_for_grid(f.sm_cols, f.sm_rows);
  cfg.metrics.sm.gap_penalty = f.sm_gap;
  if (f.sm_scale >= 0.0) cfg.metrics.sm.substitution_scale = f.sm_scale;
  cfg.metrics.sm.max_score_per_token = f.sm_max;
  cfg.metrics.map = gcs::MapConfig::defaults_for(frame);
  if (f.map_sigma >= 0.0) cfg.metrics.map.sigma = f.map_sigma;
  if (f.map_downsample > 0) cfg.metrics.map.downsample = f.map_downsample;
  cfg.movement = gcs::MovementConfig::defaults_for(frame);
  cfg.movement.coverage_grid = f.coverage_grid;
  cfg.movement.entropy_bins = f.entropy_bins;
  if (f.collapse_threshold >= 0.0) cfg.movement.collapse_threshold = f.collapse_threshold;
  cfg.movement.tau = f.tau;
  cfg.movement.epsilon = f.epsilon;
  cfg.lambda = f.lambda;
  gcs::validate(cfg);
  return cfg;
}

std::vector<gcs::Scanpath> load_humans(const std::string& file, const gcs::Frame& frame) {
  auto res = gcs::load_scanpaths(file, frame, gcs::Source::human);
  if (res.clamped > 0) {
    std::cerr << "note: clamped " << res.clamped << " fixations into the frame\n";
  }
  return std::move(res.paths);
}

void print_calibration(const gcs::CalibrationBounds& b) {
  std::printf("calibration over %zu images, frame %dx%d, corner %s\n", b.n_images, b.frame.width,
              b.frame.height, gcs::to_string(b.corner));
  std::printf("%-8s %14s %14s %14s\n", "metric", "upper", "lower", "center");
  auto row = [](const char* name, const gcs::MetricBounds& m) {
    std::printf("%-8s %14.6g %14.6g %14.6g\n", name, m.upper, m.lower, m.center);
  };
  row("dtw", b.dtw);
  row("sm", b.sm);
  row("nss", b.nss);
  row("auc", b.auc);
  std::printf("fingerprint=%s\n", b.fingerprint.c_str());
  for (const auto& w : b.warnings) std::printf("warning: %s\n", w.c_str());
}

std::string require_shared_fingerprint(const std::vector<gcs::RunSummary>& runs) {
  if (runs.empty()) throw gcs::InputError("runs file has no rows");
  const std::string& fp = runs.front().fingerprint;
  for (const auto& r : runs) {
    if (r.fingerprint != fp) {
      throw gcs::InputError(
          "runs mix config fingerprints; evaluate every run under one calibration first");
    }
  }
  return fp;
}

void dump_file(const std::string& path) {
  std::ifstream in(path);
  std::cout << in.rdbuf();
}

// --- subcommand state ------------------------------------------------------

struct CalibrateArgs {
  std::string humans, dataset_id, corner = "TL", out = "calibration.txt";
  int width = 0, height = 0;
  unsigned jobs = gcs::default_jobs();
};

struct EvalArgs {
  std::string calibration, humans, out = "runs.csv";
  std::string out_evidence = "evidence_vs_movement.csv";
  std::vector<std::string> manifests;
  unsigned jobs = gcs::default_jobs();
};

struct ReportArgs {
  std::string runs, out = "regimes.txt";
};

struct SensitivityArgs {
  std::string runs, out = "sensitivity.txt";
  std::vector<double> lambdas = {0.0, 0.1, 0.25, 0.5};
};

struct SynthArgs {
  std::string out;
  std::size_t n = 1000, steps = 12;
  int width = 512, height = 512;
  double std_frac = 0.15;
  std::uint64_t seed = 7;
};

struct BiasArgs {
  std::string humans, out_radial = "bias_radial.csv", out_density = "bias_density.csv";
  int width = 0, height = 0, grid = 8;
};

struct AdaptArgs {
  std::string in, out;
  std::string image_col = "image_id", step_col = "step", x_col = "x", y_col = "y", duration_col;
  std::string delimiter = ",";
  double scale_x = 1.0, scale_y = 1.0, offset_x = 0.0, offset_y = 0.0;
};

void run_calibrate(const CalibrateArgs& a, const ConfigFlags& flags) {
  const gcs::Frame frame{a.width, a.height};
  const gcs::GcsConfig cfg = resolve_config(flags, frame);
  gcs::CalibrateOptions opt;
  opt.corner = gcs::corner_from_string(a.corner);
  opt.jobs = a.jobs;
  opt.dataset_id = a.dataset_id;
  opt.fingerprint = gcs::config_fingerprint(cfg);
  const auto humans = load_humans(a.humans, frame);
  const auto bounds = gcs::calibrate(humans, cfg.metrics.sm, cfg.metrics.map, opt);
  gcs::save_calibration(bounds, cfg, a.out);
  print_calibration(bounds);
  std::printf("wrote %s\n", a.out.c_str());
}

void run_eval(const EvalArgs& a, const ConfigFlags& flags) {
  const auto calib = gcs::load_calibration(a.calibration);
  const gcs::GcsConfig cfg = resolve_config(flags, calib.bounds.frame);
  const std::string fp = gcs::config_fingerprint(cfg);
  if (fp != calib.bounds.fingerprint) {
    throw gcs::FingerprintMismatch("config fingerprint " + fp +
                                   " does not match calibration fingerprint " +
                                   calib.bounds.fingerprint +
                                   "; pass the calibration-time flags or recalibrate");
  }
  const auto humans = load_humans(a.humans, calib.bounds.frame);

  std::vector<gcs::RunSummary> fresh;
  std::vector<gcs::EvidenceRow> evidence;
  for (const auto& mpath : a.manifests) {
    const gcs::RunManifest manifest = gcs::load_manifest(mpath);
    gcs::EvalResult result = gcs::evaluate_run(manifest, humans, calib.bounds, cfg, a.jobs);
    if (manifest.probability_file) {
      const auto traces = gcs::load_evidence(*manifest.probability_file, manifest.steps);
      const auto esum = gcs::evidence_summary(traces, result.pairs);
      result.summary.evidence_final_p = esum.mean_final_p;
      const auto rows = gcs::evidence_rows(manifest.run_id, traces, result.pairs);
      evidence.insert(evidence.end(), rows.begin(), rows.end());
    }
    std::printf("run %s: n_pairs=%zu gcs=%.4f sim_move=%.4f\n", result.summary.run_id.c_str(),
                result.summary.n_pairs, result.summary.gcs, result.summary.sim_move);
    fresh.push_back(std::move(result.summary));
  }

  std::vector<gcs::RunSummary> existing;
  if (std::filesystem::exists(a.out)) existing = gcs::read_runs(a.out);
  gcs::write_runs(gcs::merge_runs(std::move(existing), fresh), cfg, a.out);
  std::printf("wrote %s\n", a.out.c_str());
  if (!evidence.empty()) {
    gcs::write_evidence_vs_movement(evidence, fp, a.out_evidence);
    std::printf("wrote %s\n", a.out_evidence.c_str());
  }
}

void run_report(const ReportArgs& a) {
  const auto runs = gcs::read_runs(a.runs);
  const std::string fp = require_shared_fingerprint(runs);
  const auto picks = gcs::regime_table(runs);
  gcs::write_regimes(picks, fp, a.out);
  dump_file(a.out);
}

void run_sensitivity(const SensitivityArgs& a) {
  const auto runs = gcs::read_runs(a.runs);
  const std::string fp = require_shared_fingerprint(runs);
  const auto report = gcs::lambda_sensitivity(runs, a.lambdas);
  gcs::write_sensitivity(report, fp, a.out);
  dump_file(a.out);
}

void run_synth(const SynthArgs& a, const ConfigFlags& flags) {
  const gcs::Frame frame{a.width, a.height};
  const gcs::GcsConfig cfg = resolve_config(flags, frame);
  const auto paths = gcs::synth_dataset(a.n, frame, a.steps, a.std_frac, a.seed);
  gcs::save_scanpaths(paths, a.out,
                      {"gcs-scanpaths-v1",
                       "generator=center-gaussian seed=" + std::to_string(a.seed) +
                           " std_frac=" + gcs::detail::format_double(a.std_frac),
                       "fingerprint=" + gcs::config_fingerprint(cfg)});
  std::printf("wrote %zu scanpaths (%zu steps each) to %s\n", paths.size(), a.steps,
              a.out.c_str());
}

void run_bias(const BiasArgs& a, const ConfigFlags& flags) {
  const gcs::Frame frame{a.width, a.height};
  const gcs::GcsConfig cfg = resolve_config(flags, frame);
  const std::string fp = gcs::config_fingerprint(cfg);
  const auto humans = load_humans(a.humans, frame);
  const auto report = gcs::center_bias_diagnostics(humans, a.grid);
  gcs::write_bias_radial(report, fp, a.out_radial);
  gcs::write_bias_density(report, fp, a.out_density);
  const auto peak = std::max_element(report.density.begin(), report.density.end());
  std::printf("radial mean: step 0 = %.2f px, step %zu = %.2f px\n", report.radial_mean.front(),
              report.radial_mean.size() - 1, report.radial_mean.back());
  std::printf("density peak: cell (%zu,%zu) holds %.1f%% of fixations\n",
              std::size_t(peak - report.density.begin()) / std::size_t(report.grid),
              std::size_t(peak - report.density.begin()) % std::size_t(report.grid),
              100.0 * *peak);
  std::printf("wrote %s and %s\n", a.out_radial.c_str(), a.out_density.c_str());
}

void run_adapt(const AdaptArgs& a) {
  if (a.delimiter.size() != 1) throw gcs::InputError("delimiter must be a single character");
  const char delim = a.delimiter[0];
  std::ifstream in(a.in);
  if (!in) throw gcs::InputError("cannot open file: " + a.in);

  auto split = [delim](const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = line.find(delim, start);
      if (pos == std::string::npos) {
        fields.emplace_back(gcs::detail::trim(std::string_view(line).substr(start)));
        break;
      }
      fields.emplace_back(gcs::detail::trim(std::string_view(line).substr(start, pos - start)));
      start = pos + 1;
    }
    return fields;
  };

  std::string line;
  std::size_t line_no = 0;
  if (!gcs::detail::next_content_line(in, line, line_no)) {
    throw gcs::InputError(a.in + ": empty file");
  }
  const auto header = split(line);
  auto column = [&header, &a](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw gcs::InputError(a.in + ": no column named '" + name + "'");
    return std::size_t(it - header.begin());
  };
  const std::size_t ci = column(a.image_col);
  const std::size_t cx = column(a.x_col);
  const std::size_t cy = column(a.y_col);
  const bool has_step = !a.step_col.empty();
  const bool has_dur = !a.duration_col.empty();
  const std::size_t cs = has_step ? column(a.step_col) : 0;
  const std::size_t cd = has_dur ? column(a.duration_col) : 0;

  std::ofstream out(a.out);
  if (!out) throw gcs::InputError("cannot write file: " + a.out);
  out << "# gcs-scanpaths-v1\n# adapted_from=" << a.in << '\n';
  out << (has_dur ? "image_id,step,x,y,duration_ms\n" : "image_id,step,x,y\n");

  std::map<std::string, int> next_step;  // used when the source has no step column
  std::size_t rows = 0;
  while (gcs::detail::next_content_line(in, line, line_no)) {
    const auto f = split(line);
    const std::string where = a.in + ":" + std::to_string(line_no);
    if (f.size() != header.size()) {
      throw gcs::InputError(where + ": expected " + std::to_string(header.size()) + " fields");
    }
    const std::string& id = f[ci];
    if (id.empty()) throw gcs::InputError(where + ": empty image id");
    long long step;
    if (has_step) {
      step = gcs::detail::parse_int(f[cs], where + ": step");
      if (step < 0) throw gcs::InputError(where + ": step must be >= 0");
    } else {
      step = next_step[id]++;
    }
    const double x = gcs::detail::parse_double(f[cx], where + ": x") * a.scale_x + a.offset_x;
    const double y = gcs::detail::parse_double(f[cy], where + ": y") * a.scale_y + a.offset_y;
    out << id << ',' << step << ',' << gcs::detail::format_double(x) << ','
        << gcs::detail::format_double(y);
    if (has_dur) {
      out << ',' << gcs::detail::format_double(
                        gcs::detail::parse_double(f[cd], where + ": duration"));
    }
    out << '\n';
    ++rows;
  }
  if (rows == 0) throw gcs::InputError(a.in + ": no data rows");
  if (!out) throw gcs::InputError("write failed: " + a.out);
  std::printf("adapted %zu fixation rows to %s\n", rows, a.out.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scanpath similarity scoring with calibrated, center-debiased metrics"};
  app.require_subcommand(1);

  // Scoring parameters live on the root app; subcommands fall through to
  // them, so they can be given before or after the subcommand name. CLI11
  // reads --config files only for the app parse() runs on, hence the root.
  ConfigFlags cfgf;
  add_config_flags(&app, &cfgf);

  CalibrateArgs cal;
  auto* c_cal = app.add_subcommand(
      "calibrate", "compute per-metric baseline bounds over a human scanpath set");
  c_cal->fallthrough();
  c_cal->add_option("--humans", cal.humans, "human scanpath CSV")
      ->required()
      ->check(CLI::ExistingFile);
  c_cal->add_option("--width", cal.width, "frame width, px")->required()->check(CLI::PositiveNumber);
  c_cal->add_option("--height", cal.height, "frame height, px")
      ->required()
      ->check(CLI::PositiveNumber);
  c_cal->add_option("--corner", cal.corner, "corner baseline position (TL, TR, BL, BR)")
      ->capture_default_str();
  c_cal->add_option("--dataset-id", cal.dataset_id, "label stored in the calibration file");
  c_cal->add_option("--jobs", cal.jobs, "parallel workers (default: all cores)");
  c_cal->add_option("--out", cal.out, "output calibration file")->capture_default_str();
  c_cal->callback([&cal, &cfgf] { run_calibrate(cal, cfgf); });

  EvalArgs ev;
  auto* c_ev = app.add_subcommand("eval", "score model runs against humans under a calibration");
  c_ev->fallthrough();
  c_ev->add_option("--calibration", ev.calibration, "calibration file from 'calibrate'")
      ->required()
      ->check(CLI::ExistingFile);
  c_ev->add_option("--humans", ev.humans, "human scanpath CSV")
      ->required()
      ->check(CLI::ExistingFile);
  c_ev->add_option("--manifest", ev.manifests, "run manifest file(s)")
      ->required()
      ->check(CLI::ExistingFile);
  c_ev->add_option("--jobs", ev.jobs, "parallel workers (default: all cores)");
  c_ev->add_option("--out", ev.out, "runs CSV, merged by run_id")->capture_default_str();
  c_ev->add_option("--out-evidence", ev.out_evidence,
                   "evidence-vs-movement CSV (written when a manifest has a probability file)")
      ->capture_default_str();
  c_ev->callback([&ev, &cfgf] { run_eval(ev, cfgf); });

  ReportArgs rep;
  auto* c_rep = app.add_subcommand("report", "best-configuration regime table from a runs CSV");
  c_rep->fallthrough();
  c_rep->add_option("--runs", rep.runs, "runs CSV from 'eval'")
      ->required()
      ->check(CLI::ExistingFile);
  c_rep->add_option("--out", rep.out, "output text table")->capture_default_str();
  c_rep->callback([&rep] { run_report(rep); });

  SensitivityArgs sens;
  auto* c_sens =
      app.add_subcommand("sensitivity", "re-rank runs across a grid of movement-term weights");
  c_sens->fallthrough();
  c_sens->add_option("--runs", sens.runs, "runs CSV from 'eval'")
      ->required()
      ->check(CLI::ExistingFile);
  c_sens->add_option("--lambdas", sens.lambdas, "weight grid")
      ->delimiter(',')
      ->capture_default_str();
  c_sens->add_option("--out", sens.out, "output report")->capture_default_str();
  c_sens->callback([&sens] { run_sensitivity(sens); });

  SynthArgs syn;
  auto* c_syn = app.add_subcommand("synth", "generate a seeded center-biased synthetic dataset");
  c_syn->fallthrough();
  c_syn->add_option("--out", syn.out, "output scanpath CSV")->required();
  c_syn->add_option("--n", syn.n, "number of images")->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_syn->add_option("--steps", syn.steps, "fixations per image")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_syn->add_option("--width", syn.width, "frame width, px")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_syn->add_option("--height", syn.height, "frame height, px")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_syn->add_option("--std-frac", syn.std_frac, "Gaussian std as a fraction of frame width")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  c_syn->add_option("--seed", syn.seed, "RNG seed")->capture_default_str();
  c_syn->callback([&syn, &cfgf] { run_synth(syn, cfgf); });

  BiasArgs bias;
  auto* c_bias = app.add_subcommand("bias", "center-bias diagnostics over a human scanpath set");
  c_bias->fallthrough();
  c_bias->add_option("--humans", bias.humans, "human scanpath CSV")
      ->required()
      ->check(CLI::ExistingFile);
  c_bias->add_option("--width", bias.width, "frame width, px")
      ->required()
      ->check(CLI::PositiveNumber);
  c_bias->add_option("--height", bias.height, "frame height, px")
      ->required()
      ->check(CLI::PositiveNumber);
  c_bias->add_option("--grid", bias.grid, "density histogram cells per side")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_bias->add_option("--out-radial", bias.out_radial, "radial distance CSV")
      ->capture_default_str();
  c_bias->add_option("--out-density", bias.out_density, "density histogram CSV")
      ->capture_default_str();
  c_bias->callback([&bias, &cfgf] { run_bias(bias, cfgf); });

  AdaptArgs ad;
  auto* c_ad = app.add_subcommand(
      "adapt", "rewrite a foreign gaze CSV into the native image_id,step,x,y layout");
  c_ad->fallthrough();
  c_ad->add_option("--in", ad.in, "source CSV")->required()->check(CLI::ExistingFile);
  c_ad->add_option("--out", ad.out, "output scanpath CSV")->required();
  c_ad->add_option("--image-col", ad.image_col, "source column with the image id")
      ->capture_default_str();
  c_ad->add_option("--step-col", ad.step_col,
                   "source column with the step index; empty assigns file order per image")
      ->capture_default_str();
  c_ad->add_option("--x-col", ad.x_col, "source column with x")->capture_default_str();
  c_ad->add_option("--y-col", ad.y_col, "source column with y")->capture_default_str();
  c_ad->add_option("--duration-col", ad.duration_col, "optional source column with duration");
  c_ad->add_option("--delimiter", ad.delimiter, "source field delimiter")->capture_default_str();
  c_ad->add_option("--scale-x", ad.scale_x, "multiply source x")->capture_default_str();
  c_ad->add_option("--scale-y", ad.scale_y, "multiply source y")->capture_default_str();
  c_ad->add_option("--offset-x", ad.offset_x, "add to scaled x")->capture_default_str();
  c_ad->add_option("--offset-y", ad.offset_y, "add to scaled y")->capture_default_str();
  c_ad->callback([&ad] { run_adapt(ad); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const gcs::FingerprintMismatch& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const gcs::DegenerateCalibration& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
