#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gcs/baselines.hpp"
#include "gcs/core.hpp"
#include "gcs/io.hpp"
#include "gcs/metrics.hpp"
#include "gcs/movement.hpp"
#include "gcs/parallel.hpp"
#include "gcs/scoring.hpp"

namespace gcs {

// ---------------------------------------------------------------------------
// Run evaluation
// ---------------------------------------------------------------------------

/// Per-image record retained alongside the aggregate summary, used by the
/// evidence join and available for debugging sweep outliers.
struct PairRecord {
  std::string image_id;
  MetricBundle raw;
  MovementStats model_move;
  MovementStats human_move;
};

struct EvalResult {
  RunSummary summary;
  std::vector<PairRecord> pairs;  // ascending image_id
};

namespace detail {

inline std::vector<const Scanpath*> sorted_by_image(const std::vector<Scanpath>& paths,
                                                    const char* side) {
  std::vector<const Scanpath*> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(&p);
  std::sort(out.begin(), out.end(),
            [](const Scanpath* a, const Scanpath* b) { return a->image_id < b->image_id; });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i]->image_id == out[i - 1]->image_id) {
      throw InputError(std::string(side) + " set has duplicate image id '" + out[i]->image_id +
                       "'");
    }
  }
  return out;
}

inline MovementStats mean_movement_of(const std::vector<PairRecord>& pairs,
                                      MovementStats PairRecord::* side) {
  std::vector<MovementStats> stats;
  stats.reserve(pairs.size());
  for (const auto& p : pairs) stats.push_back(p.*side);
  return mean_movement(stats);
}

}  // namespace detail

/// Pairs model and human scanpaths by image_id, computes the dataset-mean
/// raw metrics and movement statistics, then normalizes, debiases and
/// composes the final score. Images present on only one side are skipped
/// and counted. Aggregation is mean-then-normalize: raw metric means are
/// normalized once, matching the granularity of the calibration bounds.
inline EvalResult evaluate_paths(const RunManifest& manifest,
                                 const std::vector<Scanpath>& model_paths,
                                 const std::vector<Scanpath>& humans,
                                 const CalibrationBounds& bounds, const GcsConfig& cfg,
                                 unsigned jobs = 1) {
  validate(cfg);
  const std::string fp = config_fingerprint(cfg);
  if (fp != bounds.fingerprint) {
    throw FingerprintMismatch("config fingerprint " + fp +
                              " does not match calibration fingerprint " + bounds.fingerprint +
                              "; recalibrate or restore the calibration-time configuration");
  }
  if (model_paths.empty()) throw InputError("empty model set");
  if (humans.empty()) throw InputError("empty human set");
  for (const auto& p : model_paths) {
    if (!(p.frame == bounds.frame)) {
      throw InputError("model scanpath '" + p.image_id + "' frame does not match calibration");
    }
    if (p.size() != manifest.steps) {
      throw InputError("model scanpath '" + p.image_id + "' has " + std::to_string(p.size()) +
                       " steps, manifest declares " + std::to_string(manifest.steps));
    }
  }
  for (const auto& p : humans) {
    if (!(p.frame == bounds.frame)) {
      throw InputError("human scanpath '" + p.image_id + "' frame does not match calibration");
    }
  }

  const auto model_sorted = detail::sorted_by_image(model_paths, "model");
  const auto human_sorted = detail::sorted_by_image(humans, "human");

  struct Match {
    const Scanpath* model;
    const Scanpath* human;
  };
  std::vector<Match> matches;
  std::size_t model_only = 0;
  std::size_t human_only = 0;
  std::size_t i = 0, j = 0;
  while (i < model_sorted.size() && j < human_sorted.size()) {
    const auto& mid = model_sorted[i]->image_id;
    const auto& hid = human_sorted[j]->image_id;
    if (mid == hid) {
      matches.push_back({model_sorted[i], human_sorted[j]});
      ++i;
      ++j;
    } else if (mid < hid) {
      ++model_only;
      ++i;
    } else {
      ++human_only;
      ++j;
    }
  }
  model_only += model_sorted.size() - i;
  human_only += human_sorted.size() - j;
  if (matches.empty()) throw InputError("no overlapping image ids between model and human sets");

  std::vector<PairRecord> pairs(matches.size());
  parallel_for(matches.size(), jobs, [&](std::size_t k) {
    const Scanpath& model = *matches[k].model;
    const Scanpath& human = *matches[k].human;
    PairRecord rec;
    rec.image_id = model.image_id;
    const FixationMapSet maps = prepare_map(model, cfg.metrics.map);
    rec.raw = metric_bundle_on(maps, model, human, cfg.metrics.sm);
    rec.model_move = movement_stats(model, bounds.frame, cfg.movement);
    rec.human_move = movement_stats(human, bounds.frame, cfg.movement);
    pairs[k] = std::move(rec);
  });

  EvalResult out;
  out.pairs = std::move(pairs);
  auto mean_of = [&out](double MetricBundle::* field) {
    std::vector<double> v;
    v.reserve(out.pairs.size());
    for (const auto& p : out.pairs) v.push_back(p.raw.*field);
    return mean_over_dataset(v);
  };
  RunSummary& s = out.summary;
  s.run_id = manifest.run_id;
  s.setting = manifest.setting;
  s.patch_size = manifest.patch_size;
  s.steps = manifest.steps;
  s.n_pairs = out.pairs.size();
  s.model_only = model_only;
  s.human_only = human_only;
  s.accuracy = manifest.accuracy;
  s.raw.dtw = mean_of(&MetricBundle::dtw);
  s.raw.sm = mean_of(&MetricBundle::sm);
  s.raw.nss = mean_of(&MetricBundle::nss);
  s.raw.auc = mean_of(&MetricBundle::auc);
  s.normalized = normalize_bundle(s.raw, bounds);
  s.model_move = detail::mean_movement_of(out.pairs, &PairRecord::model_move);
  s.human_move = detail::mean_movement_of(out.pairs, &PairRecord::human_move);
  s.movement_dist = movement_distance(s.model_move, s.human_move, cfg.movement.epsilon);
  s.sim_move = movement_similarity(s.movement_dist, cfg.movement.tau);
  s.gcs = gcs_score(s.normalized, s.sim_move, cfg.lambda);
  s.lambda = cfg.lambda;
  s.fingerprint = bounds.fingerprint;
  return out;
}

/// Convenience wrapper: loads the manifest's scanpath file against the
/// calibration frame, then evaluates.
inline EvalResult evaluate_run(const RunManifest& manifest, const std::vector<Scanpath>& humans,
                               const CalibrationBounds& bounds, const GcsConfig& cfg,
                               unsigned jobs = 1) {
  const ScanpathLoad model = load_scanpaths(manifest.scanpath_file, bounds.frame, Source::model);
  return evaluate_paths(manifest, model.paths, humans, bounds, cfg, jobs);
}

// ---------------------------------------------------------------------------
// runs.csv
// ---------------------------------------------------------------------------

inline constexpr const char* kRunsCsvHeader =
    "run_id,setting,patch_size,steps,n_pairs,model_only,human_only,accuracy,"
    "dtw_raw,sm_raw,nss_raw,auc_raw,"
    "dtw_norm,sm_norm,nss_norm,auc_norm,"
    "dtw_debiased,sm_debiased,nss_debiased,auc_debiased,"
    "sim_move,movement_dist,gcs,"
    "model_total_path,model_mean_saccade_amplitude,model_mean_center_distance,"
    "model_coverage,model_direction_entropy,model_collapse_rate,"
    "human_total_path,human_mean_saccade_amplitude,human_mean_center_distance,"
    "human_coverage,human_direction_entropy,human_collapse_rate,"
    "evidence_final_p,lambda,fingerprint";

/// Replace-or-append by run_id, so re-evaluating a run overwrites its row.
inline std::vector<RunSummary> merge_runs(std::vector<RunSummary> existing,
                                          const std::vector<RunSummary>& incoming) {
  for (const auto& run : incoming) {
    auto it = std::find_if(existing.begin(), existing.end(),
                           [&run](const RunSummary& r) { return r.run_id == run.run_id; });
    if (it != existing.end()) {
      *it = run;
    } else {
      existing.push_back(run);
    }
  }
  std::sort(existing.begin(), existing.end(),
            [](const RunSummary& a, const RunSummary& b) { return a.run_id < b.run_id; });
  return existing;
}

inline void write_runs(const std::vector<RunSummary>& runs, const GcsConfig& cfg,
                       const std::string& path) {
  std::vector<RunSummary> sorted = runs;
  std::sort(sorted.begin(), sorted.end(),
            [](const RunSummary& a, const RunSummary& b) { return a.run_id < b.run_id; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].run_id == sorted[i - 1].run_id) {
      throw InputError("duplicate run_id '" + sorted[i].run_id + "'");
    }
  }

  auto out = detail::open_output(path);
  out << "# gcs-runs-v1\n";
  out << "# fingerprint=" << config_fingerprint(cfg) << '\n';
  for (const auto& [key, value] : config_items(cfg)) {
    out << "# config." << key << '=' << value << '\n';
  }
  out << kRunsCsvHeader << '\n';
  using detail::format_double;
  auto opt = [](const std::optional<double>& v) {
    return v ? detail::format_double(*v) : std::string();
  };
  auto move_cols = [&out](const MovementStats& m) {
    out << ',' << format_double(m.total_path) << ',' << format_double(m.mean_saccade_amplitude)
        << ',' << format_double(m.mean_center_distance) << ',' << format_double(m.coverage) << ','
        << format_double(m.direction_entropy) << ',' << format_double(m.collapse_rate);
  };
  for (const auto& r : sorted) {
    out << r.run_id << ',' << to_string(r.setting) << ',' << format_double(r.patch_size) << ','
        << r.steps << ',' << r.n_pairs << ',' << r.model_only << ',' << r.human_only << ','
        << opt(r.accuracy) << ',' << format_double(r.raw.dtw) << ',' << format_double(r.raw.sm)
        << ',' << format_double(r.raw.nss) << ',' << format_double(r.raw.auc) << ','
        << format_double(r.normalized.dtw.norm) << ',' << format_double(r.normalized.sm.norm)
        << ',' << format_double(r.normalized.nss.norm) << ','
        << format_double(r.normalized.auc.norm) << ',' << format_double(r.normalized.dtw.debiased)
        << ',' << format_double(r.normalized.sm.debiased) << ','
        << format_double(r.normalized.nss.debiased) << ','
        << format_double(r.normalized.auc.debiased) << ',' << format_double(r.sim_move) << ','
        << format_double(r.movement_dist) << ',' << format_double(r.gcs);
    move_cols(r.model_move);
    move_cols(r.human_move);
    out << ',' << opt(r.evidence_final_p) << ',' << format_double(r.lambda) << ','
        << r.fingerprint << '\n';
  }
  if (!out) throw InputError("write failed: " + path);
}

inline std::vector<RunSummary> read_runs(const std::string& path) {
  auto in = detail::open_input(path);
  std::string line;
  std::size_t line_no = 0;
  if (!detail::next_content_line(in, line, line_no) || detail::trim(line) != kRunsCsvHeader) {
    throw InputError(path + ": missing or unexpected runs.csv header");
  }

  std::vector<RunSummary> runs;
  while (detail::next_content_line(in, line, line_no)) {
    const auto f = detail::split_csv(line);
    const std::string where = detail::location(path, line_no);
    if (f.size() != 38) {
      throw InputError(where + ": expected 38 fields, got " + std::to_string(f.size()));
    }
    auto num = [&where](const std::string& s, const char* name) {
      return detail::parse_double(s, where + ": " + name);
    };
    auto count = [&where](const std::string& s, const char* name) {
      const long long v = detail::parse_int(s, where + ": " + name);
      if (v < 0) throw InputError(where + ": " + name + " must be >= 0");
      return static_cast<std::size_t>(v);
    };
    auto opt = [&num](const std::string& s, const char* name) {
      return s.empty() ? std::optional<double>{} : std::optional<double>{num(s, name)};
    };
    RunSummary r;
    r.run_id = f[0];
    if (r.run_id.empty()) throw InputError(where + ": empty run_id");
    r.setting = setting_from_string(f[1]);
    r.patch_size = num(f[2], "patch_size");
    r.steps = count(f[3], "steps");
    r.n_pairs = count(f[4], "n_pairs");
    r.model_only = count(f[5], "model_only");
    r.human_only = count(f[6], "human_only");
    r.accuracy = opt(f[7], "accuracy");
    r.raw = {num(f[8], "dtw_raw"), num(f[9], "sm_raw"), num(f[10], "nss_raw"),
             num(f[11], "auc_raw")};
    r.normalized.dtw = {num(f[12], "dtw_norm"), num(f[16], "dtw_debiased")};
    r.normalized.sm = {num(f[13], "sm_norm"), num(f[17], "sm_debiased")};
    r.normalized.nss = {num(f[14], "nss_norm"), num(f[18], "nss_debiased")};
    r.normalized.auc = {num(f[15], "auc_norm"), num(f[19], "auc_debiased")};
    r.sim_move = num(f[20], "sim_move");
    r.movement_dist = num(f[21], "movement_dist");
    r.gcs = num(f[22], "gcs");
    auto move = [&num](const std::vector<std::string>& v, std::size_t base, const char* name) {
      MovementStats m;
      m.total_path = num(v[base], name);
      m.mean_saccade_amplitude = num(v[base + 1], name);
      m.mean_center_distance = num(v[base + 2], name);
      m.coverage = num(v[base + 3], name);
      m.direction_entropy = num(v[base + 4], name);
      m.collapse_rate = num(v[base + 5], name);
      return m;
    };
    r.model_move = move(f, 23, "model movement");
    r.human_move = move(f, 29, "human movement");
    r.evidence_final_p = opt(f[35], "evidence_final_p");
    r.lambda = num(f[36], "lambda");
    r.fingerprint = f[37];
    if (r.fingerprint.empty()) throw InputError(where + ": empty fingerprint");
    runs.push_back(std::move(r));
  }
  return runs;
}

// ---------------------------------------------------------------------------
// Regime table
// ---------------------------------------------------------------------------

struct RegimePick {
  std::string label;
  std::string run_id;  // empty when no run qualifies
  double value = 0.0;
  bool available = false;
};

namespace detail {

// Tie-break on equal criterion values: (setting, patch_size, run_id) ascending.
inline bool run_precedes(const RunSummary& a, const RunSummary& b) {
  return std::tie(a.setting, a.patch_size, a.run_id) < std::tie(b.setting, b.patch_size, b.run_id);
}

template <typename Value, typename Filter>
RegimePick pick_best(const std::vector<RunSummary>& runs, const std::string& label, Value value,
                     Filter filter, bool minimize) {
  RegimePick pick;
  pick.label = label;
  const RunSummary* best = nullptr;
  for (const auto& r : runs) {
    if (!filter(r)) continue;
    if (best == nullptr) {
      best = &r;
      continue;
    }
    const double v = value(r);
    const double vb = value(*best);
    const bool better = minimize ? v < vb : v > vb;
    if (better || (v == vb && run_precedes(r, *best))) best = &r;
  }
  if (best != nullptr) {
    pick.run_id = best->run_id;
    pick.value = value(*best);
    pick.available = true;
  }
  return pick;
}

}  // namespace detail

/// Best-of selection rows: raw DTW / ScanMatch / AUC winners, then best
/// accuracy and best composite score, each overall and per sensory setting.
/// Runs without accuracy are excluded from the accuracy rows only.
inline std::vector<RegimePick> regime_table(const std::vector<RunSummary>& runs) {
  if (runs.empty()) throw InputError("no runs");
  using detail::pick_best;
  auto any = [](const RunSummary&) { return true; };
  auto has_acc = [](const RunSummary& r) { return r.accuracy.has_value(); };

  std::vector<Setting> settings;
  for (const Setting s : {Setting::fov_only, Setting::fov_per, Setting::big_per}) {
    if (std::any_of(runs.begin(), runs.end(),
                    [s](const RunSummary& r) { return r.setting == s; })) {
      settings.push_back(s);
    }
  }

  std::vector<RegimePick> picks;
  picks.push_back(pick_best(
      runs, "best_raw_dtw", [](const RunSummary& r) { return r.raw.dtw; }, any, true));
  picks.push_back(pick_best(
      runs, "best_raw_sm", [](const RunSummary& r) { return r.raw.sm; }, any, false));
  picks.push_back(pick_best(
      runs, "best_raw_auc", [](const RunSummary& r) { return r.raw.auc; }, any, false));
  auto acc_value = [](const RunSummary& r) { return *r.accuracy; };
  picks.push_back(pick_best(runs, "best_accuracy", acc_value, has_acc, false));
  for (const Setting s : settings) {
    picks.push_back(pick_best(
        runs, std::string("best_accuracy[") + to_string(s) + "]", acc_value,
        [s](const RunSummary& r) { return r.setting == s && r.accuracy.has_value(); }, false));
  }
  auto gcs_value = [](const RunSummary& r) { return r.gcs; };
  picks.push_back(pick_best(runs, "best_gcs", gcs_value, any, false));
  for (const Setting s : settings) {
    picks.push_back(pick_best(
        runs, std::string("best_gcs[") + to_string(s) + "]", gcs_value,
        [s](const RunSummary& r) { return r.setting == s; }, false));
  }
  return picks;
}

/// Aligned text table. Values print to 4 decimals; rows with no qualifying
/// run render an em dash, mirroring how missing accuracy appears.
inline void write_regimes(const std::vector<RegimePick>& picks, const std::string& fingerprint,
                          const std::string& path) {
  auto out = detail::open_output(path);
  out << "# gcs-regimes-v1\n";
  out << "# fingerprint=" << fingerprint << '\n';
  std::size_t label_w = 5, run_w = 6;
  for (const auto& p : picks) {
    label_w = std::max(label_w, p.label.size());
    run_w = std::max(run_w, p.available ? p.run_id.size() : std::size_t(1));
  }
  auto pad = [&out](const std::string& s, std::size_t width) {
    out << s;
    for (std::size_t k = s.size(); k < width; ++k) out << ' ';
  };
  pad("label", label_w);
  out << "  ";
  pad("run_id", run_w);
  out << "  value\n";
  for (const auto& p : picks) {
    pad(p.label, label_w);
    out << "  ";
    if (p.available) {
      pad(p.run_id, run_w);
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.4f", p.value);
      out << "  " << buf << '\n';
    } else {
      // pad() counts bytes; the dash is 3 bytes but one display column.
      pad("—", run_w + 2);
      out << "  —\n";
    }
  }
  if (!out) throw InputError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Center-bias diagnostics
// ---------------------------------------------------------------------------

struct BiasReport {
  Frame frame;
  int grid = 0;
  std::vector<double> radial_mean;     // mean center distance per step index
  std::vector<std::size_t> radial_n;   // paths contributing at that step
  std::vector<double> density;         // grid x grid fractions, row-major, sums to 1
};

inline BiasReport center_bias_diagnostics(const std::vector<Scanpath>& humans, int grid = 8) {
  if (humans.empty()) throw InputError("empty dataset");
  if (grid < 1) throw InputError("grid must be >= 1");
  const Frame frame = humans.front().frame;
  validate(frame);

  BiasReport report;
  report.frame = frame;
  report.grid = grid;
  const Point center = frame_center(frame);

  std::vector<double> sums;
  std::vector<std::size_t> counts(grid * std::size_t(grid), 0);
  std::size_t total = 0;
  for (const auto& p : humans) {
    if (!(p.frame == frame)) throw InputError("mixed frames in dataset");
    if (p.empty()) throw InputError("empty scanpath for image '" + p.image_id + "'");
    for (std::size_t s = 0; s < p.size(); ++s) {
      const Point pt = p.at(s);
      if (s >= sums.size()) {
        sums.resize(s + 1, 0.0);
        report.radial_n.resize(s + 1, 0);
      }
      sums[s] += distance(pt, center);
      report.radial_n[s] += 1;
      const int col = std::min(grid - 1, int(pt.x * grid / frame.width));
      const int row = std::min(grid - 1, int(pt.y * grid / frame.height));
      counts[std::size_t(row) * grid + col] += 1;
      ++total;
    }
  }
  report.radial_mean.resize(sums.size());
  for (std::size_t s = 0; s < sums.size(); ++s) {
    report.radial_mean[s] = sums[s] / double(report.radial_n[s]);
  }
  report.density.resize(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    report.density[k] = double(counts[k]) / double(total);
  }
  return report;
}

inline void write_bias_radial(const BiasReport& report, const std::string& fingerprint,
                              const std::string& path) {
  auto out = detail::open_output(path);
  out << "# gcs-bias-radial-v1\n";
  out << "# fingerprint=" << fingerprint << '\n';
  out << "step,mean_center_distance,n_paths\n";
  for (std::size_t s = 0; s < report.radial_mean.size(); ++s) {
    out << s << ',' << detail::format_double(report.radial_mean[s]) << ',' << report.radial_n[s]
        << '\n';
  }
  if (!out) throw InputError("write failed: " + path);
}

inline void write_bias_density(const BiasReport& report, const std::string& fingerprint,
                               const std::string& path) {
  auto out = detail::open_output(path);
  out << "# gcs-bias-density-v1\n";
  out << "# fingerprint=" << fingerprint << '\n';
  out << "row,col,fraction\n";
  for (int r = 0; r < report.grid; ++r) {
    for (int c = 0; c < report.grid; ++c) {
      out << r << ',' << c << ','
          << detail::format_double(report.density[std::size_t(r) * report.grid + c]) << '\n';
    }
  }
  if (!out) throw InputError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Evidence join
// ---------------------------------------------------------------------------

struct EvidenceSummary {
  double mean_final_p = 0.0;
  double mean_total_path = 0.0;  // model-side, over matched images
  std::size_t n_traces = 0;
};

namespace detail {

template <typename Fn>
void join_evidence(const std::vector<EvidenceTrace>& traces, const std::vector<PairRecord>& pairs,
                   Fn&& fn) {
  std::size_t i = 0, j = 0;
  while (i < traces.size() && j < pairs.size()) {
    if (traces[i].image_id == pairs[j].image_id) {
      fn(traces[i], pairs[j]);
      ++i;
      ++j;
    } else if (traces[i].image_id < pairs[j].image_id) {
      ++i;
    } else {
      ++j;
    }
  }
}

}  // namespace detail

inline EvidenceSummary evidence_summary(const std::vector<EvidenceTrace>& traces,
                                        const std::vector<PairRecord>& pairs) {
  std::vector<double> final_p, total_path;
  detail::join_evidence(traces, pairs, [&](const EvidenceTrace& t, const PairRecord& p) {
    final_p.push_back(t.final_p());
    total_path.push_back(p.model_move.total_path);
  });
  if (final_p.empty()) throw InputError("no evidence traces match evaluated images");
  EvidenceSummary s;
  s.mean_final_p = mean_over_dataset(final_p);
  s.mean_total_path = mean_over_dataset(total_path);
  s.n_traces = final_p.size();
  return s;
}

/// One plot-ready point: final true-class probability of a trace against
/// the model's path length on the same image.
struct EvidenceRow {
  std::string run_id;
  std::string image_id;
  double final_p = 0.0;
  double total_path = 0.0;
};

inline std::vector<EvidenceRow> evidence_rows(const std::string& run_id,
                                              const std::vector<EvidenceTrace>& traces,
                                              const std::vector<PairRecord>& pairs) {
  std::vector<EvidenceRow> rows;
  detail::join_evidence(traces, pairs, [&](const EvidenceTrace& t, const PairRecord& p) {
    rows.push_back({run_id, t.image_id, t.final_p(), p.model_move.total_path});
  });
  return rows;
}

inline void write_evidence_vs_movement(const std::vector<EvidenceRow>& rows,
                                       const std::string& fingerprint, const std::string& path) {
  auto out = detail::open_output(path);
  out << "# gcs-evidence-v1\n";
  out << "# fingerprint=" << fingerprint << '\n';
  out << "run_id,image_id,final_p,total_path\n";
  for (const auto& r : rows) {
    out << r.run_id << ',' << r.image_id << ',' << detail::format_double(r.final_p) << ','
        << detail::format_double(r.total_path) << '\n';
  }
  if (!out) throw InputError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Sensitivity report text
// ---------------------------------------------------------------------------

inline void write_sensitivity(const SensitivityReport& report, const std::string& fingerprint,
                              const std::string& path) {
  auto out = detail::open_output(path);
  out << "# gcs-sensitivity-v1\n";
  out << "# fingerprint=" << fingerprint << '\n';
  out << "lambda,best_run,best_gcs\n";
  for (const auto& e : report.entries) {
    out << detail::format_double(e.lambda) << ',' << e.best_run << ','
        << detail::format_double(e.best_gcs) << '\n';
  }
  out << "rank_changed=" << (report.rank_changed ? "true" : "false") << '\n';
  for (const auto& c : report.crossovers) {
    out << "crossover," << detail::format_double(c.lambda_low) << ','
        << detail::format_double(c.lambda_high) << ',' << detail::format_double(c.lambda_star)
        << ',' << c.from_run << ',' << c.to_run << '\n';
  }
  if (!out) throw InputError("write failed: " + path);
}

}  // namespace gcs
