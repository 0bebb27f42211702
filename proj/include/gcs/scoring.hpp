#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gcs/baselines.hpp"
#include "gcs/core.hpp"
#include "gcs/metrics.hpp"
#include "gcs/movement.hpp"

namespace gcs {

// ---------------------------------------------------------------------------
// Normalization and debiasing
// ---------------------------------------------------------------------------

/// DTW normalization. Bounds are named by the quality of the transformed
/// score, not by raw magnitude: `lower` is the corner-policy mean (the
/// numerically largest DTW, mapping to 0) and `upper` the identical-human
/// mean (the smallest DTW, mapping to 1):
///
///   dtw_norm = (lower - d) / (lower - upper)
///
/// Values are intentionally not clamped; policies worse than the corner
/// anchor legitimately map below 0.
inline double normalize_dtw(double d, const MetricBounds& bounds) {
  if (bounds.lower == bounds.upper) throw DegenerateCalibration("degenerate dtw bounds");
  return (bounds.lower - d) / (bounds.lower - bounds.upper);
}

/// Higher-is-better normalization (ScanMatch, NSS, AUC):
///   norm = (m - lower) / (upper - lower), unclamped.
inline double normalize_up(double m, const MetricBounds& bounds) {
  if (bounds.upper == bounds.lower) throw DegenerateCalibration("degenerate metric bounds");
  return (m - bounds.lower) / (bounds.upper - bounds.lower);
}

/// Subtracts the normalized center baseline, so an always-center policy
/// lands at exactly 0 on every metric.
inline double debias(double norm, double norm_center) { return norm - norm_center; }

struct MetricScore {
  double norm = 0.0;
  double debiased = 0.0;
};

struct NormalizedBundle {
  MetricScore dtw, sm, nss, auc;
};

inline NormalizedBundle normalize_bundle(const MetricBundle& raw, const CalibrationBounds& bounds) {
  NormalizedBundle out;
  out.dtw.norm = normalize_dtw(raw.dtw, bounds.dtw);
  out.dtw.debiased = debias(out.dtw.norm, normalize_dtw(bounds.dtw.center, bounds.dtw));
  out.sm.norm = normalize_up(raw.sm, bounds.sm);
  out.sm.debiased = debias(out.sm.norm, normalize_up(bounds.sm.center, bounds.sm));
  out.nss.norm = normalize_up(raw.nss, bounds.nss);
  out.nss.debiased = debias(out.nss.norm, normalize_up(bounds.nss.center, bounds.nss));
  out.auc.norm = normalize_up(raw.auc, bounds.auc);
  out.auc.debiased = debias(out.auc.norm, normalize_up(bounds.auc.center, bounds.auc));
  return out;
}

inline double debiased_mean(const NormalizedBundle& b) {
  return (b.dtw.debiased + b.sm.debiased + b.nss.debiased + b.auc.debiased) / 4.0;
}

/// Composite score: mean of the four debiased metrics plus lambda times the
/// movement-similarity term.
inline double gcs_score(const NormalizedBundle& normalized, double sim_move, double lambda) {
  return debiased_mean(normalized) + lambda * sim_move;
}

// ---------------------------------------------------------------------------
// Run summaries
// ---------------------------------------------------------------------------

enum class Setting { fov_only, fov_per, big_per };

inline const char* to_string(Setting s) {
  switch (s) {
    case Setting::fov_only: return "fov_only";
    case Setting::fov_per: return "fov_per";
    case Setting::big_per: return "big_per";
  }
  return "fov_only";
}

inline Setting setting_from_string(const std::string& s) {
  if (s == "fov_only") return Setting::fov_only;
  if (s == "fov_per" || s == "fov+per") return Setting::fov_per;
  if (s == "big_per") return Setting::big_per;
  throw InputError("unknown setting '" + s + "' (expected fov_only, fov_per or big_per)");
}

/// One sweep configuration's aggregated result: dataset-mean raw metrics,
/// their normalized/debiased forms, movement statistics for both sides,
/// the movement-similarity term and the composite score.
struct RunSummary {
  std::string run_id;
  Setting setting = Setting::fov_only;
  double patch_size = 0.0;
  std::size_t steps = 0;
  std::size_t n_pairs = 0;
  std::size_t model_only = 0;  // images present only in the model log
  std::size_t human_only = 0;  // images present only in the human set
  std::optional<double> accuracy;
  MetricBundle raw;
  NormalizedBundle normalized;
  MovementStats model_move;
  MovementStats human_move;
  double movement_dist = 0.0;
  double sim_move = 0.0;
  double gcs = 0.0;
  std::optional<double> evidence_final_p;
  double lambda = 0.1;
  std::string fingerprint;
};

// ---------------------------------------------------------------------------
// Lambda sensitivity
// ---------------------------------------------------------------------------

struct SensitivityEntry {
  double lambda = 0.0;
  std::string best_run;
  double best_gcs = 0.0;
};

/// Where the top-ranked run flips between two grid points. Since GCS is
/// affine in lambda, the exact crossover between the two winners solves
///   m_a + l * s_a = m_b + l * s_b.
struct Crossover {
  double lambda_low = 0.0;
  double lambda_high = 0.0;
  double lambda_star = 0.0;
  std::string from_run;
  std::string to_run;
};

struct SensitivityReport {
  std::vector<SensitivityEntry> entries;  // one per grid lambda, ascending
  std::vector<Crossover> crossovers;
  bool rank_changed = false;
};

inline SensitivityReport lambda_sensitivity(const std::vector<RunSummary>& runs,
                                            std::vector<double> lambdas) {
  if (runs.size() < 2) throw InputError("lambda sensitivity needs at least two runs");
  if (lambdas.empty()) throw InputError("empty lambda grid");
  std::sort(lambdas.begin(), lambdas.end());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());

  auto score_at = [](const RunSummary& r, double lambda) {
    return debiased_mean(r.normalized) + lambda * r.sim_move;
  };
  auto precedes = [](const RunSummary& a, const RunSummary& b) {
    return std::tie(a.setting, a.patch_size, a.run_id) < std::tie(b.setting, b.patch_size, b.run_id);
  };

  SensitivityReport report;
  const RunSummary* previous_best = nullptr;
  double previous_lambda = 0.0;
  for (const double lambda : lambdas) {
    const RunSummary* best = &runs.front();
    for (const auto& r : runs) {
      const double s = score_at(r, lambda);
      const double sb = score_at(*best, lambda);
      if (s > sb || (s == sb && precedes(r, *best))) best = &r;
    }
    report.entries.push_back({lambda, best->run_id, score_at(*best, lambda)});

    if (previous_best != nullptr && best != previous_best) {
      report.rank_changed = true;
      Crossover c;
      c.lambda_low = previous_lambda;
      c.lambda_high = lambda;
      c.from_run = previous_best->run_id;
      c.to_run = best->run_id;
      const double slope_delta = best->sim_move - previous_best->sim_move;
      const double offset_delta =
          debiased_mean(previous_best->normalized) - debiased_mean(best->normalized);
      c.lambda_star = slope_delta != 0.0 ? offset_delta / slope_delta : lambda;
      report.crossovers.push_back(std::move(c));
    }
    previous_best = best;
    previous_lambda = lambda;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Configuration block and fingerprint
// ---------------------------------------------------------------------------

struct MetricConfig {
  ScanMatchConfig sm;
  MapConfig map;
};

struct GcsConfig {
  double lambda = 0.1;
  MovementConfig movement;
  MetricConfig metrics;
};

inline void validate(const GcsConfig& cfg) {
  if (cfg.lambda < 0.0) throw InputError("lambda must be >= 0");
  validate(cfg.movement);
  validate(cfg.metrics.sm);
  validate(cfg.metrics.map);
}

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

/// Canonical key/value view of every effective parameter. This exact block
/// is what gets hashed for the fingerprint and echoed into output files, so
/// calibration and evaluation can be checked for config agreement.
inline std::vector<std::pair<std::string, std::string>> config_items(const GcsConfig& cfg) {
  using detail::format_double;
  return {
      {"sm.grid_cols", std::to_string(cfg.metrics.sm.grid_cols)},
      {"sm.grid_rows", std::to_string(cfg.metrics.sm.grid_rows)},
      {"sm.gap_penalty", format_double(cfg.metrics.sm.gap_penalty)},
      {"sm.substitution_scale", format_double(cfg.metrics.sm.substitution_scale)},
      {"sm.max_score_per_token", format_double(cfg.metrics.sm.max_score_per_token)},
      {"map.sigma", format_double(cfg.metrics.map.sigma)},
      {"map.downsample", std::to_string(cfg.metrics.map.downsample)},
      {"movement.coverage_grid", std::to_string(cfg.movement.coverage_grid)},
      {"movement.entropy_bins", std::to_string(cfg.movement.entropy_bins)},
      {"movement.collapse_threshold", format_double(cfg.movement.collapse_threshold)},
      {"movement.tau", format_double(cfg.movement.tau)},
      {"movement.epsilon", format_double(cfg.movement.epsilon)},
      {"lambda", format_double(cfg.lambda)},
  };
}

/// FNV-1a (64-bit) over the canonical config block, printed as 16 hex
/// digits. Stable across platforms; any parameter change alters it.
inline std::string config_fingerprint(const GcsConfig& cfg) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  auto mix = [&hash](const std::string& s) {
    for (const unsigned char ch : s) {
      hash ^= ch;
      hash *= 0x100000001b3ull;
    }
  };
  for (const auto& [key, value] : config_items(cfg)) {
    mix(key);
    mix("=");
    mix(value);
    mix("\n");
  }
  char buf[17];
  for (int i = 15; i >= 0; --i) {
    buf[i] = "0123456789abcdef"[hash & 0xf];
    hash >>= 4;
  }
  return std::string(buf, 16);
}

}  // namespace gcs
