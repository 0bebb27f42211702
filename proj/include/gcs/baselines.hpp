#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "gcs/core.hpp"
#include "gcs/metrics.hpp"
#include "gcs/parallel.hpp"

namespace gcs {

enum class Corner { TL, TR, BL, BR };

inline const char* to_string(Corner c) {
  switch (c) {
    case Corner::TL: return "TL";
    case Corner::TR: return "TR";
    case Corner::BL: return "BL";
    case Corner::BR: return "BR";
  }
  return "TL";
}

inline Corner corner_from_string(const std::string& s) {
  if (s == "TL") return Corner::TL;
  if (s == "TR") return Corner::TR;
  if (s == "BL") return Corner::BL;
  if (s == "BR") return Corner::BR;
  throw InputError("unknown corner '" + s + "' (expected TL, TR, BL or BR)");
}

/// Always-center policy: `steps` fixations at the frame center.
inline Scanpath center_scanpath(const Frame& frame, std::size_t steps) {
  if (steps == 0) throw InputError("baseline scanpath needs at least one step");
  const Point c = frame_center(frame);
  Scanpath path;
  path.frame = frame;
  path.source = Source::baseline;
  path.image_id = "center";
  path.fixations.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    path.fixations.push_back({c.x, c.y, int(t), std::nullopt});
  }
  return path;
}

/// Corner-fixation policy: `steps` fixations at the chosen corner pixel.
inline Scanpath corner_scanpath(const Frame& frame, std::size_t steps, Corner corner) {
  if (steps == 0) throw InputError("baseline scanpath needs at least one step");
  validate(frame);
  const double right = frame.width - 1.0;
  const double bottom = frame.height - 1.0;
  Point p{0.0, 0.0};
  switch (corner) {
    case Corner::TL: p = {0.0, 0.0}; break;
    case Corner::TR: p = {right, 0.0}; break;
    case Corner::BL: p = {0.0, bottom}; break;
    case Corner::BR: p = {right, bottom}; break;
  }
  Scanpath path;
  path.frame = frame;
  path.source = Source::baseline;
  path.image_id = "corner";
  path.fixations.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    path.fixations.push_back({p.x, p.y, int(t), std::nullopt});
  }
  return path;
}

/// Per-metric reference anchors: `upper` is the identical-human mean (the
/// best attainable value), `lower` the corner-policy mean (the worst), and
/// `center` the always-center-policy mean. For DTW "best" is numerically
/// smallest, so upper <= center <= lower; the other metrics run the usual
/// way around.
struct MetricBounds {
  double upper = 0.0;
  double lower = 0.0;
  double center = 0.0;
};

struct CalibrationBounds {
  MetricBounds dtw, sm, nss, auc;
  Frame frame;
  Corner corner = Corner::TL;
  std::size_t n_images = 0;
  std::string dataset_id;
  std::string fingerprint;
  std::vector<std::string> warnings;  // ordering violations; not serialized
};

struct CalibrateOptions {
  Corner corner = Corner::TL;
  unsigned jobs = 1;
  std::string dataset_id;
  std::string fingerprint;
};

namespace detail {

// Precomputed state for one stationary baseline path of a given length:
// its fixation map never changes across images, so build it (and a sorted
// copy for the AUC fast path) once.
struct BaselineContext {
  Scanpath path;
  FixationMapSet maps;
  std::vector<double> sorted_values;
};

inline BaselineContext make_baseline_context(Scanpath path, const MapConfig& map_cfg) {
  BaselineContext ctx;
  ctx.maps = prepare_map(path, map_cfg);
  ctx.path = std::move(path);
  ctx.sorted_values = ctx.maps.raw.values;
  std::sort(ctx.sorted_values.begin(), ctx.sorted_values.end());
  return ctx;
}

inline void check_bounds_health(const char* name, const MetricBounds& b, bool lower_is_better,
                                std::vector<std::string>& warnings) {
  if (b.upper == b.lower) {
    throw DegenerateCalibration(std::string("degenerate calibration: ") + name +
                                " upper bound equals lower bound");
  }
  if (b.center == b.upper) {
    throw DegenerateCalibration(std::string("degenerate calibration: ") + name +
                                " center baseline equals upper bound");
  }
  const bool ordered = lower_is_better ? (b.upper <= b.center && b.center <= b.lower)
                                       : (b.lower <= b.center && b.center <= b.upper);
  if (!ordered) {
    warnings.push_back(std::string(name) + ": baseline ordering violated (upper=" +
                       std::to_string(b.upper) + " center=" + std::to_string(b.center) +
                       " lower=" + std::to_string(b.lower) + ")");
  }
}

}  // namespace detail

/// Computes dataset-mean calibration anchors from a set of human scanpaths:
/// per image, the four metrics for (human, human), (corner policy, human)
/// and (center policy, human), averaged in image order. Baseline paths use
/// each image's own step count. Deterministic for any job count.
///
/// Throws DegenerateCalibration when, on any metric, the upper bound
/// coincides with the lower bound (normalization undefined) or with the
/// center baseline (debiasing collapses).
inline CalibrationBounds calibrate(const std::vector<Scanpath>& humans,
                                   const ScanMatchConfig& sm_cfg, const MapConfig& map_cfg,
                                   const CalibrateOptions& options = {}) {
  if (humans.empty()) throw InputError("empty dataset");
  validate(sm_cfg);
  validate(map_cfg);
  const Frame frame = humans.front().frame;
  for (const auto& h : humans) {
    if (!(h.frame == frame)) throw InputError("frame mismatch within dataset");
    if (h.empty()) throw InputError("empty scanpath");
  }

  // Stationary baselines depend only on the step count; build one context
  // per distinct human path length up front, shared read-only by workers.
  std::map<std::size_t, detail::BaselineContext> corner_by_len, center_by_len;
  for (const auto& h : humans) {
    const std::size_t len = h.size();
    if (!corner_by_len.contains(len)) {
      corner_by_len.emplace(
          len, detail::make_baseline_context(corner_scanpath(frame, len, options.corner), map_cfg));
      center_by_len.emplace(len,
                            detail::make_baseline_context(center_scanpath(frame, len), map_cfg));
    }
  }

  struct Row {
    MetricBundle upper, lower, center;
  };
  std::vector<Row> rows(humans.size());
  parallel_for(humans.size(), options.jobs, [&](std::size_t i) {
    const Scanpath& human = humans[i];
    const auto& corner_ctx = corner_by_len.at(human.size());
    const auto& center_ctx = center_by_len.at(human.size());
    Row row;
    row.upper = metric_bundle_on(prepare_map(human, map_cfg), human, human, sm_cfg);
    row.lower = metric_bundle_on(corner_ctx.maps, corner_ctx.path, human, sm_cfg,
                                 &corner_ctx.sorted_values);
    row.center = metric_bundle_on(center_ctx.maps, center_ctx.path, human, sm_cfg,
                                  &center_ctx.sorted_values);
    rows[i] = row;
  });

  auto column_mean = [&](double MetricBundle::*field, MetricBundle Row::*role) {
    std::vector<double> col(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) col[i] = rows[i].*role.*field;
    return mean_over_dataset(col);
  };
  auto bounds_for = [&](double MetricBundle::*field) {
    MetricBounds b;
    b.upper = column_mean(field, &Row::upper);
    b.lower = column_mean(field, &Row::lower);
    b.center = column_mean(field, &Row::center);
    return b;
  };

  CalibrationBounds out;
  out.dtw = bounds_for(&MetricBundle::dtw);
  out.sm = bounds_for(&MetricBundle::sm);
  out.nss = bounds_for(&MetricBundle::nss);
  out.auc = bounds_for(&MetricBundle::auc);
  out.frame = frame;
  out.corner = options.corner;
  out.n_images = humans.size();
  out.dataset_id = options.dataset_id;
  out.fingerprint = options.fingerprint;

  detail::check_bounds_health("dtw", out.dtw, /*lower_is_better=*/true, out.warnings);
  detail::check_bounds_health("sm", out.sm, /*lower_is_better=*/false, out.warnings);
  detail::check_bounds_health("nss", out.nss, /*lower_is_better=*/false, out.warnings);
  detail::check_bounds_health("auc", out.auc, /*lower_is_better=*/false, out.warnings);
  return out;
}

}  // namespace gcs
