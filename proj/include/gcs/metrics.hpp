#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "gcs/core.hpp"

namespace gcs {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// ScanMatch parameters. The default substitution scale is chosen so that
/// identical cells score max_score_per_token and the farthest cell pair on
/// the grid scores zero up to rounding (linear distance-to-score map).
struct ScanMatchConfig {
  int grid_cols = 8;
  int grid_rows = 8;
  double gap_penalty = 0.0;  // applied per skipped token, must be <= 0
  double substitution_scale = 1.0 / std::hypot(7.0, 7.0);
  double max_score_per_token = 1.0;

  static ScanMatchConfig defaults_for_grid(int cols, int rows) {
    ScanMatchConfig cfg;
    cfg.grid_cols = cols;
    cfg.grid_rows = rows;
    cfg.substitution_scale =
        cfg.max_score_per_token / std::hypot(double(cols - 1), double(rows - 1));
    return cfg;
  }
};

inline void validate(const ScanMatchConfig& cfg) {
  if (cfg.grid_cols < 1 || cfg.grid_rows < 1 || cfg.grid_cols * cfg.grid_rows < 2) {
    throw InputError("invalid grid");
  }
  if (cfg.gap_penalty > 0.0) throw InputError("gap penalty must be <= 0");
  if (!(cfg.substitution_scale > 0.0)) throw InputError("substitution scale must be positive");
  if (!(cfg.max_score_per_token > 0.0)) throw InputError("max score per token must be positive");
}

/// Fixation-map parameters shared by NSS and AUC.
struct MapConfig {
  double sigma = 8.0;  // Gaussian std in pixels
  int downsample = 1;  // map resolution divisor

  /// sigma = width/16; full resolution up to 128 px frames, /4 above.
  static MapConfig defaults_for(const Frame& f) {
    MapConfig cfg;
    cfg.sigma = f.width / 16.0;
    cfg.downsample = (f.width <= 128 && f.height <= 128) ? 1 : 4;
    return cfg;
  }
};

inline void validate(const MapConfig& cfg) {
  if (!(cfg.sigma > 0.0)) throw InputError("sigma must be positive");
  if (cfg.downsample < 1) throw InputError("downsample must be >= 1");
}

// ---------------------------------------------------------------------------
// DTW
// ---------------------------------------------------------------------------

namespace detail {

inline void require_comparable(const Scanpath& a, const Scanpath& b) {
  if (a.empty() || b.empty()) throw InputError("empty scanpath");
  if (!(a.frame == b.frame)) throw InputError("frame mismatch");
}

}  // namespace detail

/// Classical dynamic time warping with Euclidean ground cost and the
/// symmetric step pattern (match, insert, delete). Returns the full
/// cumulative alignment cost; no length normalization is applied.
inline double dtw_distance(const Scanpath& a, const Scanpath& b) {
  detail::require_comparable(a, b);
  const std::size_t n = a.size();
  const std::size_t m = b.size();

  std::vector<double> prev(m), cur(m);
  for (std::size_t i = 0; i < n; ++i) {
    const Point pa = a.at(i);
    for (std::size_t j = 0; j < m; ++j) {
      const double cost = distance(pa, b.at(j));
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else if (i == 0) {
        best = cur[j - 1];
      } else if (j == 0) {
        best = prev[0];
      } else {
        best = std::min({prev[j - 1], prev[j], cur[j - 1]});
      }
      cur[j] = cost + best;
    }
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

// ---------------------------------------------------------------------------
// ScanMatch
// ---------------------------------------------------------------------------

namespace detail {

struct Cell {
  int col = 0;
  int row = 0;
};

inline Cell quantize(const Point& p, const Frame& f, int cols, int rows) {
  const double cw = double(f.width) / cols;
  const double ch = double(f.height) / rows;
  int c = static_cast<int>(p.x / cw);
  int r = static_cast<int>(p.y / ch);
  c = std::clamp(c, 0, cols - 1);
  r = std::clamp(r, 0, rows - 1);
  return {c, r};
}

inline std::vector<Cell> tokenize(const Scanpath& p, const ScanMatchConfig& cfg) {
  std::vector<Cell> tokens;
  tokens.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    tokens.push_back(quantize(p.at(i), p.frame, cfg.grid_cols, cfg.grid_rows));
  }
  return tokens;
}

}  // namespace detail

/// Global (Needleman-Wunsch) alignment of grid-quantized fixation tokens.
/// Substitution score for cells u, v is
///   max_score_per_token - substitution_scale * dist(u, v)
/// with dist the Euclidean distance between cell centers in cell units.
/// The alignment score is normalized by max_score_per_token * max(|a|, |b|)
/// and clamped to [0,1]; identical sequences score exactly 1.
///
/// Internally the scores are divided by max_score_per_token up front so that
/// the identity case accumulates exact 1.0 terms regardless of the
/// configured token score.
inline double scanmatch_score(const Scanpath& a, const Scanpath& b,
                              const ScanMatchConfig& cfg = {}) {
  detail::require_comparable(a, b);
  validate(cfg);

  const auto ta = detail::tokenize(a, cfg);
  const auto tb = detail::tokenize(b, cfg);
  const std::size_t n = ta.size();
  const std::size_t m = tb.size();

  const double unit_scale = cfg.substitution_scale / cfg.max_score_per_token;
  const double gap = cfg.gap_penalty / cfg.max_score_per_token;

  auto substitution = [&](std::size_t i, std::size_t j) {
    const double dc = double(ta[i].col - tb[j].col);
    const double dr = double(ta[i].row - tb[j].row);
    return 1.0 - unit_scale * std::sqrt(dc * dc + dr * dr);
  };

  // H[i][j] = best score aligning the first i tokens of a with the first j
  // of b; rolling rows over j.
  std::vector<double> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = gap * double(j);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = gap * double(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const double diag = prev[j - 1] + substitution(i - 1, j - 1);
      const double up = prev[j] + gap;
      const double left = cur[j - 1] + gap;
      cur[j] = std::max({diag, up, left});
    }
    std::swap(prev, cur);
  }

  const double normalized = prev[m] / double(std::max(n, m));
  return std::clamp(normalized, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Fixation maps, NSS, AUC
// ---------------------------------------------------------------------------

/// Downsampled grid of Gaussian fixation density. `values` is row-major,
/// rows * cols cells covering the frame; `degenerate` is set by
/// z_normalize when the raw map is constant.
struct SaliencyMap {
  Frame frame;
  int downsample = 1;
  int cols = 0;
  int rows = 0;
  std::vector<double> values;
  bool degenerate = false;

  double at(int row, int col) const { return values[std::size_t(row) * cols + col]; }
};

namespace detail {

inline double cell_center_coord(int index, int downsample) {
  return index * double(downsample) + (downsample - 1) / 2.0;
}

// Inverse of cell_center_coord for continuous pixel coordinates.
inline double to_map_coord(double pixel, int downsample) {
  return (pixel - (downsample - 1) / 2.0) / downsample;
}

inline int cell_of(double pixel, int downsample, int count) {
  const int c = static_cast<int>(pixel / downsample);
  return std::clamp(c, 0, count - 1);
}

}  // namespace detail

/// Sum of isotropic Gaussians (std = cfg.sigma) centered at each fixation,
/// evaluated at the cell centers of the downsampled grid. No normalization.
/// The kernel is separable, so each fixation contributes an outer product
/// of two 1-D weight vectors.
inline SaliencyMap build_fixation_map(const Scanpath& path, const MapConfig& cfg) {
  if (path.empty()) throw InputError("empty scanpath");
  validate(path.frame);
  validate(cfg);

  SaliencyMap map;
  map.frame = path.frame;
  map.downsample = cfg.downsample;
  map.cols = (path.frame.width + cfg.downsample - 1) / cfg.downsample;
  map.rows = (path.frame.height + cfg.downsample - 1) / cfg.downsample;
  map.values.assign(std::size_t(map.cols) * map.rows, 0.0);

  const double inv_two_sigma_sq = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
  std::vector<double> wx(map.cols), wy(map.rows);
  for (std::size_t i = 0; i < path.size(); ++i) {
    const Point p = path.at(i);
    for (int c = 0; c < map.cols; ++c) {
      const double dx = detail::cell_center_coord(c, cfg.downsample) - p.x;
      wx[c] = std::exp(-dx * dx * inv_two_sigma_sq);
    }
    for (int r = 0; r < map.rows; ++r) {
      const double dy = detail::cell_center_coord(r, cfg.downsample) - p.y;
      wy[r] = std::exp(-dy * dy * inv_two_sigma_sq);
    }
    for (int r = 0; r < map.rows; ++r) {
      double* row = map.values.data() + std::size_t(r) * map.cols;
      const double w = wy[r];
      for (int c = 0; c < map.cols; ++c) row[c] += w * wx[c];
    }
  }
  return map;
}

/// Z-normalizes a map (mean 0, population std 1 over all cells). A constant
/// raw map cannot be normalized; it is returned zero-filled with the
/// degenerate flag set.
inline SaliencyMap z_normalize(const SaliencyMap& raw) {
  SaliencyMap out = raw;
  const auto [mn, mx] = std::minmax_element(raw.values.begin(), raw.values.end());
  if (*mn == *mx) {
    std::fill(out.values.begin(), out.values.end(), 0.0);
    out.degenerate = true;
    return out;
  }
  const double n = double(raw.values.size());
  double sum = 0.0;
  for (const double v : raw.values) sum += v;
  const double mean = sum / n;
  double var = 0.0;
  for (const double v : raw.values) {
    const double d = v - mean;
    var += d * d;
  }
  const double stddev = std::sqrt(var / n);
  for (double& v : out.values) v = (v - mean) / stddev;
  out.degenerate = false;
  return out;
}

/// Raw map plus its z-normalized form; built once per model path and shared
/// between NSS and AUC.
struct FixationMapSet {
  SaliencyMap raw;
  SaliencyMap z;
};

inline FixationMapSet prepare_map(const Scanpath& model, const MapConfig& cfg) {
  FixationMapSet set;
  set.raw = build_fixation_map(model, cfg);
  set.z = z_normalize(set.raw);
  return set;
}

namespace detail {

inline double bilinear_sample(const SaliencyMap& map, double px, double py) {
  double u = to_map_coord(px, map.downsample);
  double v = to_map_coord(py, map.downsample);
  u = std::clamp(u, 0.0, double(map.cols - 1));
  v = std::clamp(v, 0.0, double(map.rows - 1));
  const int c0 = static_cast<int>(u);
  const int r0 = static_cast<int>(v);
  const int c1 = std::min(c0 + 1, map.cols - 1);
  const int r1 = std::min(r0 + 1, map.rows - 1);
  const double fu = u - c0;
  const double fv = v - r0;
  const double top = map.at(r0, c0) * (1.0 - fu) + map.at(r0, c1) * fu;
  const double bottom = map.at(r1, c0) * (1.0 - fu) + map.at(r1, c1) * fu;
  return top * (1.0 - fv) + bottom * fv;
}

inline std::vector<std::size_t> fixated_cells(const SaliencyMap& map, const Scanpath& human) {
  std::vector<std::size_t> cells;
  cells.reserve(human.size());
  for (std::size_t i = 0; i < human.size(); ++i) {
    const Point p = human.at(i);
    const int c = cell_of(p.x, map.downsample, map.cols);
    const int r = cell_of(p.y, map.downsample, map.rows);
    cells.push_back(std::size_t(r) * map.cols + c);
  }
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  return cells;
}

}  // namespace detail

struct NssResult {
  double value = 0.0;
  bool degenerate = false;
};

/// Normalized scanpath saliency: the z-normalized model map sampled
/// (bilinearly) at the human fixation locations, averaged. A degenerate
/// (constant) model map scores 0 and is flagged.
inline NssResult nss_on(const FixationMapSet& model_maps, const Scanpath& human) {
  if (human.empty()) throw InputError("empty scanpath");
  if (!(human.frame == model_maps.raw.frame)) throw InputError("frame mismatch");
  if (model_maps.z.degenerate) return {0.0, true};

  std::vector<double> samples;
  samples.reserve(human.size());
  for (std::size_t i = 0; i < human.size(); ++i) {
    const Point p = human.at(i);
    samples.push_back(detail::bilinear_sample(model_maps.z, p.x, p.y));
  }
  return {mean_over_dataset(samples), false};
}

inline NssResult nss(const Scanpath& model, const Scanpath& human, const MapConfig& cfg) {
  detail::require_comparable(model, human);
  return nss_on(prepare_map(model, cfg), human);
}

/// AUC (Judd variant): cells containing human fixations are positives, all
/// remaining cells negatives, and the model map value is the classifier
/// score. Computed exactly as the Mann-Whitney rank statistic with ties
/// counted 1/2. Rescaling the map (the usual min-max step) is strictly
/// monotone and cannot change the ranking, so the statistic is evaluated on
/// the raw values; a constant map scores 0.5.
///
/// `sorted_values`, when given, must be the ascending sort of map.values;
/// it lets repeated evaluations of one map (the calibration baselines) skip
/// the full scan.
inline double auc_on(const SaliencyMap& map, const Scanpath& human,
                     const std::vector<double>* sorted_values = nullptr) {
  if (human.empty()) throw InputError("empty scanpath");
  if (!(human.frame == map.frame)) throw InputError("frame mismatch");

  const auto positives = detail::fixated_cells(map, human);
  const std::size_t total = map.values.size();
  const std::size_t p_count = positives.size();
  const std::size_t n_count = total - p_count;
  if (n_count == 0) throw InputError("no negatives");

  const auto [mn, mx] = std::minmax_element(map.values.begin(), map.values.end());
  if (*mn == *mx) return 0.5;

  std::vector<double> pos_values;
  pos_values.reserve(p_count);
  for (const std::size_t cell : positives) pos_values.push_back(map.values[cell]);
  std::sort(pos_values.begin(), pos_values.end());

  // U = sum over (positive, negative) pairs of [p > n] + 0.5 [p == n].
  // All partial sums are multiples of 0.5 well below 2^53, so both counting
  // routes below are exact and agree bit for bit.
  double u_stat = 0.0;
  if (sorted_values != nullptr) {
    for (const double v : pos_values) {
      const auto all_lo = std::lower_bound(sorted_values->begin(), sorted_values->end(), v);
      const auto all_hi = std::upper_bound(all_lo, sorted_values->end(), v);
      const auto pos_lo = std::lower_bound(pos_values.begin(), pos_values.end(), v);
      const auto pos_hi = std::upper_bound(pos_lo, pos_values.end(), v);
      const double neg_less = double(all_lo - sorted_values->begin()) - double(pos_lo - pos_values.begin());
      const double neg_equal = double(all_hi - all_lo) - double(pos_hi - pos_lo);
      u_stat += neg_less + 0.5 * neg_equal;
    }
  } else {
    std::size_t next_positive = 0;
    for (std::size_t cell = 0; cell < total; ++cell) {
      if (next_positive < p_count && positives[next_positive] == cell) {
        ++next_positive;
        continue;
      }
      const double v = map.values[cell];
      const auto lo = std::lower_bound(pos_values.begin(), pos_values.end(), v);
      const auto hi = std::upper_bound(lo, pos_values.end(), v);
      u_stat += double(pos_values.end() - hi) + 0.5 * double(hi - lo);
    }
  }
  return u_stat / (double(p_count) * double(n_count));
}

inline double auc_judd(const Scanpath& model, const Scanpath& human, const MapConfig& cfg) {
  detail::require_comparable(model, human);
  return auc_on(build_fixation_map(model, cfg), human);
}

// ---------------------------------------------------------------------------
// Bundle
// ---------------------------------------------------------------------------

/// All four metrics for one (model, human) pair, reusing a prebuilt model
/// map. This is the hot path for calibration and sweep evaluation.
inline MetricBundle metric_bundle_on(const FixationMapSet& model_maps, const Scanpath& model,
                                     const Scanpath& human, const ScanMatchConfig& sm_cfg,
                                     const std::vector<double>* sorted_values = nullptr) {
  MetricBundle out;
  out.dtw = dtw_distance(model, human);
  out.sm = scanmatch_score(model, human, sm_cfg);
  out.nss = nss_on(model_maps, human).value;
  out.auc = auc_on(model_maps.raw, human, sorted_values);
  return out;
}

inline MetricBundle metric_bundle(const Scanpath& model, const Scanpath& human,
                                  const ScanMatchConfig& sm_cfg, const MapConfig& map_cfg) {
  detail::require_comparable(model, human);
  return metric_bundle_on(prepare_map(model, map_cfg), model, human, sm_cfg);
}

}  // namespace gcs
