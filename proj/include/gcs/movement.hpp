#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "gcs/core.hpp"

namespace gcs {

/// The six run-level movement features compared between model and human.
/// For a single path, coverage is an integer cell count and collapse_rate a
/// fraction of saccades; dataset-level values are plain means of these, so
/// all fields are real.
struct MovementStats {
  double total_path = 0.0;              // sum of saccade amplitudes, px
  double mean_saccade_amplitude = 0.0;  // total_path / (n - 1), 0 for n == 1
  double mean_center_distance = 0.0;    // mean distance to frame center, px
  double coverage = 0.0;                // distinct cells visited on the coverage grid
  double direction_entropy = 0.0;       // Shannon entropy of saccade angles, nats
  double collapse_rate = 0.0;           // fraction of saccades below threshold
};

struct MovementConfig {
  int coverage_grid = 4;            // cells per side
  int entropy_bins = 16;            // equal angular sectors
  double collapse_threshold = 1.0;  // px; saccades below it count as collapsed
  double tau = 1.0;
  double epsilon = 1e-6;

  /// Collapse threshold defaults to 1% of the frame diagonal.
  static MovementConfig defaults_for(const Frame& f) {
    MovementConfig cfg;
    cfg.collapse_threshold = 0.01 * std::hypot(double(f.width), double(f.height));
    return cfg;
  }
};

inline void validate(const MovementConfig& cfg) {
  if (cfg.coverage_grid < 1) throw InputError("coverage grid must be >= 1");
  if (cfg.entropy_bins < 1) throw InputError("entropy bins must be >= 1");
  if (cfg.collapse_threshold < 0.0) throw InputError("collapse threshold must be >= 0");
  if (!(cfg.tau > 0.0)) throw InputError("tau must be positive");
  if (!(cfg.epsilon > 0.0)) throw InputError("epsilon must be positive");
}

inline MovementStats movement_stats(const Scanpath& path, const Frame& frame,
                                    const MovementConfig& cfg) {
  if (path.empty()) throw InputError("empty scanpath");
  validate(frame);
  validate(cfg);

  const std::size_t n = path.size();
  MovementStats out;

  const Point center = frame_center(frame);
  std::vector<double> center_distances(n);
  for (std::size_t i = 0; i < n; ++i) center_distances[i] = distance(path.at(i), center);
  out.mean_center_distance = mean_over_dataset(center_distances);

  // Coverage over a coverage_grid x coverage_grid partition of the frame.
  const int grid = cfg.coverage_grid;
  const double cell_w = double(frame.width) / grid;
  const double cell_h = double(frame.height) / grid;
  std::vector<char> visited(std::size_t(grid) * grid, 0);
  int distinct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point p = path.at(i);
    const int c = std::clamp(int(p.x / cell_w), 0, grid - 1);
    const int r = std::clamp(int(p.y / cell_h), 0, grid - 1);
    char& seen = visited[std::size_t(r) * grid + c];
    if (!seen) {
      seen = 1;
      ++distinct;
    }
  }
  out.coverage = double(distinct);

  if (n == 1) return out;  // no saccades: totals, rates and entropy stay 0

  std::vector<std::size_t> bin_counts(std::size_t(cfg.entropy_bins), 0);
  std::size_t valid_saccades = 0;
  std::size_t collapsed = 0;
  double total = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const Point a = path.at(i - 1);
    const Point b = path.at(i);
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double amplitude = std::sqrt(dx * dx + dy * dy);
    total += amplitude;
    if (amplitude < cfg.collapse_threshold) {
      ++collapsed;
      continue;  // collapsed saccades carry no usable direction
    }
    const double angle = std::atan2(dy, dx);  // (-pi, pi]
    int bin = int((angle + std::numbers::pi) / (2.0 * std::numbers::pi) * cfg.entropy_bins);
    if (bin >= cfg.entropy_bins) bin = 0;  // angle == pi wraps onto -pi
    if (bin < 0) bin = 0;
    ++bin_counts[std::size_t(bin)];
    ++valid_saccades;
  }

  out.total_path = total;
  out.mean_saccade_amplitude = total / double(n - 1);
  out.collapse_rate = double(collapsed) / double(n - 1);
  if (valid_saccades > 0) {
    double entropy = 0.0;
    for (const std::size_t count : bin_counts) {
      if (count == 0) continue;
      const double p = double(count) / double(valid_saccades);
      entropy -= p * std::log(p);
    }
    out.direction_entropy = entropy;
  }
  return out;
}

/// Root-mean-square relative error across the six movement features,
///   d = sqrt( (1/6) * sum_k ( |model_k - human_k| / (|human_k| + eps) )^2 ).
inline double movement_distance(const MovementStats& model, const MovementStats& human,
                                double epsilon) {
  const double m[6] = {model.total_path,    model.mean_saccade_amplitude,
                       model.mean_center_distance, model.coverage,
                       model.direction_entropy,    model.collapse_rate};
  const double h[6] = {human.total_path,    human.mean_saccade_amplitude,
                       human.mean_center_distance, human.coverage,
                       human.direction_entropy,    human.collapse_rate};
  double sum_sq = 0.0;
  for (int k = 0; k < 6; ++k) {
    const double rel = std::abs(m[k] - h[k]) / (std::abs(h[k]) + epsilon);
    sum_sq += rel * rel;
  }
  return std::sqrt(sum_sq / 6.0);
}

/// Maps the movement distance into (0, 1]: exp(-d / tau).
inline double movement_similarity(double d, double tau) {
  if (d < 0.0) throw InputError("movement distance must be >= 0");
  if (!(tau > 0.0)) throw InputError("tau must be positive");
  return std::exp(-d / tau);
}

/// Feature-wise mean of per-path movement statistics, in input order.
inline MovementStats mean_movement(std::span<const MovementStats> stats) {
  if (stats.empty()) throw InputError("empty aggregation");
  auto column = [&](double MovementStats::*field) {
    std::vector<double> col(stats.size());
    for (std::size_t i = 0; i < stats.size(); ++i) col[i] = stats[i].*field;
    return mean_over_dataset(col);
  };
  MovementStats out;
  out.total_path = column(&MovementStats::total_path);
  out.mean_saccade_amplitude = column(&MovementStats::mean_saccade_amplitude);
  out.mean_center_distance = column(&MovementStats::mean_center_distance);
  out.coverage = column(&MovementStats::coverage);
  out.direction_entropy = column(&MovementStats::direction_entropy);
  out.collapse_rate = column(&MovementStats::collapse_rate);
  return out;
}

}  // namespace gcs
