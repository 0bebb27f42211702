#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gcs {

// Error classes map onto distinct CLI exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InputError : Error {
  using Error::Error;
};
struct DegenerateCalibration : Error {
  using Error::Error;
};
struct FingerprintMismatch : Error {
  using Error::Error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

/// Image plane in pixel-index coordinates: origin at the top-left pixel,
/// x grows rightward, y grows downward, and the last addressable position
/// is (width-1, height-1). Distances are reported in these units; no
/// visual-angle conversion is performed anywhere.
struct Frame {
  int width = 0;
  int height = 0;

  bool operator==(const Frame&) const = default;
};

inline void validate(const Frame& f) {
  if (f.width < 1 || f.height < 1) {
    throw InputError("frame dimensions must be >= 1");
  }
}

/// Continuous center of the frame, ((width-1)/2, (height-1)/2).
/// This is the pixel-index center, half a pixel away from width/2; the
/// choice shifts center-anchored distances by 0.5 px, so it is fixed here
/// once for every consumer.
inline Point frame_center(const Frame& f) {
  validate(f);
  return {(f.width - 1) / 2.0, (f.height - 1) / 2.0};
}

struct Fixation {
  double x = 0.0;
  double y = 0.0;
  int step = 0;
  std::optional<double> duration_ms;  // unused by the metrics, kept for provenance
};

enum class Source { human, model, baseline };

/// Ordered fixation sequence on one image. Steps are strictly increasing;
/// coordinates are inside the frame (ingestion clamps them).
struct Scanpath {
  Frame frame;
  std::vector<Fixation> fixations;
  Source source = Source::human;
  std::string image_id;

  std::size_t size() const { return fixations.size(); }
  bool empty() const { return fixations.empty(); }
  Point at(std::size_t i) const { return {fixations[i].x, fixations[i].y}; }
};

/// Raw per-pair values of the four scanpath metrics.
/// dtw is in pixel units, lower is better; the other three are
/// higher-is-better (sm and auc live in [0,1]).
struct MetricBundle {
  double dtw = 0.0;
  double sm = 0.0;
  double nss = 0.0;
  double auc = 0.0;
};

/// Arithmetic mean accumulated in input order with Neumaier compensation,
/// so dataset means are deterministic and permutation-stable to ~1e-16.
inline double mean_over_dataset(std::span<const double> values) {
  if (values.empty()) throw InputError("empty aggregation");
  double sum = 0.0;
  double comp = 0.0;
  for (const double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  return (sum + comp) / static_cast<double>(values.size());
}

inline double mean_over_dataset(const std::vector<double>& values) {
  return mean_over_dataset(std::span<const double>(values));
}

}  // namespace gcs
