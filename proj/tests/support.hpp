#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gcs/gcs.hpp"

namespace testsupport {

inline gcs::Scanpath make_path(const gcs::Frame& frame,
                               const std::vector<std::pair<double, double>>& points,
                               std::string image_id = "img",
                               gcs::Source source = gcs::Source::model) {
  gcs::Scanpath p;
  p.frame = frame;
  p.source = source;
  p.image_id = std::move(image_id);
  int step = 0;
  for (const auto& [x, y] : points) {
    p.fixations.push_back({x, y, step++, std::nullopt});
  }
  return p;
}

// Deterministic uniform double in [0, 1), identical across platforms.
inline double unit(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

inline gcs::Scanpath random_path(std::mt19937_64& rng, const gcs::Frame& frame, std::size_t len,
                                 std::string image_id = "img") {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    pts.emplace_back(unit(rng) * (frame.width - 1), unit(rng) * (frame.height - 1));
  }
  return make_path(frame, pts, std::move(image_id));
}

// Random path on integer pixel coordinates (used where exact FP reasoning
// needs representable inputs).
inline gcs::Scanpath random_grid_path(std::mt19937_64& rng, const gcs::Frame& frame,
                                      std::size_t len, std::string image_id = "img") {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    pts.emplace_back(double(rng() % std::uint64_t(frame.width)),
                     double(rng() % std::uint64_t(frame.height)));
  }
  return make_path(frame, pts, std::move(image_id));
}

}  // namespace testsupport
