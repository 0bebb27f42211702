#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "gcs/baselines.hpp"
#include "gcs/core.hpp"
#include "gcs/scoring.hpp"

namespace gcs {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline double parse_double(std::string_view s, const std::string& context) {
  s = trim(s);
  double value = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(value)) {
    throw InputError(context + ": expected a finite number, got '" + std::string(s) + "'");
  }
  return value;
}

inline long long parse_int(std::string_view s, const std::string& context) {
  s = trim(s);
  long long value = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw InputError(context + ": expected an integer, got '" + std::string(s) + "'");
  }
  return value;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.emplace_back(trim(std::string_view(line).substr(start)));
      break;
    }
    fields.emplace_back(trim(std::string_view(line).substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

inline std::string location(const std::string& path, std::size_t line_no) {
  return path + ":" + std::to_string(line_no);
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path);
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path);
  return out;
}

// Reads the next non-blank, non-comment ('#') line. Returns false at EOF.
inline bool next_content_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    const auto stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    return true;
  }
  return false;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scanpath CSV
// ---------------------------------------------------------------------------
//
// Format: header `image_id,step,x,y` with an optional trailing
// `duration_ms` column, then one row per fixation. Lines starting with '#'
// are comments. Rows may appear in any order; they are sorted by
// (image_id, step). Coordinates are clamped into [0, width-1] x
// [0, height-1] and the number of clamped fixations is reported so callers
// can surface noisy inputs.

struct ScanpathLoad {
  std::vector<Scanpath> paths;  // ascending image_id
  std::size_t clamped = 0;
};

inline ScanpathLoad load_scanpaths(const std::string& path, const Frame& frame, Source source) {
  validate(frame);
  auto in = detail::open_input(path);

  std::string line;
  std::size_t line_no = 0;
  if (!detail::next_content_line(in, line, line_no)) throw InputError(path + ": empty file");
  const auto header = detail::split_csv(line);
  bool has_duration = false;
  if (header == std::vector<std::string>{"image_id", "step", "x", "y"}) {
    has_duration = false;
  } else if (header == std::vector<std::string>{"image_id", "step", "x", "y", "duration_ms"}) {
    has_duration = true;
  } else {
    throw InputError(detail::location(path, line_no) +
                     ": expected header 'image_id,step,x,y[,duration_ms]'");
  }
  const std::size_t n_cols = has_duration ? 5 : 4;

  struct Row {
    std::string image_id;
    Fixation fix;
  };
  std::vector<Row> rows;
  while (detail::next_content_line(in, line, line_no)) {
    const auto fields = detail::split_csv(line);
    const std::string where = detail::location(path, line_no);
    if (fields.size() != n_cols) {
      throw InputError(where + ": expected " + std::to_string(n_cols) + " fields, got " +
                       std::to_string(fields.size()));
    }
    Row row;
    row.image_id = fields[0];
    if (row.image_id.empty()) throw InputError(where + ": empty image_id");
    const long long step = detail::parse_int(fields[1], where + ": step");
    if (step < 0) throw InputError(where + ": step must be >= 0");
    row.fix.step = static_cast<int>(step);
    row.fix.x = detail::parse_double(fields[2], where + ": x");
    row.fix.y = detail::parse_double(fields[3], where + ": y");
    if (has_duration) {
      const double d = detail::parse_double(fields[4], where + ": duration_ms");
      if (d < 0.0) throw InputError(where + ": duration_ms must be >= 0");
      row.fix.duration_ms = d;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(path + ": no fixation rows");

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.image_id, a.fix.step) < std::tie(b.image_id, b.fix.step);
  });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].image_id == rows[i - 1].image_id && rows[i].fix.step == rows[i - 1].fix.step) {
      throw InputError(path + ": duplicate fixation for image '" + rows[i].image_id + "' step " +
                       std::to_string(rows[i].fix.step));
    }
  }

  ScanpathLoad out;
  const double max_x = frame.width - 1.0;
  const double max_y = frame.height - 1.0;
  for (auto& row : rows) {
    if (out.paths.empty() || out.paths.back().image_id != row.image_id) {
      Scanpath p;
      p.frame = frame;
      p.source = source;
      p.image_id = row.image_id;
      out.paths.push_back(std::move(p));
    }
    Fixation f = row.fix;
    const double cx = std::clamp(f.x, 0.0, max_x);
    const double cy = std::clamp(f.y, 0.0, max_y);
    if (cx != f.x || cy != f.y) ++out.clamped;
    f.x = cx;
    f.y = cy;
    out.paths.back().fixations.push_back(f);
  }
  return out;
}

inline void save_scanpaths(const std::vector<Scanpath>& paths, const std::string& path,
                           const std::vector<std::string>& header_comments = {}) {
  auto out = detail::open_output(path);
  for (const auto& c : header_comments) out << "# " << c << '\n';
  bool all_durations = !paths.empty();
  for (const auto& p : paths) {
    for (const auto& f : p.fixations) {
      if (!f.duration_ms) all_durations = false;
    }
  }
  out << (all_durations ? "image_id,step,x,y,duration_ms\n" : "image_id,step,x,y\n");
  for (const auto& p : paths) {
    for (const auto& f : p.fixations) {
      out << p.image_id << ',' << f.step << ',' << detail::format_double(f.x) << ','
          << detail::format_double(f.y);
      if (all_durations) out << ',' << detail::format_double(*f.duration_ms);
      out << '\n';
    }
  }
  if (!out) throw InputError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Synthetic center-biased data
// ---------------------------------------------------------------------------

/// Generates `n_images` scanpaths of `steps` fixations each, sampled from an
/// isotropic Gaussian around the frame center with standard deviation
/// `center_std_frac * width`, clamped into the frame.
///
/// Randomness is pinned down exactly so a seed reproduces the same bytes on
/// any platform: one std::mt19937_64 stream consumed two draws per fixation,
/// mapped to uniforms via (word >> 11) * 2^-53 and to a Gaussian pair via the
/// Box-Muller transform r = sqrt(-2 ln(1 - u1)), angle = 2*pi*u2.
inline std::vector<Scanpath> synth_dataset(std::size_t n_images, const Frame& frame,
                                           std::size_t steps, double center_std_frac,
                                           std::uint64_t seed) {
  validate(frame);
  if (n_images == 0) throw InputError("n_images must be >= 1");
  if (steps == 0) throw InputError("steps must be >= 1");
  if (center_std_frac < 0.0) throw InputError("center std fraction must be >= 0");

  std::mt19937_64 rng(seed);
  auto unit = [&rng]() { return double(rng() >> 11) * 0x1.0p-53; };

  const Point c = frame_center(frame);
  const double std_px = center_std_frac * frame.width;
  const double max_x = frame.width - 1.0;
  const double max_y = frame.height - 1.0;
  const double two_pi = 8.0 * std::atan(1.0);

  std::vector<Scanpath> out;
  out.reserve(n_images);
  for (std::size_t i = 0; i < n_images; ++i) {
    Scanpath p;
    p.frame = frame;
    p.source = Source::human;
    char id[32];
    std::snprintf(id, sizeof(id), "img_%06zu", i);
    p.image_id = id;
    p.fixations.reserve(steps);
    for (std::size_t s = 0; s < steps; ++s) {
      const double u1 = unit();
      const double u2 = unit();
      const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
      const double z0 = r * std::cos(two_pi * u2);
      const double z1 = r * std::sin(two_pi * u2);
      Fixation f;
      f.step = static_cast<int>(s);
      f.x = std::clamp(c.x + std_px * z0, 0.0, max_x);
      f.y = std::clamp(c.y + std_px * z1, 0.0, max_y);
      p.fixations.push_back(f);
    }
    out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------
//
// Flat `key=value` file describing one sweep run. Lines starting with '#'
// are comments. File paths are resolved relative to the manifest location.
//
//   run_id=fov_per_8
//   setting=fov_per
//   patch_size=8
//   steps=12
//   accuracy=58.50            # optional, percent
//   scanpath_file=fov_per_8.csv
//   probability_file=fov_per_8_evidence.csv   # optional

struct RunManifest {
  std::string run_id;
  Setting setting = Setting::fov_only;
  double patch_size = 0.0;
  std::size_t steps = 0;
  std::optional<double> accuracy;
  std::string scanpath_file;
  std::optional<std::string> probability_file;
};

inline RunManifest load_manifest(const std::string& path) {
  auto in = detail::open_input(path);
  const auto base = std::filesystem::path(path).parent_path();
  auto resolve = [&base](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };

  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto stripped = detail::trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const std::string where = detail::location(path, line_no);
    const std::size_t eq = stripped.find('=');
    if (eq == std::string_view::npos) throw InputError(where + ": expected key=value");
    const std::string key(detail::trim(stripped.substr(0, eq)));
    const std::string value(detail::trim(stripped.substr(eq + 1)));
    if (key.empty()) throw InputError(where + ": empty key");
    if (!kv.emplace(key, value).second) throw InputError(where + ": duplicate key '" + key + "'");
  }

  static const std::vector<std::string> known = {"run_id",   "setting",       "patch_size",
                                                 "steps",    "accuracy",      "scanpath_file",
                                                 "probability_file"};
  for (const auto& [key, value] : kv) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw InputError(path + ": unknown manifest key '" + key + "'");
    }
  }
  auto require = [&kv, &path](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end() || it->second.empty()) {
      throw InputError(path + ": missing manifest key '" + key + "'");
    }
    return it->second;
  };

  RunManifest m;
  m.run_id = require("run_id");
  m.setting = setting_from_string(require("setting"));
  m.patch_size = detail::parse_double(require("patch_size"), path + ": patch_size");
  if (m.patch_size <= 0.0) throw InputError(path + ": patch_size must be positive");
  const long long steps = detail::parse_int(require("steps"), path + ": steps");
  if (steps < 1) throw InputError(path + ": steps must be >= 1");
  m.steps = static_cast<std::size_t>(steps);
  if (auto it = kv.find("accuracy"); it != kv.end() && !it->second.empty()) {
    m.accuracy = detail::parse_double(it->second, path + ": accuracy");
  }
  m.scanpath_file = resolve(require("scanpath_file"));
  if (auto it = kv.find("probability_file"); it != kv.end() && !it->second.empty()) {
    m.probability_file = resolve(it->second);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Evidence traces
// ---------------------------------------------------------------------------
//
// CSV with header `image_id,step,p_true`: the model's probability on the
// correct class after each glimpse. Every image must contribute exactly
// `steps` rows with p in [0, 1].

struct EvidenceTrace {
  std::string image_id;
  std::vector<double> p_true;  // one entry per step, in step order

  double final_p() const { return p_true.back(); }
};

inline std::vector<EvidenceTrace> load_evidence(const std::string& path, std::size_t steps) {
  if (steps == 0) throw InputError("steps must be >= 1");
  auto in = detail::open_input(path);

  std::string line;
  std::size_t line_no = 0;
  if (!detail::next_content_line(in, line, line_no)) throw InputError(path + ": empty file");
  if (detail::split_csv(line) != std::vector<std::string>{"image_id", "step", "p_true"}) {
    throw InputError(detail::location(path, line_no) + ": expected header 'image_id,step,p_true'");
  }

  struct Row {
    std::string image_id;
    long long step;
    double p;
  };
  std::vector<Row> rows;
  while (detail::next_content_line(in, line, line_no)) {
    const auto fields = detail::split_csv(line);
    const std::string where = detail::location(path, line_no);
    if (fields.size() != 3) throw InputError(where + ": expected 3 fields");
    Row row;
    row.image_id = fields[0];
    if (row.image_id.empty()) throw InputError(where + ": empty image_id");
    row.step = detail::parse_int(fields[1], where + ": step");
    row.p = detail::parse_double(fields[2], where + ": p_true");
    if (row.p < 0.0 || row.p > 1.0) throw InputError(where + ": p_true must be in [0, 1]");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(path + ": no evidence rows");

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.image_id, a.step) < std::tie(b.image_id, b.step);
  });
  std::vector<EvidenceTrace> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (out.empty() || out.back().image_id != rows[i].image_id) {
      out.push_back({rows[i].image_id, {}});
    } else if (rows[i].step == rows[i - 1].step) {
      throw InputError(path + ": duplicate evidence for image '" + rows[i].image_id + "' step " +
                       std::to_string(rows[i].step));
    }
    out.back().p_true.push_back(rows[i].p);
  }
  for (const auto& trace : out) {
    if (trace.p_true.size() != steps) {
      throw InputError(path + ": image '" + trace.image_id + "' has " +
                       std::to_string(trace.p_true.size()) + " evidence entries, expected " +
                       std::to_string(steps));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Calibration file
// ---------------------------------------------------------------------------
//
// Plain text, one `key=value` per line behind a version tag. Doubles are
// written with shortest round-trip formatting, so save followed by load
// reproduces the bounds bit for bit.

struct CalibrationFile {
  CalibrationBounds bounds;
  std::vector<std::pair<std::string, std::string>> config;  // echoed config items
};

inline void save_calibration(const CalibrationBounds& bounds, const GcsConfig& cfg,
                             const std::string& path) {
  auto out = detail::open_output(path);
  out << "gcs-calibration-v1\n";
  out << "dataset_id=" << bounds.dataset_id << '\n';
  out << "n_images=" << bounds.n_images << '\n';
  out << "frame_width=" << bounds.frame.width << '\n';
  out << "frame_height=" << bounds.frame.height << '\n';
  out << "corner=" << to_string(bounds.corner) << '\n';
  out << "fingerprint=" << bounds.fingerprint << '\n';
  for (const auto& [key, value] : config_items(cfg)) {
    out << "config." << key << '=' << value << '\n';
  }
  auto write_bounds = [&out](const char* name, const MetricBounds& b) {
    out << name << ".upper=" << detail::format_double(b.upper) << '\n';
    out << name << ".lower=" << detail::format_double(b.lower) << '\n';
    out << name << ".center=" << detail::format_double(b.center) << '\n';
  };
  write_bounds("dtw", bounds.dtw);
  write_bounds("sm", bounds.sm);
  write_bounds("nss", bounds.nss);
  write_bounds("auc", bounds.auc);
  if (!out) throw InputError("write failed: " + path);
}

inline CalibrationFile load_calibration(const std::string& path) {
  auto in = detail::open_input(path);
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "gcs-calibration-v1") {
    throw InputError(path + ": not a calibration file (missing gcs-calibration-v1 tag)");
  }

  CalibrationFile file;
  std::map<std::string, std::string> kv;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto stripped = detail::trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const std::string where = detail::location(path, line_no);
    const std::size_t eq = stripped.find('=');
    if (eq == std::string_view::npos) throw InputError(where + ": expected key=value");
    const std::string key(detail::trim(stripped.substr(0, eq)));
    const std::string value(detail::trim(stripped.substr(eq + 1)));
    if (key.rfind("config.", 0) == 0) {
      file.config.emplace_back(key.substr(7), value);
      continue;
    }
    if (!kv.emplace(key, value).second) throw InputError(where + ": duplicate key '" + key + "'");
  }

  auto require = [&kv, &path](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw InputError(path + ": missing calibration key '" + key + "'");
    return it->second;
  };

  CalibrationBounds& b = file.bounds;
  b.dataset_id = require("dataset_id");
  const long long n = detail::parse_int(require("n_images"), path + ": n_images");
  if (n < 1) throw InputError(path + ": n_images must be >= 1");
  b.n_images = static_cast<std::size_t>(n);
  b.frame.width = static_cast<int>(detail::parse_int(require("frame_width"), path + ": frame_width"));
  b.frame.height =
      static_cast<int>(detail::parse_int(require("frame_height"), path + ": frame_height"));
  validate(b.frame);
  b.corner = corner_from_string(require("corner"));
  b.fingerprint = require("fingerprint");
  if (b.fingerprint.empty()) throw InputError(path + ": empty fingerprint");

  auto read_bounds = [&require, &path](const std::string& name) {
    MetricBounds mb;
    mb.upper = detail::parse_double(require(name + ".upper"), path + ": " + name + ".upper");
    mb.lower = detail::parse_double(require(name + ".lower"), path + ": " + name + ".lower");
    mb.center = detail::parse_double(require(name + ".center"), path + ": " + name + ".center");
    return mb;
  };
  b.dtw = read_bounds("dtw");
  b.sm = read_bounds("sm");
  b.nss = read_bounds("nss");
  b.auc = read_bounds("auc");

  static const std::vector<std::string> known = {
      "dataset_id", "n_images",  "frame_width", "frame_height", "corner",     "fingerprint",
      "dtw.upper",  "dtw.lower", "dtw.center",  "sm.upper",     "sm.lower",   "sm.center",
      "nss.upper",  "nss.lower", "nss.center",  "auc.upper",    "auc.lower",  "auc.center"};
  for (const auto& [key, value] : kv) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw InputError(path + ": unknown calibration key '" + key + "'");
    }
  }
  return file;
}

}  // namespace gcs
