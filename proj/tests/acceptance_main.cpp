// Acceptance gate: one self-contained check per release criterion, each
// printing a single PASS/FAIL line. Exits nonzero if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "gcs/gcs.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (ok && !cond) {
      ok = false;
      detail = what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_cli(const std::string& args, const fs::path& log) {
  const char* bin = std::getenv("GCS_CLI_PATH");
  if (bin == nullptr) return -1;
  const std::string cmd = std::string(bin) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "gcs_acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

gcs::GcsConfig config_for(const gcs::Frame& frame) {
  gcs::GcsConfig cfg;
  cfg.metrics.map = gcs::MapConfig::defaults_for(frame);
  cfg.movement = gcs::MovementConfig::defaults_for(frame);
  return cfg;
}

gcs::CalibrationBounds calibrate_with(const std::vector<gcs::Scanpath>& humans,
                                      const gcs::GcsConfig& cfg, unsigned jobs) {
  gcs::CalibrateOptions opts;
  opts.jobs = jobs;
  opts.fingerprint = gcs::config_fingerprint(cfg);
  return gcs::calibrate(humans, cfg.metrics.sm, cfg.metrics.map, opts);
}

gcs::RunManifest manifest_named(const std::string& id, std::size_t steps) {
  gcs::RunManifest m;
  m.run_id = id;
  m.setting = gcs::Setting::fov_only;
  m.patch_size = 7.0;
  m.steps = steps;
  return m;
}

std::vector<gcs::Scanpath> policy_paths(const std::vector<gcs::Scanpath>& humans,
                                        const gcs::Frame& frame, bool center) {
  std::vector<gcs::Scanpath> out;
  out.reserve(humans.size());
  for (const auto& h : humans) {
    auto p = center ? gcs::center_scanpath(frame, h.size())
                    : gcs::corner_scanpath(frame, h.size(), gcs::Corner::TL);
    p.image_id = h.image_id;
    p.source = gcs::Source::model;
    out.push_back(std::move(p));
  }
  return out;
}

// --------------------------------------------------------------------------
// 1. Anchor exactness
// --------------------------------------------------------------------------

Check criterion_anchors() {
  Check c;
  const gcs::Frame frame{128, 128};
  const auto humans = gcs::synth_dataset(40, frame, 6, 0.2, 11);
  const auto cfg = config_for(frame);
  const auto bounds = calibrate_with(humans, cfg, 1);

  c.require(bounds.dtw.upper == 0.0, "identical-human DTW mean is not exactly 0");
  c.require(bounds.sm.upper == 1.0, "identical-human ScanMatch mean is not exactly 1");

  c.require(gcs::normalize_dtw(bounds.dtw.lower, bounds.dtw) == 0.0 &&
                gcs::normalize_dtw(bounds.dtw.upper, bounds.dtw) == 1.0,
            "DTW anchors do not map to exactly 0/1");
  for (const auto* b : {&bounds.sm, &bounds.nss, &bounds.auc}) {
    c.require(gcs::normalize_up(b->lower, *b) == 0.0 && gcs::normalize_up(b->upper, *b) == 1.0,
              "metric anchors do not map to exactly 0/1");
  }

  const auto res = gcs::evaluate_paths(manifest_named("center", 6),
                                       policy_paths(humans, frame, true), humans, bounds, cfg, 1);
  const auto& n = res.summary.normalized;
  c.require(n.dtw.debiased == 0.0 && n.sm.debiased == 0.0 && n.nss.debiased == 0.0 &&
                n.auc.debiased == 0.0,
            "center policy does not debias to exactly 0 on every metric");
  c.require(std::abs(res.summary.gcs - cfg.lambda * res.summary.sim_move) <= 1e-12,
            "GCS(center) differs from lambda*Sim_move by more than 1e-12");
  return c;
}

// --------------------------------------------------------------------------
// 2. Oracle equivalence
// --------------------------------------------------------------------------

Check criterion_oracles() {
  Check c;

  // DTW against the recursive alignment-enumeration oracle.
  {
    std::mt19937_64 rng(2);
    const gcs::Frame frame{4, 4};
    for (int i = 0; i < 1000 && c.ok; ++i) {
      const auto a = testsupport::random_path(rng, frame, 1 + rng() % 5);
      const auto b = testsupport::random_path(rng, frame, 1 + rng() % 5);
      c.require(gcs::dtw_distance(a, b) == oracle::dtw(a, b),
                "DTW mismatch vs oracle at pair " + std::to_string(i));
    }
  }

  // ScanMatch against exhaustive alignment enumeration on every token
  // string of length <= 4 over a 3x3 grid.
  if (c.ok) {
    const auto cfg = gcs::ScanMatchConfig::defaults_for_grid(3, 3);
    const gcs::Frame frame{3, 3};
    std::vector<std::vector<int>> strings;
    std::vector<int> current;
    const auto emit = [&strings, &current](auto&& self, int remaining) -> void {
      if (!current.empty()) strings.push_back(current);
      if (remaining == 0) return;
      for (int t = 0; t < 9; ++t) {
        current.push_back(t);
        self(self, remaining - 1);
        current.pop_back();
      }
    };
    current.clear();
    for (int t = 0; t < 9; ++t) {
      current = {t};
      emit(emit, 3);
    }

    std::vector<gcs::Scanpath> paths(strings.size());
    std::vector<std::vector<int>> tokens(strings.size());
    for (std::size_t i = 0; i < strings.size(); ++i) {
      std::vector<std::pair<double, double>> pts;
      for (const int t : strings[i]) pts.emplace_back(double(t % 3), double(t / 3));
      paths[i] = testsupport::make_path(frame, pts);
      tokens[i] = oracle::scanmatch_tokens(paths[i], cfg);
      c.require(tokens[i] == strings[i], "tokenization disagrees with the intended string");
      if (!c.ok) break;
    }

    const auto table = oracle::scanmatch_table(cfg);
    std::size_t pair_index = 0;
    for (std::size_t i = 0; i < paths.size() && c.ok; ++i) {
      for (std::size_t j = i; j < paths.size() && c.ok; ++j, ++pair_index) {
        const double lib = gcs::scanmatch_score(paths[i], paths[j], cfg);
        const double orc = oracle::scanmatch_on_tokens(tokens[i], tokens[j], table, cfg);
        if (lib != orc) {
          c.require(false, "ScanMatch mismatch vs exhaustive oracle at pair " +
                               std::to_string(i) + "," + std::to_string(j));
        }
        if (pair_index % 1013 == 0 && gcs::scanmatch_score(paths[j], paths[i], cfg) != lib) {
          c.require(false, "ScanMatch asymmetric at pair " + std::to_string(i) + "," +
                               std::to_string(j));
        }
      }
    }
  }

  // AUC against the pairwise-comparison oracle.
  if (c.ok) {
    gcs::MapConfig map_cfg;
    map_cfg.sigma = 2.0;
    map_cfg.downsample = 1;
    const gcs::Frame frame{16, 16};
    std::mt19937_64 rng(3);
    for (int i = 0; i < 100 && c.ok; ++i) {
      const auto model = testsupport::random_path(rng, frame, 1 + rng() % 4);
      const auto human = testsupport::random_path(rng, frame, 1 + rng() % 8);
      const auto map = gcs::build_fixation_map(model, map_cfg);
      c.require(std::abs(gcs::auc_on(map, human) - oracle::auc(map, human)) <= 1e-12,
                "AUC mismatch vs pairwise oracle at map " + std::to_string(i));
    }
  }
  return c;
}

// --------------------------------------------------------------------------
// 3. Center-bias reproduction on the seeded synthetic dataset
// --------------------------------------------------------------------------

Check criterion_center_bias() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();

  const gcs::Frame frame{512, 512};
  const auto humans = gcs::synth_dataset(1000, frame, 12, 0.15, 7);
  const auto cfg = config_for(frame);
  const auto bounds = calibrate_with(humans, cfg, 1);

  c.require(bounds.dtw.upper <= bounds.dtw.center && bounds.dtw.center <= bounds.dtw.lower,
            "raw DTW ordering upper <= center <= lower violated");
  for (const auto* b : {&bounds.sm, &bounds.nss, &bounds.auc}) {
    c.require(b->lower <= b->center && b->center <= b->upper,
              "raw metric ordering lower <= center <= upper violated");
  }

  const auto corner = gcs::evaluate_paths(manifest_named("corner", 12),
                                          policy_paths(humans, frame, false), humans, bounds,
                                          cfg, 1);
  c.require(corner.summary.normalized.dtw.norm == 0.0 &&
                corner.summary.normalized.sm.norm == 0.0 &&
                corner.summary.normalized.nss.norm == 0.0 &&
                corner.summary.normalized.auc.norm == 0.0,
            "corner policy is not exactly 0 after normalization");

  const auto center = gcs::evaluate_paths(manifest_named("center", 12),
                                          policy_paths(humans, frame, true), humans, bounds,
                                          cfg, 1);
  const auto& n = center.summary.normalized;
  c.require(n.dtw.norm > 0.4, "normalized center DTW score not above 0.4");
  c.require(n.sm.norm > 0.25, "normalized center ScanMatch score not above 0.25");
  c.require(n.auc.norm > 0.25, "normalized center AUC score not above 0.25");

  const double elapsed = seconds_since(t0);
  c.require(elapsed < 30.0,
            "single-threaded runtime " + std::to_string(elapsed) + "s exceeds 30s");
  return c;
}

// --------------------------------------------------------------------------
// 4. Published reference bounds reproduce the derived table values
// --------------------------------------------------------------------------

Check criterion_reference_values() {
  Check c;
  const char* dir = std::getenv("GCS_FIXTURE_DIR");
  c.require(dir != nullptr, "GCS_FIXTURE_DIR not set");
  if (!c.ok) return c;

  const auto file = fs::path(dir) / "gaze_cifar10_reference.calibration.txt";
  const auto calib = gcs::load_calibration(file.string());
  const auto& b = calib.bounds;

  const auto near4 = [](double v, double want) { return std::abs(v - want) < 5e-5; };
  c.require(near4(gcs::normalize_dtw(b.dtw.center, b.dtw), 0.6530),
            "normalized center DTW is not 0.6530 to 4 decimals");
  c.require(near4(gcs::normalize_up(b.sm.center, b.sm), 0.2908),
            "normalized center ScanMatch is not 0.2908 to 4 decimals");
  c.require(near4(gcs::normalize_up(b.nss.center, b.nss), 0.1962),
            "normalized center NSS is not 0.1962 to 4 decimals");
  c.require(near4(gcs::normalize_up(b.auc.center, b.auc), 0.2434),
            "normalized center AUC is not 0.2434 to 4 decimals");

  // The dataset adapter ships with the CLI.
  const auto dirp = scratch_dir("reference");
  c.require(run_cli("adapt --help", dirp / "adapt.log") == 0,
            "adapt subcommand missing from the CLI");
  return c;
}

// --------------------------------------------------------------------------
// 5. Movement feature suite
// --------------------------------------------------------------------------

Check criterion_movement() {
  Check c;
  std::mt19937_64 rng(5);

  {
    const gcs::Frame frame{256, 256};
    const auto cfg = gcs::MovementConfig::defaults_for(frame);
    for (int i = 0; i < 100 && c.ok; ++i) {
      const int n = 2 + int(rng() % 11);
      const auto p = testsupport::random_path(rng, frame, n);
      const auto s = gcs::movement_stats(p, frame, cfg);
      c.require(std::abs(s.mean_saccade_amplitude * (n - 1) - s.total_path) <=
                    1e-9 * std::max(1.0, s.total_path),
                "amplitude * saccade count does not recover total path within 1e-9");
    }
  }

  {
    const gcs::Frame frame{32, 32};
    gcs::MovementConfig cfg;
    cfg.coverage_grid = 4;
    cfg.entropy_bins = 4;
    const auto p = testsupport::make_path(frame, {{0, 0}, {10, 0}, {10, 10}, {0, 10}});
    const auto s = gcs::movement_stats(p, frame, cfg);
    c.require(s.total_path == 30.0 && s.mean_saccade_amplitude == 10.0 && s.coverage == 4.0 &&
                  s.collapse_rate == 0.0 && std::abs(s.direction_entropy - std::log(3.0)) < 1e-12,
              "square-loop hand example does not reproduce exact feature values");
  }

  {
    const gcs::Frame frame{256, 256};
    const auto cfg = gcs::MovementConfig::defaults_for(frame);
    const auto a = gcs::movement_stats(testsupport::random_path(rng, frame, 8), frame, cfg);
    c.require(gcs::movement_distance(a, a, cfg.epsilon) == 0.0,
              "movement distance of identical features is not 0");
    auto b = a;
    b.total_path += 1.0;
    c.require(gcs::movement_distance(b, a, cfg.epsilon) > 0.0,
              "movement distance is 0 for unequal features");
    c.require(gcs::movement_similarity(0.0, cfg.tau) == 1.0, "Sim_move(0) is not exactly 1");
  }

  {
    // Doubling all coordinates on the matched frame (2w-1, 2h-1) doubles
    // the center exactly, so every pixel-valued feature doubles bit for
    // bit; angles and collapse classifications are unchanged. Coverage is
    // invariant under the exact frame doubling (2w, 2h).
    const gcs::Frame frame{128, 96};
    const gcs::Frame pixel_frame{2 * frame.width - 1, 2 * frame.height - 1};
    const gcs::Frame cell_frame{2 * frame.width, 2 * frame.height};
    gcs::MovementConfig cfg;
    cfg.collapse_threshold = 1.25;
    gcs::MovementConfig doubled = cfg;
    doubled.collapse_threshold = 2.5;
    for (int i = 0; i < 100 && c.ok; ++i) {
      const auto p = testsupport::random_path(rng, frame, 2 + int(rng() % 9));
      auto q = p;
      for (auto& f : q.fixations) {
        f.x *= 2.0;
        f.y *= 2.0;
      }
      q.frame = pixel_frame;
      const auto s = gcs::movement_stats(p, frame, cfg);
      const auto d = gcs::movement_stats(q, pixel_frame, doubled);
      c.require(d.total_path == 2.0 * s.total_path &&
                    d.mean_saccade_amplitude == 2.0 * s.mean_saccade_amplitude &&
                    d.mean_center_distance == 2.0 * s.mean_center_distance &&
                    d.collapse_rate == s.collapse_rate &&
                    d.direction_entropy == s.direction_entropy,
                "coordinate doubling is not exact at path " + std::to_string(i));
      q.frame = cell_frame;
      c.require(gcs::movement_stats(q, cell_frame, cfg).coverage == s.coverage,
                "coverage not invariant under exact frame doubling at path " + std::to_string(i));
    }
  }
  return c;
}

// --------------------------------------------------------------------------
// 6. Lambda sensitivity fixtures
// --------------------------------------------------------------------------

gcs::RunSummary sensitivity_run(const std::string& id, double mean, double sim) {
  gcs::RunSummary r;
  r.run_id = id;
  r.normalized.dtw.debiased = mean;
  r.normalized.sm.debiased = mean;
  r.normalized.nss.debiased = mean;
  r.normalized.auc.debiased = mean;
  r.sim_move = sim;
  return r;
}

Check criterion_sensitivity() {
  Check c;
  const std::vector<gcs::RunSummary> crossing{
      sensitivity_run("steady", 0.30, 0.2),
      sensitivity_run("mover", 0.25, 0.8),
  };
  const auto rep = gcs::lambda_sensitivity(crossing, {0.0, 0.25});
  c.require(rep.rank_changed, "crossover fixture does not flag a rank change");
  c.require(rep.crossovers.size() == 1, "crossover fixture yields wrong crossover count");
  if (c.ok) {
    c.require(std::abs(rep.crossovers[0].lambda_star - 1.0 / 12.0) <= 1e-6,
              "crossover lambda* not within 1e-6 of 1/12");
  }

  const std::vector<gcs::RunSummary> dominated{
      sensitivity_run("weak", 0.10, 0.1),
      sensitivity_run("strong", 0.30, 0.9),
  };
  const auto rep2 = gcs::lambda_sensitivity(dominated, {0.0, 0.1, 0.25, 0.5});
  c.require(!rep2.rank_changed && rep2.crossovers.empty(),
            "dominance fixture reports a rank change");
  return c;
}

// --------------------------------------------------------------------------
// 7. Determinism and parallelism
// --------------------------------------------------------------------------

Check criterion_determinism() {
  Check c;

  // Byte-identical runs.csv across --jobs at the CLI level.
  const auto dir = scratch_dir("determinism");
  const auto at = [&dir](const std::string& name) { return (dir / name).string(); };
  c.require(std::getenv("GCS_CLI_PATH") != nullptr, "GCS_CLI_PATH not set");
  if (!c.ok) return c;

  c.require(run_cli("synth --out " + at("humans.csv") +
                        " --n 50 --steps 6 --width 128 --height 128 --seed 7",
                    dir / "synth.log") == 0,
            "synth failed");
  if (c.ok) {
    std::ofstream(dir / "run.manifest")
        << "run_id=replay\nsetting=fov_only\npatch_size=7\nsteps=6\nscanpath_file=humans.csv\n";
    c.require(run_cli("calibrate --humans " + at("humans.csv") +
                          " --width 128 --height 128 --out " + at("calibration.txt"),
                      dir / "calibrate.log") == 0,
              "calibrate failed");
  }
  if (c.ok) {
    const std::string base = "eval --calibration " + at("calibration.txt") + " --humans " +
                             at("humans.csv") + " --manifest " + at("run.manifest");
    c.require(run_cli(base + " --jobs 1 --out " + at("runs_j1.csv"), dir / "eval1.log") == 0,
              "eval --jobs 1 failed");
    c.require(run_cli(base + " --jobs 8 --out " + at("runs_j8.csv"), dir / "eval8.log") == 0,
              "eval --jobs 8 failed");
  }
  if (c.ok) {
    c.require(slurp(dir / "runs_j1.csv") == slurp(dir / "runs_j8.csv"),
              "runs.csv differs between --jobs 1 and --jobs 8");
  }

  // Shard-and-recombine equals the single pass within 1e-9.
  if (c.ok) {
    const gcs::Frame frame{128, 128};
    const auto humans = gcs::synth_dataset(30, frame, 6, 0.2, 13);
    auto models = humans;
    for (auto& p : models) {
      for (auto& f : p.fixations) f.x = std::min(f.x + 4.0, frame.width - 1.0);
    }
    const auto cfg = config_for(frame);
    const auto bounds = calibrate_with(humans, cfg, 1);
    const auto full =
        gcs::evaluate_paths(manifest_named("full", 6), models, humans, bounds, cfg, 1);

    auto slice = [](const std::vector<gcs::Scanpath>& v, std::size_t lo, std::size_t hi) {
      return std::vector<gcs::Scanpath>(v.begin() + lo, v.begin() + hi);
    };
    const auto a = gcs::evaluate_paths(manifest_named("a", 6), slice(models, 0, 11),
                                       slice(humans, 0, 11), bounds, cfg, 1);
    const auto b = gcs::evaluate_paths(manifest_named("b", 6), slice(models, 11, 30),
                                       slice(humans, 11, 30), bounds, cfg, 1);
    const double na = double(a.summary.n_pairs), nb = double(b.summary.n_pairs);
    auto mix = [&](double x, double y) { return (na * x + nb * y) / (na + nb); };

    gcs::MetricBundle raw;
    raw.dtw = mix(a.summary.raw.dtw, b.summary.raw.dtw);
    raw.sm = mix(a.summary.raw.sm, b.summary.raw.sm);
    raw.nss = mix(a.summary.raw.nss, b.summary.raw.nss);
    raw.auc = mix(a.summary.raw.auc, b.summary.raw.auc);
    auto mix_move = [&](const gcs::MovementStats& x, const gcs::MovementStats& y) {
      gcs::MovementStats m;
      m.total_path = mix(x.total_path, y.total_path);
      m.mean_saccade_amplitude = mix(x.mean_saccade_amplitude, y.mean_saccade_amplitude);
      m.mean_center_distance = mix(x.mean_center_distance, y.mean_center_distance);
      m.coverage = mix(x.coverage, y.coverage);
      m.direction_entropy = mix(x.direction_entropy, y.direction_entropy);
      m.collapse_rate = mix(x.collapse_rate, y.collapse_rate);
      return m;
    };
    const auto normalized = gcs::normalize_bundle(raw, bounds);
    const double dist =
        gcs::movement_distance(mix_move(a.summary.model_move, b.summary.model_move),
                               mix_move(a.summary.human_move, b.summary.human_move),
                               cfg.movement.epsilon);
    const double score =
        gcs::gcs_score(normalized, gcs::movement_similarity(dist, cfg.movement.tau), cfg.lambda);
    c.require(std::abs(score - full.summary.gcs) <= 1e-9,
              "recombined shard GCS differs from the single pass by more than 1e-9");
  }
  return c;
}

// --------------------------------------------------------------------------
// 8. Throughput
// --------------------------------------------------------------------------

Check criterion_throughput() {
  Check c;
  const gcs::Frame frame{512, 512};
  const auto humans = gcs::synth_dataset(10000, frame, 12, 0.15, 7);
  auto models = humans;
  for (auto& p : models) {
    p.source = gcs::Source::model;
    for (auto& f : p.fixations) {
      f.x = std::min(f.x + 6.0, frame.width - 1.0);
      f.y = std::min(f.y + 2.0, frame.height - 1.0);
    }
  }
  const auto cfg = config_for(frame);

  const auto t0 = std::chrono::steady_clock::now();
  const auto bounds = calibrate_with(humans, cfg, 1);
  const auto res = gcs::evaluate_paths(manifest_named("sweep", 12), models, humans, bounds,
                                       cfg, 1);
  const double elapsed = seconds_since(t0);

  c.require(res.summary.n_pairs == 10000, "expected 10000 evaluated pairs");
  c.require(elapsed < 10.0,
            "calibrate+eval of 10000 pairs took " + std::to_string(elapsed) + "s (>= 10s)");
  return c;
}

}  // namespace

int main() {
  int failures = 0;
  const auto report = [&failures](int number, const char* name, Check (*fn)()) {
    Check c;
    try {
      c = fn();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    if (c.ok) {
      std::printf("criterion %d (%s): PASS\n", number, name);
    } else {
      std::printf("criterion %d (%s): FAIL (%s)\n", number, name, c.detail.c_str());
      ++failures;
    }
    std::fflush(stdout);
  };

  report(1, "anchor exactness", criterion_anchors);
  report(2, "metric oracle equivalence", criterion_oracles);
  report(3, "synthetic center-bias reproduction", criterion_center_bias);
  report(4, "reference calibration values", criterion_reference_values);
  report(5, "movement feature suite", criterion_movement);
  report(6, "lambda sensitivity", criterion_sensitivity);
  report(7, "determinism and parallelism", criterion_determinism);
  report(8, "throughput", criterion_throughput);
  return failures == 0 ? 0 : 1;
}
