// Acceptance suite: end-to-end checks of the whole pipeline against the
// reference behavior, one pass/fail line per criterion. Returns the number
// of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stagekin/dataio.hpp"
#include "stagekin/evaluation.hpp"
#include "stagekin/fitting.hpp"
#include "stagekin/log.hpp"
#include "stagekin/montecarlo.hpp"
#include "stagekin/simulator.hpp"
#include "stagekin/stage_model.hpp"

namespace fs = std::filesystem;
using namespace stagekin;
using dataio::StageConfig;
using geom::Point3;

namespace {

// Noise levels tuned offline with tools/tuning_oracle.cpp (brute-force
// Monte-Carlo search) and frozen here.
//
// kTrackerSigmaMm: with the fixed bias (0.32, -0.09, -0.54) mm, isotropic
// Gaussian noise couples the four accuracy statistics; this value is the
// joint solution that places all of them inside their tolerance windows
// (mean_abs 0.68+-0.02, mean_relative 0.32+-0.03, median_abs 0.67+-0.03,
// per-axis means = bias). Tuning on mean_abs = 0.68 alone would leave
// mean_relative near 0.23, outside its window; see the oracle's sigma
// table.
constexpr double kTrackerSigmaMm = 0.1925;
// kAxisNoiseDeg: perturbation of the estimated geometrical axis giving a
// mean relative angle error of 0.50 deg over the twenty-measurement
// sequence.
constexpr double kAxisNoiseDeg = 0.5163;

const Point3 kBias(0.32, -0.09, -0.54);

struct Criterion {
  bool pass = true;
  std::string detail;
};

struct Harness {
  int failures = 0;
  void run(const std::string& name, const std::function<Criterion()>& fn) {
    Criterion result;
    try {
      result = fn();
    } catch (const std::exception& e) {
      result.pass = false;
      result.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] %s: %s\n", result.pass ? "PASS" : "FAIL", name.c_str(),
                result.detail.c_str());
    std::fflush(stdout);
    if (!result.pass) ++failures;
  }
};

double elapsed_s(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

model::Theta noise_free_theta(const sim::TruthStage& truth) {
  return model::calibrate(
      sim::generate_dataset(truth, sim::standard_acquisition_plan(), sim::NoiseSpec{}));
}

// --------------------------------------------------------------------------
// 1. Round-trip exactness of the calibrated model against the direct path.

Criterion criterion_round_trip() {
  const auto start = std::chrono::steady_clock::now();
  const auto truth = sim::synthesize_stage(sim::StageSpec{});
  const auto theta = noise_free_theta(truth);

  std::mt19937_64 rng(20240101);
  std::uniform_real_distribution<double> lin(-20.0, 20.0);
  std::uniform_real_distribution<double> gon(-25.0, 25.0);
  std::uniform_real_distribution<double> rot(-180.0, 180.0);
  double max_err = 0.0;
  for (int i = 0; i < 100; ++i) {
    const StageConfig cfg{lin(rng), lin(rng), gon(rng), rot(rng)};
    const auto posed = model::forward_kinematics(theta, cfg);
    const auto direct = sim::direct_transform(truth, cfg);
    max_err = std::max(max_err, (posed.z_c - direct.apply(truth.z_c)).norm());
  }
  const double secs = elapsed_s(start);
  Criterion c;
  c.pass = max_err <= 1e-9 && secs < 5.0;
  c.detail = fmt("max |dz_c| = %.3g mm (limit 1e-9), %.2f s (limit 5 s)", max_err, secs);
  return c;
}

// --------------------------------------------------------------------------
// 2. Inter-axis angle recovery, noise-free and at 10 um corner noise.

Criterion criterion_axis_angles() {
  const auto truth = sim::synthesize_stage(sim::reference_stage_spec());
  const auto theta = noise_free_theta(truth);
  const auto clean = eval::consistency_axis_angles(theta);
  double clean_err = 0.0;
  for (int i = 0; i < 3; ++i) {
    clean_err = std::max(clean_err, std::abs(clean[i] - truth.inter_axis_angles_deg[i]));
  }

  const auto errors = mc::run_seeded<std::array<double, 3>>(
      101, 100, mc::Execution::Parallel, [&](int, std::uint64_t seed) {
        sim::NoiseSpec noise;
        noise.corner_sigma_mm = 0.010;
        noise.seed = seed;
        const auto ds = sim::generate_dataset(truth, sim::standard_acquisition_plan(), noise);
        const auto angles = eval::consistency_axis_angles(model::calibrate(ds));
        std::array<double, 3> err;
        for (int i = 0; i < 3; ++i) {
          err[i] = std::abs(angles[i] - truth.inter_axis_angles_deg[i]);
        }
        return err;
      });
  std::array<double, 3> medians{};
  for (int i = 0; i < 3; ++i) {
    std::vector<double> e;
    for (const auto& v : errors) e.push_back(v[i]);
    std::nth_element(e.begin(), e.begin() + 50, e.end());
    medians[i] = e[50];
  }
  const double worst = std::max({medians[0], medians[1], medians[2]});

  Criterion c;
  c.pass = clean_err < 1e-6 && worst <= 0.1;
  c.detail = fmt("noise-free err %.2e deg (limit 1e-6), noisy medians %.3f/%.3f/%.3f deg (limit 0.1)",
                 clean_err, medians[0], medians[1], medians[2]);
  return c;
}

// --------------------------------------------------------------------------
// 3. Corner-reprojection error at one-voxel corner noise.

Criterion criterion_corner_reprojection() {
  const auto truth = sim::synthesize_stage(sim::reference_stage_spec());
  const auto values = mc::run_seeded<double>(
      202, 100, mc::Execution::Parallel, [&](int, std::uint64_t seed) {
        sim::NoiseSpec noise;
        noise.corner_sigma_mm = 0.025;
        noise.seed = seed;
        const auto ds = sim::generate_dataset(truth, sim::standard_acquisition_plan(), noise);
        const auto theta = model::calibrate(ds);
        return eval::consistency_corner_reprojection(theta, ds);
      });
  int in_band = 0;
  double mean = 0.0;
  for (double v : values) {
    if (v > 0.010 && v <= 0.100) ++in_band;
    mean += v;
  }
  mean /= values.size();
  Criterion c;
  c.pass = in_band >= 95;
  c.detail = fmt("%d/100 seeds in (10 um, 100 um], mean %.1f um", in_band, 1e3 * mean);
  return c;
}

// --------------------------------------------------------------------------
// 4. Cornea fit-refit deviation at 25 um surface noise.

Criterion criterion_fit_refit() {
  const auto truth = sim::synthesize_stage(sim::reference_stage_spec());
  const double clean = eval::consistency_fit_refit(
      sim::generate_dataset(truth, sim::standard_acquisition_plan(), sim::NoiseSpec{}));

  const auto values = mc::run_seeded<double>(
      303, 100, mc::Execution::Parallel, [&](int, std::uint64_t seed) {
        sim::NoiseSpec noise;
        noise.surface_sigma_mm = 0.025;
        noise.seed = seed;
        const auto ds = sim::generate_dataset(truth, sim::standard_acquisition_plan(), noise);
        return eval::consistency_fit_refit(ds);
      });
  int in_band = 0;
  double mean = 0.0;
  for (double v : values) {
    if (v > 0.010 && v <= 0.080) ++in_band;
    mean += v;
  }
  mean /= values.size();
  Criterion c;
  c.pass = clean <= 1e-9 && in_band >= 95;
  c.detail = fmt("noise-free %.2g mm (limit 1e-9), %d/100 seeds in (10 um, 80 um], mean %.1f um",
                 clean, in_band, 1e3 * mean);
  return c;
}

// --------------------------------------------------------------------------
// 5. Accuracy-statistics reproduction with biased, tuned tracker noise.

Criterion criterion_results_table() {
  const auto start = std::chrono::steady_clock::now();
  const auto truth = sim::synthesize_stage(sim::reference_stage_spec());
  const auto theta = noise_free_theta(truth);
  const auto configs = sim::reference_evaluation_configs();
  const StageConfig ref = sim::default_referencing_config();

  std::vector<Point3> truths;
  for (const auto& cfg : configs) {
    truths.push_back(model::ground_truth_in_cb(theta, cfg, ref).z_c);
  }

  struct Stats {
    double mean_abs, median_abs, mean_rel;
    Point3 mean_axis;
  };
  const auto stats = mc::run_seeded<Stats>(
      404, 1000, mc::Execution::Parallel, [&](int, std::uint64_t seed) {
        sim::NoiseSpec noise;
        noise.tracker_bias_mm = kBias;
        noise.tracker_sigma_mm = kTrackerSigmaMm;
        noise.seed = seed;
        const auto estimates = sim::simulate_tracker(truth, configs, ref, noise);
        std::vector<Point3> est;
        for (const auto& e : estimates) est.push_back(e.z_c_star);
        const auto report = eval::evaluate_accuracy(est, truths);
        return Stats{report.mean_abs, report.median_abs, report.mean_relative,
                     report.mean_axis};
      });

  double mean_abs = 0.0, median_abs = 0.0, mean_rel = 0.0;
  Point3 mean_axis = Point3::Zero();
  for (const auto& s : stats) {
    mean_abs += s.mean_abs;
    median_abs += s.median_abs;
    mean_rel += s.mean_rel;
    mean_axis += s.mean_axis;
  }
  const double n = static_cast<double>(stats.size());
  mean_abs /= n;
  median_abs /= n;
  mean_rel /= n;
  mean_axis /= n;
  const double secs = elapsed_s(start);

  const bool ok_abs = std::abs(mean_abs - 0.68) <= 0.02;
  const bool ok_rel = std::abs(mean_rel - 0.32) <= 0.03;
  const bool ok_med = std::abs(median_abs - 0.67) <= 0.03;
  const bool ok_axis = (mean_axis - kBias).cwiseAbs().maxCoeff() <= 0.02;

  Criterion c;
  c.pass = ok_abs && ok_rel && ok_med && ok_axis && secs < 30.0;
  c.detail = fmt(
      "mean_abs %.3f (0.68+-0.02), mean_rel %.3f (0.32+-0.03), median %.3f (0.67+-0.03), "
      "axis (%.3f, %.3f, %.3f) (bias+-0.02), %.1f s (limit 30 s)",
      mean_abs, mean_rel, median_abs, mean_axis.x(), mean_axis.y(), mean_axis.z(), secs);
  return c;
}

// --------------------------------------------------------------------------
// 6. Orientation metric: exact zeros and the tuned 0.50 deg reproduction.

Criterion criterion_orientation() {
  const auto truth = sim::synthesize_stage(sim::reference_stage_spec());
  const auto configs = sim::reference_evaluation_configs();
  const StageConfig ref = sim::default_referencing_config();
  std::vector<Point3> truth_axes;
  for (const auto& cfg : configs) {
    truth_axes.push_back(sim::true_state_in_cb(truth, cfg, ref).axis);
  }

  const double zero = eval::evaluate_orientation(truth_axes, truth_axes);

  const Eigen::Matrix3d r =
      Eigen::AngleAxisd(0.9, Point3(0.1, 0.7, -0.7).normalized()).toRotationMatrix();
  std::vector<Point3> rotated;
  for (const auto& a : truth_axes) rotated.push_back(r * a);
  const double rotated_err = eval::evaluate_orientation(rotated, truth_axes);

  const auto values = mc::run_seeded<double>(
      505, 1000, mc::Execution::Parallel, [&](int, std::uint64_t seed) {
        sim::NoiseSpec noise;
        noise.axis_noise_deg = kAxisNoiseDeg;
        noise.seed = seed;
        const auto estimates = sim::simulate_tracker(truth, configs, ref, noise);
        std::vector<Point3> est_axes;
        for (const auto& e : estimates) est_axes.push_back(e.axis_star);
        return eval::evaluate_orientation(est_axes, truth_axes);
      });
  double tuned = 0.0;
  for (double v : values) tuned += v;
  tuned /= values.size();

  Criterion c;
  c.pass = zero == 0.0 && rotated_err <= 1e-9 && std::abs(tuned - 0.50) <= 0.05;
  c.detail = fmt("exact zero %.1g, rotated %.2g deg (limit 1e-9), tuned %.3f deg (0.50+-0.05)",
                 zero, rotated_err, tuned);
  return c;
}

// --------------------------------------------------------------------------
// 7. Randomized property suite, 10k trials per property.

Criterion criterion_property_suite() {
  const int trials = 10000;
  const auto truth = sim::synthesize_stage(sim::reference_stage_spec());
  const auto theta = noise_free_theta(truth);
  const double neutral_sep = (theta.cornea.center - theta.eyeball.center).norm();

  auto count_failures = [&](const char*, auto&& fn) {
    const auto r = mc::run_seeded<int>(606, trials, mc::Execution::Parallel, fn);
    int sum = 0;
    for (int v : r) sum += v;
    return sum;
  };

  const int frame_fail = count_failures("frames", [](int, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    Point3 dir(g(rng), g(rng), g(rng));
    if (dir.norm() < 1e-9) return 0;
    try {
      const auto cs = geom::complete_right_handed_basis(Point3(u(rng), u(rng), u(rng)), dir);
      cs.validate();
    } catch (const Error&) {
      return 1;
    }
    return 0;
  });

  const int reg_fail = count_failures("registration", [](int, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    std::uniform_real_distribution<double> ang(-3.1, 3.1);
    Point3 axis(g(rng), g(rng), g(rng));
    if (axis.norm() < 1e-9) return 0;
    const Eigen::Matrix3d r = Eigen::AngleAxisd(ang(rng), axis.normalized()).toRotationMatrix();
    const Point3 t(u(rng), u(rng), u(rng));
    std::vector<Point3> source, target;
    for (int i = 0; i < 5; ++i) {
      source.push_back(Point3(u(rng), u(rng), u(rng)));
      target.push_back(r * source.back() + t);
    }
    try {
      const auto est = geom::estimate_rigid_transform(source, target);
      if (std::abs(est.rotation().determinant() - 1.0) > 1e-9) return 1;
      for (std::size_t i = 0; i < source.size(); ++i) {
        if ((est.apply(source[i]) - target[i]).norm() > 1e-9) return 1;
      }
    } catch (const DegenerateInput&) {
      return 0;  // nearly-degenerate random draw
    }
    return 0;
  });

  const int fit_fail = count_failures("fits", [](int, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(-40.0, 40.0);
    std::uniform_real_distribution<double> rad(1.0, 20.0);
    const Point3 center(u(rng), u(rng), u(rng));
    const double radius = rad(rng);
    std::vector<Point3> pts;
    for (int i = 0; i < 12; ++i) {
      Point3 dir(g(rng), g(rng), g(rng));
      if (dir.norm() < 1e-9) dir = Point3(1, 0, 0);
      pts.push_back(center + radius * dir.normalized());
    }
    try {
      const auto sphere = fitting::fit_sphere_lsq(pts);
      if ((sphere.center - center).norm() > 1e-9) return 1;
      if (std::abs(sphere.radius - radius) > 1e-9) return 1;
    } catch (const Error&) {
      return 1;
    }

    // Circle through three samples of a random circle.
    Point3 normal(g(rng), g(rng), g(rng));
    if (normal.norm() < 1e-9) normal = Point3(0, 0, 1);
    normal.normalize();
    const auto frame = geom::complete_right_handed_basis(Point3::Zero(), normal);
    const Point3 cu = frame.y_axis();
    const Point3 cv = frame.z_axis();
    std::uniform_real_distribution<double> angle(0.0, 2.0 * geom::kPi);
    const double a0 = angle(rng), a1 = angle(rng), a2 = angle(rng);
    if (std::abs(std::sin(0.5 * (a0 - a1))) < 1e-3 ||
        std::abs(std::sin(0.5 * (a1 - a2))) < 1e-3 ||
        std::abs(std::sin(0.5 * (a0 - a2))) < 1e-3) {
      return 0;  // nearly-coincident sample angles
    }
    auto at = [&](double a) { return Point3(center + radius * (std::cos(a) * cu + std::sin(a) * cv)); };
    try {
      const auto circle = fitting::fit_circle_3pt(at(a0), at(a1), at(a2));
      if ((circle.center - center).norm() > 1e-9 * (1.0 + center.norm())) return 1;
      if (std::abs(circle.radius - radius) > 1e-9 * (1.0 + radius)) return 1;
    } catch (const DegenerateInput&) {
      return 0;
    }
    return 0;
  });

  const int rigid_fail = count_failures("rigidity", [&](int, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> lin(-20.0, 20.0);
    std::uniform_real_distribution<double> gon(-25.0, 25.0);
    std::uniform_real_distribution<double> rot(-180.0, 180.0);
    const StageConfig cfg{lin(rng), lin(rng), gon(rng), rot(rng)};
    const auto posed = model::forward_kinematics(theta, cfg);
    return std::abs((posed.z_c - posed.z_e).norm() - neutral_sep) > 1e-9 ? 1 : 0;
  });

  const int dist_fail = count_failures("axis distance", [&](int, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pick(0.0, 1.0);
    std::uniform_real_distribution<double> gon(-25.0, 25.0);
    std::uniform_real_distribution<double> rot(-180.0, 180.0);
    StageConfig cfg;
    const bool use_gon = pick(rng) < 0.5;
    if (use_gon) {
      cfg.p3_deg = gon(rng);
    } else {
      cfg.p4_deg = rot(rng);
    }
    const auto& frame = use_gon ? theta.cs_gon : theta.cs_rot;
    auto dist = [&](const Point3& p) {
      const Point3 d = p - frame.origin();
      return (d - d.dot(frame.x_axis()) * frame.x_axis()).norm();
    };
    const auto posed = model::forward_kinematics(theta, cfg);
    return std::abs(dist(posed.z_c) - dist(theta.cornea.center)) > 1e-9 ? 1 : 0;
  });

  Criterion c;
  c.pass = frame_fail + reg_fail + fit_fail + rigid_fail + dist_fail == 0;
  c.detail = fmt("failures: frames %d, registration %d, fits %d, rigidity %d, axis-distance %d (10k trials each)",
                 frame_fail, reg_fail, fit_fail, rigid_fail, dist_fail);
  return c;
}

// --------------------------------------------------------------------------
// 8. CLI determinism: byte-identical datasets, field-identical reports.

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Criterion criterion_cli_determinism() {
  const char* cli = STAGEKIN_CLI_PATH;
  const auto base = fs::temp_directory_path() / "stagekin_acceptance";
  fs::remove_all(base);
  fs::create_directories(base);

  auto shell = [&](const std::string& args) {
    const std::string cmd = std::string(cli) + " " + args + " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };

  const auto spec = base / "spec.json";
  {
    std::ofstream out(spec);
    out << R"({"noise": {"corner_sigma_mm": 0.01, "surface_sigma_mm": 0.025,)"
        << R"( "tracker_sigma_mm": 0.19, "tracker_bias_mm": [0.32,-0.09,-0.54],)"
        << R"( "axis_noise_deg": 0.42, "seed": 7}, "tracker": {"configs": "reference20"}})";
  }

  bool pass = true;
  std::string note;
  for (const char* tag : {"a", "b"}) {
    const fs::path dir = base / tag;
    if (shell("simulate --spec " + spec.string() + " --out " + dir.string() + " --seed 7") != 0 ||
        shell("calibrate --dataset " + (dir / "dataset.json").string() + " --out " +
              (dir / "theta.json").string()) != 0 ||
        shell("evaluate --theta " + (dir / "theta.json").string() + " --estimates " +
              (dir / "estimates.json").string() + " --out " + (dir / "rep").string()) != 0) {
      pass = false;
      note = "pipeline command failed";
    }
  }

  if (pass) {
    const bool dataset_identical =
        slurp(base / "a" / "dataset.json") == slurp(base / "b" / "dataset.json");
    const auto report_a = nlohmann::json::parse(slurp(base / "a" / "rep" / "report.json"));
    const auto report_b = nlohmann::json::parse(slurp(base / "b" / "rep" / "report.json"));
    const bool report_identical = report_a == report_b;
    pass = dataset_identical && report_identical;
    note = fmt("dataset bytes %s, report fields %s",
               dataset_identical ? "identical" : "DIFFER",
               report_identical ? "identical" : "DIFFER");
  }

  Criterion c;
  c.pass = pass;
  c.detail = note;
  return c;
}

}  // namespace

int main() {
  stagekin::log::init_from_env();
  Harness h;
  h.run("1. round-trip exactness", criterion_round_trip);
  h.run("2. inter-axis angle recovery", criterion_axis_angles);
  h.run("3. corner-reprojection reproduction", criterion_corner_reprojection);
  h.run("4. fit-refit reproduction", criterion_fit_refit);
  h.run("5. results-table reproduction", criterion_results_table);
  h.run("6. orientation metric", criterion_orientation);
  h.run("7. geometry property suite", criterion_property_suite);
  h.run("8. CLI determinism", criterion_cli_determinism);
  if (h.failures == 0) {
    std::printf("all acceptance criteria passed\n");
  } else {
    std::printf("%d acceptance criteria failed\n", h.failures);
  }
  return h.failures;
}
