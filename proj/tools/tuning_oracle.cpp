// Brute-force Monte-Carlo search for the noise levels used by the
// reproduction scenarios. Run offline; the chosen values are frozen into
// the acceptance suite.
//
//   tuning_oracle sigma   — tracker noise sigma vs accuracy statistics
//   tuning_oracle axis    — axis perturbation vs mean relative angle error
//   tuning_oracle refit   — cornea sample count vs fit-refit deviation
//   tuning_oracle angles  — inter-axis angle recovery error vs corner noise

#include <cstdio>
#include <cstring>
#include <random>
#include <vector>

#include "stagekin/evaluation.hpp"
#include "stagekin/log.hpp"
#include "stagekin/montecarlo.hpp"
#include "stagekin/simulator.hpp"
#include "stagekin/stage_model.hpp"

using stagekin::dataio::StageConfig;
using stagekin::geom::Point3;

namespace {

// Statistics of err = bias + sigma*Z over batches of 20, computed with
// arithmetic independent of the evaluation module.
void scan_sigma() {
  const Point3 bias(0.32, -0.09, -0.54);
  const int batches = 200000;
  const int n = 20;
  std::printf("sigma   mean_abs  mean_rel  median_abs\n");
  for (double sigma = 0.14; sigma <= 0.225; sigma += 0.0025) {
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> g(0.0, sigma);
    double sum_abs = 0.0, sum_rel = 0.0, sum_med = 0.0;
    std::vector<Point3> err(n);
    std::vector<double> norms(n);
    for (int b = 0; b < batches; ++b) {
      Point3 mean = Point3::Zero();
      for (int i = 0; i < n; ++i) {
        err[i] = bias + Point3(g(rng), g(rng), g(rng));
        mean += err[i];
      }
      mean /= n;
      double abs = 0.0, rel = 0.0;
      for (int i = 0; i < n; ++i) {
        norms[i] = err[i].norm();
        abs += norms[i];
        rel += (err[i] - mean).norm();
      }
      std::nth_element(norms.begin(), norms.begin() + 9, norms.end());
      const double m0 = norms[9];
      std::nth_element(norms.begin(), norms.begin() + 10, norms.end());
      sum_abs += abs / n;
      sum_rel += rel / n;
      sum_med += 0.5 * (m0 + norms[10]);
    }
    std::printf("%.4f  %.5f   %.5f   %.5f\n", sigma, sum_abs / batches,
                sum_rel / batches, sum_med / batches);
  }
}

void scan_axis_noise() {
  const auto truth = stagekin::sim::synthesize_stage(stagekin::sim::reference_stage_spec());
  const auto configs = stagekin::sim::reference_evaluation_configs();
  const auto ref = stagekin::sim::default_referencing_config();
  std::vector<Point3> truth_axes;
  for (const auto& cfg : configs) {
    truth_axes.push_back(stagekin::sim::true_state_in_cb(truth, cfg, ref).axis);
  }
  std::printf("axis_noise_deg  mean_rel_angle_deg\n");
  for (double s = 0.30; s <= 0.60; s += 0.01) {
    const int seeds = 4000;
    const auto vals = stagekin::mc::run_seeded<double>(
        777, seeds, stagekin::mc::Execution::Parallel, [&](int, std::uint64_t seed) {
          stagekin::sim::NoiseSpec noise;
          noise.axis_noise_deg = s;
          noise.seed = seed;
          const auto est = stagekin::sim::simulate_tracker(truth, configs, ref, noise);
          std::vector<Point3> est_axes;
          for (const auto& e : est) est_axes.push_back(e.axis_star);
          return stagekin::eval::evaluate_orientation(est_axes, truth_axes);
        });
    double mean = 0.0;
    for (double v : vals) mean += v;
    std::printf("%.3f           %.5f\n", s, mean / seeds);
  }
}

void scan_refit() {
  const auto base_truth = stagekin::sim::synthesize_stage(stagekin::sim::reference_stage_spec());
  std::printf("samples  sigma_um  mean_pairwise_um\n");
  for (int samples : {40, 60, 80, 120, 160, 240}) {
    for (double sigma_um : {10.0, 25.0, 50.0}) {
      stagekin::sim::TruthStage truth = base_truth;
      truth.cornea_samples = samples;
      const int seeds = 150;
      const auto vals = stagekin::mc::run_seeded<double>(
          99, seeds, stagekin::mc::Execution::Parallel, [&](int, std::uint64_t seed) {
            stagekin::sim::NoiseSpec noise;
            noise.surface_sigma_mm = sigma_um * 1e-3;
            noise.seed = seed;
            const auto ds = stagekin::sim::generate_dataset(
                truth, stagekin::sim::standard_acquisition_plan(), noise);
            return stagekin::eval::consistency_fit_refit(ds);
          });
      double mean = 0.0;
      for (double v : vals) mean += v;
      std::printf("%4d     %5.1f     %.2f\n", samples, sigma_um, 1e3 * mean / seeds);
    }
  }
}

void scan_angle_recovery() {
  const auto truth = stagekin::sim::synthesize_stage(stagekin::sim::reference_stage_spec());
  std::printf("corner_sigma_um  median_err_deg (lin1-lin2, lin2-gon, gon-rot)\n");
  for (double sigma_um : {10.0, 25.0}) {
    const int seeds = 200;
    const auto vals = stagekin::mc::run_seeded<std::array<double, 3>>(
        4242, seeds, stagekin::mc::Execution::Parallel, [&](int, std::uint64_t seed) {
          stagekin::sim::NoiseSpec noise;
          noise.corner_sigma_mm = sigma_um * 1e-3;
          noise.seed = seed;
          const auto ds = stagekin::sim::generate_dataset(
              truth, stagekin::sim::standard_acquisition_plan(), noise);
          const auto theta = stagekin::model::calibrate(ds);
          const auto angles = stagekin::eval::consistency_axis_angles(theta);
          std::array<double, 3> err;
          for (int i = 0; i < 3; ++i) {
            err[i] = std::abs(angles[i] - truth.inter_axis_angles_deg[i]);
          }
          return err;
        });
    std::printf("%5.1f           ", sigma_um);
    for (int i = 0; i < 3; ++i) {
      std::vector<double> e;
      for (const auto& v : vals) e.push_back(v[i]);
      std::nth_element(e.begin(), e.begin() + seeds / 2, e.end());
      std::printf(" %.4f", e[seeds / 2]);
    }
    std::printf("\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  stagekin::log::init_from_env();
  if (argc < 2) {
    std::fprintf(stderr, "usage: tuning_oracle sigma|axis|refit|angles\n");
    return 2;
  }
  if (std::strcmp(argv[1], "sigma") == 0) {
    scan_sigma();
  } else if (std::strcmp(argv[1], "axis") == 0) {
    scan_axis_noise();
  } else if (std::strcmp(argv[1], "refit") == 0) {
    scan_refit();
  } else if (std::strcmp(argv[1], "angles") == 0) {
    scan_angle_recovery();
  } else {
    std::fprintf(stderr, "unknown mode '%s'\n", argv[1]);
    return 2;
  }
  return 0;
}
