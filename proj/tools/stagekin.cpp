// Command-line front end for the testing-stage calibration and eye-tracker
// evaluation pipeline. Subcommands: simulate, calibrate, predict, evaluate,
// consistency. Exit codes: 0 success, 2 usage/parse error, 3 I/O error,
// 4 numerical degeneracy.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "stagekin/checksum.hpp"
#include "stagekin/dataio.hpp"
#include "stagekin/evaluation.hpp"
#include "stagekin/log.hpp"
#include "stagekin/montecarlo.hpp"
#include "stagekin/simulator.hpp"
#include "stagekin/stage_model.hpp"
#include "stagekin/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using stagekin::DegenerateInput;
using stagekin::IoError;
using stagekin::SchemaViolation;
using stagekin::dataio::Dataset;
using stagekin::dataio::StageConfig;
using stagekin::geom::Point3;

namespace {

struct SimSpec {
  stagekin::sim::StageSpec stage;
  stagekin::sim::NoiseSpec noise;
  std::vector<stagekin::sim::PlanRow> plan = stagekin::sim::standard_acquisition_plan();
  stagekin::dataio::Unit emit_unit = stagekin::dataio::Unit::Millimeter;
  std::optional<std::vector<StageConfig>> tracker_configs;
  StageConfig referencing = stagekin::sim::default_referencing_config();
};

StageConfig config_from_json(const json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 4) {
    throw SchemaViolation(context + ": expected four stage settings");
  }
  std::array<double, 4> p{};
  for (int i = 0; i < 4; ++i) p[i] = j.at(i).get<double>();
  StageConfig cfg = StageConfig::from_array(p);
  cfg.validate(context);
  return cfg;
}

SimSpec parse_sim_spec(const json& j) {
  SimSpec spec;
  try {
    if (j.contains("stage")) {
      const auto& s = j["stage"];
      if (s.contains("preset")) {
        const std::string preset = s["preset"].get<std::string>();
        if (preset == "reference") {
          spec.stage = stagekin::sim::reference_stage_spec();
        } else if (preset != "orthogonal") {
          throw SchemaViolation("sim spec: unknown stage preset '" + preset + "'");
        }
      }
      if (s.contains("inter_axis_angles_deg")) {
        for (int i = 0; i < 3; ++i) {
          spec.stage.inter_axis_angles_deg[i] =
              s["inter_axis_angles_deg"].at(i).get<double>();
        }
      }
      spec.stage.cornea_samples = s.value("cornea_samples", spec.stage.cornea_samples);
      spec.stage.eyeball_samples = s.value("eyeball_samples", spec.stage.eyeball_samples);
    }
    if (j.contains("noise")) {
      const auto& n = j["noise"];
      spec.noise.corner_sigma_mm = n.value("corner_sigma_mm", 0.0);
      spec.noise.surface_sigma_mm = n.value("surface_sigma_mm", 0.0);
      spec.noise.tracker_sigma_mm = n.value("tracker_sigma_mm", 0.0);
      spec.noise.axis_noise_deg = n.value("axis_noise_deg", 0.0);
      spec.noise.seed = n.value("seed", 0ULL);
      if (n.contains("tracker_bias_mm")) {
        for (int i = 0; i < 3; ++i) {
          spec.noise.tracker_bias_mm[i] = n["tracker_bias_mm"].at(i).get<double>();
        }
      }
      spec.noise.validate();
    }
    if (j.contains("plan") && !j["plan"].is_string()) {
      spec.plan.clear();
      for (const auto& jr : j["plan"]) {
        stagekin::sim::PlanRow row;
        row.id = jr.at("id").get<int>();
        row.config = config_from_json(jr.at("P"), "plan row " + std::to_string(row.id));
        for (const auto& t : jr.at("types")) row.types.insert(t.get<int>());
        spec.plan.push_back(std::move(row));
      }
    } else if (j.contains("plan") && j["plan"].get<std::string>() != "standard") {
      throw SchemaViolation("sim spec: unknown plan '" + j["plan"].get<std::string>() + "'");
    }
    if (j.contains("unit")) {
      const std::string unit = j["unit"].get<std::string>();
      if (unit == "voxel") {
        spec.emit_unit = stagekin::dataio::Unit::Voxel;
      } else if (unit != "mm") {
        throw SchemaViolation("sim spec: unit must be 'voxel' or 'mm'");
      }
    }
    if (j.contains("tracker")) {
      const auto& t = j["tracker"];
      std::vector<StageConfig> configs = stagekin::sim::reference_evaluation_configs();
      if (t.contains("configs") && !t["configs"].is_string()) {
        configs.clear();
        int i = 0;
        for (const auto& jc : t["configs"]) {
          configs.push_back(config_from_json(jc, "tracker config " + std::to_string(i++)));
        }
      } else if (t.contains("configs") &&
                 t["configs"].get<std::string>() != "reference20") {
        throw SchemaViolation("sim spec: unknown tracker config preset");
      }
      spec.tracker_configs = std::move(configs);
      if (t.contains("referencing_P")) {
        spec.referencing = config_from_json(t["referencing_P"], "referencing_P");
      }
    }
  } catch (const json::exception& e) {
    throw SchemaViolation(std::string("sim spec: malformed field: ") + e.what());
  }
  return spec;
}

SimSpec load_sim_spec(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open spec file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  json j;
  try {
    j = json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw SchemaViolation(std::string("sim spec: JSON parse error: ") + e.what());
  }
  return parse_sim_spec(j);
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const fs::path& path, const std::string& command,
                    std::optional<std::uint64_t> seed,
                    const std::map<std::string, fs::path>& inputs,
                    const std::map<std::string, fs::path>& outputs) {
  json j;
  j["command"] = command;
  j["tool_version"] = stagekin::kVersion;
  j["timestamp"] = iso_timestamp();
  if (seed) j["seed"] = *seed;
  for (const auto& [name, file] : inputs) {
    j["inputs"][name] = {{"path", file.string()}, {"sha256", stagekin::sha256_file(file)}};
  }
  for (const auto& [name, file] : outputs) {
    j["outputs"][name] = {{"path", file.string()}, {"sha256", stagekin::sha256_file(file)}};
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  out << j.dump(2) << "\n";
}

StageConfig config_from_flag(const std::vector<double>& values, const std::string& flag) {
  if (values.size() != 4) {
    throw SchemaViolation(flag + ": expected four comma-separated values");
  }
  StageConfig cfg = StageConfig::from_array({values[0], values[1], values[2], values[3]});
  cfg.validate(flag);
  return cfg;
}

Dataset load_dataset_mm(const fs::path& path) {
  Dataset ds = stagekin::dataio::load_dataset(path);
  if (ds.unit == stagekin::dataio::Unit::Voxel) {
    spdlog::info("dataset is in voxels; converting with {} mm voxels", ds.voxel_size_mm);
    ds = stagekin::dataio::to_millimeters(ds);
  }
  return ds;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const fs::path& spec_path, const fs::path& out_dir,
                 std::optional<std::uint64_t> seed_override,
                 const std::string& command_line) {
  SimSpec spec;
  if (!spec_path.empty()) {
    spec = load_sim_spec(spec_path);
  }
  if (seed_override) spec.noise.seed = *seed_override;

  const auto truth = stagekin::sim::synthesize_stage(spec.stage);
  Dataset ds = stagekin::sim::generate_dataset(truth, spec.plan, spec.noise);
  if (spec.emit_unit == stagekin::dataio::Unit::Voxel) {
    ds = stagekin::dataio::to_voxels(ds);
  }
  std::optional<std::vector<stagekin::sim::TrackerEstimate>> estimates;
  if (spec.tracker_configs) {
    estimates = stagekin::sim::simulate_tracker(truth, *spec.tracker_configs,
                                                spec.referencing, spec.noise);
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir.string());

  const fs::path dataset_path = out_dir / "dataset.json";
  const fs::path truth_path = out_dir / "truth.json";
  stagekin::dataio::save_dataset(ds, dataset_path);
  stagekin::sim::save_truth(truth, truth_path);
  std::map<std::string, fs::path> outputs = {{"dataset", dataset_path},
                                             {"truth", truth_path}};
  if (estimates) {
    const fs::path est_path = out_dir / "estimates.json";
    stagekin::sim::save_estimates(*estimates, spec.referencing, est_path);
    outputs.emplace("estimates", est_path);
  }
  std::map<std::string, fs::path> inputs;
  if (!spec_path.empty()) inputs.emplace("spec", spec_path);
  write_manifest(out_dir / "manifest.json", command_line, spec.noise.seed, inputs, outputs);
  spdlog::info("simulate: wrote {} scans to {}", ds.scans.size(), out_dir.string());
  return 0;
}

// ---------------------------------------------------------------------------
// calibrate

int cmd_calibrate(const fs::path& dataset_path, const fs::path& out_path,
                  const std::vector<double>& ref_p, const std::string& command_line) {
  const Dataset ds = load_dataset_mm(dataset_path);
  stagekin::model::Theta theta = stagekin::model::calibrate(ds);
  theta.dataset_checksum = stagekin::sha256_file(dataset_path);
  if (!ref_p.empty()) {
    theta.referencing_config = config_from_flag(ref_p, "--ref-P");
  }
  stagekin::model::save_theta(theta, out_path);
  write_manifest(fs::path(out_path.string() + ".manifest.json"), command_line,
                 std::nullopt, {{"dataset", dataset_path}}, {{"theta", out_path}});
  const auto angles = stagekin::eval::consistency_axis_angles(theta);
  spdlog::info("calibrate: inter-axis angles {:.4f}/{:.4f}/{:.4f} deg", angles[0],
               angles[1], angles[2]);
  return 0;
}

// ---------------------------------------------------------------------------
// predict

int cmd_predict(const fs::path& theta_path, const std::vector<double>& p,
                const std::vector<double>& ref_p, const std::string& format) {
  const auto theta = stagekin::model::load_theta(theta_path);
  const StageConfig cfg = config_from_flag(p, "--P");
  StageConfig ref;
  if (!ref_p.empty()) {
    ref = config_from_flag(ref_p, "--ref-P");
  } else if (theta.referencing_config) {
    ref = *theta.referencing_config;
  } else {
    throw SchemaViolation("predict: no --ref-P given and none stored in the model");
  }

  const auto gt = stagekin::model::ground_truth_in_cb(theta, cfg, ref);
  if (format == "csv") {
    std::printf("z_c_x,z_c_y,z_c_z,z_e_x,z_e_y,z_e_z,axis_x,axis_y,axis_z\n");
    std::printf("%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                gt.z_c.x(), gt.z_c.y(), gt.z_c.z(), gt.z_e.x(), gt.z_e.y(),
                gt.z_e.z(), gt.geometrical_axis.x(), gt.geometrical_axis.y(),
                gt.geometrical_axis.z());
  } else {
    json j;
    j["P"] = p;
    j["ref_P"] = ref.as_array();
    j["z_c_cb_mm"] = {gt.z_c.x(), gt.z_c.y(), gt.z_c.z()};
    j["z_e_cb_mm"] = {gt.z_e.x(), gt.z_e.y(), gt.z_e.z()};
    j["geometrical_axis"] = {gt.geometrical_axis.x(), gt.geometrical_axis.y(),
                             gt.geometrical_axis.z()};
    std::cout << j.dump(2) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct SeedStats {
  double mean_abs = 0.0;
  double median_abs = 0.0;
  Point3 mean_axis = Point3::Zero();
  Point3 median_axis = Point3::Zero();
  double mean_relative = 0.0;
  double rel_angle = 0.0;
};

int cmd_evaluate(const fs::path& theta_path, const fs::path& estimates_path,
                 const fs::path& truth_path, const fs::path& sim_spec_path,
                 int seeds, bool serial, const fs::path& out_dir,
                 const std::string& command_line) {
  const auto theta = stagekin::model::load_theta(theta_path);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir.string());
  const fs::path report_path = out_dir / "report.json";
  const fs::path xy_path = out_dir / "scatter_xy.csv";
  const fs::path xz_path = out_dir / "scatter_xz.csv";

  if (!estimates_path.empty()) {
    const auto file = stagekin::sim::load_estimates(estimates_path);
    std::vector<Point3> est, truths, est_axes, truth_axes;
    std::vector<StageConfig> configs;
    for (const auto& e : file.estimates) {
      const auto gt = stagekin::model::ground_truth_in_cb(theta, e.config, file.referencing);
      est.push_back(e.z_c_star);
      truths.push_back(gt.z_c);
      est_axes.push_back(e.axis_star);
      truth_axes.push_back(gt.geometrical_axis);
      configs.push_back(e.config);
    }
    auto report = stagekin::eval::evaluate_accuracy(est, truths, configs);
    if (est.size() >= 2) {
      report.mean_rel_angle_deg = stagekin::eval::evaluate_orientation(est_axes, truth_axes);
    }

    json j = json::parse(stagekin::eval::accuracy_report_to_json_string(report));
    j["theta_sha256"] = stagekin::sha256_file(theta_path);
    j["dataset_sha256"] = theta.dataset_checksum;
    std::ofstream out(report_path, std::ios::binary);
    if (!out) throw IoError("cannot write report: " + report_path.string());
    out << j.dump(2) << "\n";
    out.close();
    stagekin::eval::write_scatter_csv(report, xy_path, xz_path);
    write_manifest(out_dir / "manifest.json", command_line, std::nullopt,
                   {{"theta", theta_path}, {"estimates", estimates_path}},
                   {{"report", report_path}, {"scatter_xy", xy_path}, {"scatter_xz", xz_path}});
    spdlog::info("evaluate: mean accuracy {:.4f} mm over {} measurements",
                 report.mean_abs, report.n);
    return 0;
  }

  // Monte-Carlo mode: repeat the simulated tracker experiment over seeds
  // and aggregate the per-seed statistics.
  if (truth_path.empty()) {
    throw SchemaViolation("evaluate: need either --estimates or --truth with --seeds");
  }
  const auto truth = stagekin::sim::load_truth(truth_path);
  SimSpec spec;
  if (!sim_spec_path.empty()) spec = load_sim_spec(sim_spec_path);
  const auto configs = spec.tracker_configs.value_or(stagekin::sim::reference_evaluation_configs());

  std::vector<Point3> truths, truth_axes;
  for (const auto& cfg : configs) {
    const auto gt = stagekin::model::ground_truth_in_cb(theta, cfg, spec.referencing);
    truths.push_back(gt.z_c);
    truth_axes.push_back(gt.geometrical_axis);
  }

  const auto exec = serial ? stagekin::mc::Execution::Serial
                           : stagekin::mc::Execution::Parallel;
  const auto stats = stagekin::mc::run_seeded<SeedStats>(
      spec.noise.seed, seeds, exec, [&](int, std::uint64_t seed) {
        stagekin::sim::NoiseSpec noise = spec.noise;
        noise.seed = seed;
        const auto estimates = stagekin::sim::simulate_tracker(truth, configs,
                                                               spec.referencing, noise);
        std::vector<Point3> est, est_axes;
        for (const auto& e : estimates) {
          est.push_back(e.z_c_star);
          est_axes.push_back(e.axis_star);
        }
        const auto report = stagekin::eval::evaluate_accuracy(est, truths);
        SeedStats s;
        s.mean_abs = report.mean_abs;
        s.median_abs = report.median_abs;
        s.mean_axis = report.mean_axis;
        s.median_axis = report.median_axis;
        s.mean_relative = report.mean_relative;
        s.rel_angle = stagekin::eval::evaluate_orientation(est_axes, truth_axes);
        return s;
      });

  SeedStats agg;
  for (const auto& s : stats) {
    agg.mean_abs += s.mean_abs;
    agg.median_abs += s.median_abs;
    agg.mean_axis += s.mean_axis;
    agg.median_axis += s.median_axis;
    agg.mean_relative += s.mean_relative;
    agg.rel_angle += s.rel_angle;
  }
  const double n = static_cast<double>(seeds);
  json j;
  j["seeds"] = seeds;
  j["measurements_per_seed"] = configs.size();
  j["theta_sha256"] = stagekin::sha256_file(theta_path);
  j["dataset_sha256"] = theta.dataset_checksum;
  j["mean_abs_mm"] = agg.mean_abs / n;
  j["median_abs_mm"] = agg.median_abs / n;
  j["mean_axis_mm"] = {agg.mean_axis.x() / n, agg.mean_axis.y() / n, agg.mean_axis.z() / n};
  j["median_axis_mm"] = {agg.median_axis.x() / n, agg.median_axis.y() / n,
                         agg.median_axis.z() / n};
  j["mean_relative_mm"] = agg.mean_relative / n;
  j["mean_rel_angle_deg"] = agg.rel_angle / n;
  std::ofstream out(report_path, std::ios::binary);
  if (!out) throw IoError("cannot write report: " + report_path.string());
  out << j.dump(2) << "\n";
  out.close();

  std::map<std::string, fs::path> inputs = {{"theta", theta_path}, {"truth", truth_path}};
  if (!sim_spec_path.empty()) inputs.emplace("sim_spec", sim_spec_path);
  write_manifest(out_dir / "manifest.json", command_line, spec.noise.seed, inputs,
                 {{"report", report_path}});
  spdlog::info("evaluate: aggregated {} seeds, mean accuracy {:.4f} mm", seeds,
               agg.mean_abs / n);
  return 0;
}

// ---------------------------------------------------------------------------
// consistency

int cmd_consistency(const fs::path& theta_path, const fs::path& dataset_path,
                    const fs::path& out_path, const std::string& refit_mode) {
  const auto theta = stagekin::model::load_theta(theta_path);
  const Dataset ds = load_dataset_mm(dataset_path);

  stagekin::eval::ConsistencyReport report;
  report.corner_reprojection_mean_mm =
      stagekin::eval::consistency_corner_reprojection(theta, ds);
  report.inter_axis_angles_deg = stagekin::eval::consistency_axis_angles(theta);
  const auto mode = refit_mode == "centroid" ? stagekin::eval::FitRefitMode::Centroid
                                             : stagekin::eval::FitRefitMode::Pairwise;
  report.fit_refit_mean_mm = stagekin::eval::consistency_fit_refit(ds, &theta, mode);

  const std::string text = stagekin::eval::consistency_report_to_json_string(report);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot write report: " + out_path.string());
    out << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  stagekin::log::init_from_env();

  CLI::App app{"Testing-stage kinematic calibration and eye-tracker evaluation"};
  app.set_version_flag("--version", stagekin::kVersion);
  app.require_subcommand(1);

  std::string command_line;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) command_line += " ";
    command_line += argv[i];
  }

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
  std::string sim_spec_file, sim_out;
  std::uint64_t seed_value = 0;
  bool seed_given = false;
  sim->add_option("--spec", sim_spec_file, "Simulation spec JSON");
  sim->add_option("--out", sim_out, "Output directory")->required();
  sim->add_option("--seed", seed_value, "Override the noise seed")
      ->each([&](const std::string&) { seed_given = true; });

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Train the kinematic model");
  std::string cal_dataset, cal_out;
  std::vector<double> cal_ref_p;
  cal->add_option("--dataset", cal_dataset, "Dataset JSON")->required();
  cal->add_option("--out", cal_out, "Output theta JSON")->required();
  cal->add_option("--ref-P", cal_ref_p, "Referencing configuration to store")
      ->delimiter(',')
      ->expected(4);

  // predict
  auto* pre = app.add_subcommand("predict", "Ground-truth eye state for a configuration");
  std::string pre_theta, pre_format = "json";
  std::vector<double> pre_p, pre_ref_p;
  pre->add_option("--theta", pre_theta, "Theta JSON")->required();
  pre->add_option("--P", pre_p, "Stage configuration P1,P2,P3,P4")
      ->delimiter(',')
      ->expected(4)
      ->required();
  pre->add_option("--ref-P", pre_ref_p, "Referencing configuration")
      ->delimiter(',')
      ->expected(4);
  pre->add_option("--format", pre_format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  // evaluate
  auto* eva = app.add_subcommand("evaluate", "Score tracker estimates against ground truth");
  std::string eva_theta, eva_estimates, eva_truth, eva_spec, eva_out;
  int eva_seeds = 0;
  bool eva_serial = false;
  eva->add_option("--theta", eva_theta, "Theta JSON")->required();
  eva->add_option("--estimates", eva_estimates, "Tracker estimates JSON");
  eva->add_option("--truth", eva_truth, "Truth stage JSON (Monte-Carlo mode)");
  eva->add_option("--sim-spec", eva_spec, "Simulation spec JSON (Monte-Carlo mode)");
  eva->add_option("--seeds", eva_seeds, "Monte-Carlo repetitions");
  eva->add_flag("--serial", eva_serial, "Run Monte-Carlo repetitions serially");
  eva->add_option("--out", eva_out, "Output directory")->required();

  // consistency
  auto* con = app.add_subcommand("consistency", "Model integrity checks on a dataset");
  std::string con_theta, con_dataset, con_out, con_mode = "pairwise";
  con->add_option("--theta", con_theta, "Theta JSON")->required();
  con->add_option("--dataset", con_dataset, "Dataset JSON")->required();
  con->add_option("--out", con_out, "Report file (stdout when omitted)");
  con->add_option("--fit-refit-mode", con_mode, "pairwise or centroid")
      ->check(CLI::IsMember({"pairwise", "centroid"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) {
      return cmd_simulate(sim_spec_file, sim_out,
                          seed_given ? std::optional<std::uint64_t>(seed_value)
                                     : std::nullopt,
                          command_line);
    }
    if (cal->parsed()) {
      return cmd_calibrate(cal_dataset, cal_out, cal_ref_p, command_line);
    }
    if (pre->parsed()) {
      return cmd_predict(pre_theta, pre_p, pre_ref_p, pre_format);
    }
    if (eva->parsed()) {
      if (eva_estimates.empty() && eva_seeds <= 0) {
        throw SchemaViolation("evaluate: need --estimates or --truth with --seeds N");
      }
      return cmd_evaluate(eva_theta, eva_estimates, eva_truth, eva_spec, eva_seeds,
                          eva_serial, eva_out, command_line);
    }
    if (con->parsed()) {
      return cmd_consistency(con_theta, con_dataset, con_out, con_mode);
    }
  } catch (const SchemaViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const DegenerateInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const stagekin::ConditioningError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
