#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "stagekin/dataio.hpp"
#include "stagekin/simulator.hpp"

using namespace stagekin;
using dataio::Dataset;
using geom::Point3;

namespace {

namespace fs = std::filesystem;

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / "stagekin_dataio_test";
  fs::create_directories(dir);
  return dir;
}

Dataset plan_dataset() {
  const auto truth = sim::synthesize_stage(sim::StageSpec{});
  return sim::generate_dataset(truth, sim::standard_acquisition_plan(), sim::NoiseSpec{});
}

// Minimal two-scan dataset as raw JSON, for schema-level tests.
std::string minimal_json(const std::string& scan_patch = "") {
  std::string scans = R"([
    {"id": 1, "types": [1], "P": [0,0,0,0],
     "corners": {"c1": [0,0,0], "c2": [1,0,0], "c3": [1,1,0], "c4": [0,1,0]},
     "cornea_points": [[0,0,1],[0,0.1,1],[0.1,0,1],[0.05,0.05,1.2]],
     "eyeball_points": [[0,0,2],[0,0.1,2],[0.1,0,2],[0.05,0.05,2.2]]},
    {"id": 2, "types": [3], "P": [-7.5,0,0,0],
     "corners": {"c1": [0,0,0], "c2": [1,0,0], "c3": [1,1,0], "c4": [0,1,0]}}
  ])";
  if (!scan_patch.empty()) scans = scan_patch;
  return std::string(R"({"unit": "mm", "voxel_size_mm": 0.025, )") +
         R"("dial_offsets": {"P1": 0, "P2": 0, "P3": 0, "P4": 0}, )" +
         R"("scans": )" + scans + "}";
}

}  // namespace

TEST_CASE("load_dataset accepts a full acquisition-plan dataset") {
  const auto dir = temp_dir();
  const auto path = dir / "ds.json";
  dataio::save_dataset(plan_dataset(), path);
  const Dataset ds = dataio::load_dataset(path);
  CHECK(ds.scans.size() == 15);
  CHECK(ds.unit == dataio::Unit::Millimeter);
  CHECK(ds.scans_with_tag(dataio::kTagNeutralTrain).size() == 3);
  CHECK(ds.scans_with_tag(dataio::kTagNeutralTest).size() == 2);
  int with_surface = 0;
  for (const auto& scan : ds.scans) {
    if (scan.cornea_points) ++with_surface;
  }
  CHECK(with_surface == 5);
}

TEST_CASE("save then load round-trips coordinates bit-exactly") {
  const Dataset ds = plan_dataset();
  const Dataset back = dataio::dataset_from_json_string(dataio::dataset_to_json_string(ds));
  REQUIRE(back.scans.size() == ds.scans.size());
  for (std::size_t s = 0; s < ds.scans.size(); ++s) {
    CHECK(back.scans[s].id == ds.scans[s].id);
    CHECK(back.scans[s].types == ds.scans[s].types);
    for (int k = 0; k < 4; ++k) {
      CHECK(back.scans[s].corners[k] == ds.scans[s].corners[k]);  // bitwise
    }
    REQUIRE(back.scans[s].cornea_points.has_value() ==
            ds.scans[s].cornea_points.has_value());
    if (ds.scans[s].cornea_points) {
      for (std::size_t i = 0; i < ds.scans[s].cornea_points->size(); ++i) {
        CHECK((*back.scans[s].cornea_points)[i] == (*ds.scans[s].cornea_points)[i]);
      }
    }
  }
}

TEST_CASE("load_dataset reports duplicate scan ids") {
  const std::string dup = R"([
    {"id": 8, "types": [4], "P": [0,0,0,0],
     "corners": {"c1": [0,0,0], "c2": [1,0,0], "c3": [1,1,0], "c4": [0,1,0]}},
    {"id": 8, "types": [4], "P": [0,0,0,0],
     "corners": {"c1": [0,0,0], "c2": [1,0,0], "c3": [1,1,0], "c4": [0,1,0]}}
  ])";
  CHECK_THROWS_WITH_AS(dataio::dataset_from_json_string(minimal_json(dup)),
                       doctest::Contains("duplicate scan id 8"), SchemaViolation);
}

TEST_CASE("load_dataset reports a missing corner with scan and corner name") {
  const std::string missing = R"([
    {"id": 8, "types": [4], "P": [0,0,0,0],
     "corners": {"c1": [0,0,0], "c2": [1,0,0], "c4": [0,1,0]}}
  ])";
  CHECK_THROWS_WITH_AS(dataio::dataset_from_json_string(minimal_json(missing)),
                       doctest::Contains("scan 8: missing corner c3"),
                       SchemaViolation);
}

TEST_CASE("load_dataset requires the unit field") {
  CHECK_THROWS_WITH_AS(dataio::dataset_from_json_string(R"({"scans": []})"),
                       doctest::Contains("unit"), SchemaViolation);
}

TEST_CASE("surface samples are only allowed on neutral-type scans") {
  const std::string bad = R"([
    {"id": 1, "types": [3], "P": [0,0,0,0],
     "corners": {"c1": [0,0,0], "c2": [1,0,0], "c3": [1,1,0], "c4": [0,1,0]},
     "cornea_points": [[0,0,1]]}
  ])";
  CHECK_THROWS_AS(dataio::dataset_from_json_string(minimal_json(bad)), SchemaViolation);

  const std::string missing_surface = R"([
    {"id": 1, "types": [1], "P": [0,0,0,0],
     "corners": {"c1": [0,0,0], "c2": [1,0,0], "c3": [1,1,0], "c4": [0,1,0]}}
  ])";
  CHECK_THROWS_AS(dataio::dataset_from_json_string(minimal_json(missing_surface)),
                  SchemaViolation);
}

TEST_CASE("stage settings outside the travel bounds are rejected") {
  const std::string bad = R"([
    {"id": 1, "types": [3], "P": [30,0,0,0],
     "corners": {"c1": [0,0,0], "c2": [1,0,0], "c3": [1,1,0], "c4": [0,1,0]}}
  ])";
  CHECK_THROWS_AS(dataio::dataset_from_json_string(minimal_json(bad)), SchemaViolation);
}

TEST_CASE("dial offsets shift stage settings at load time") {
  std::string text = minimal_json();
  text.replace(text.find(R"("P4": 0)"), 7, R"("P4": 300)");
  // Scan settings in the file are dial readings; stored settings are
  // relative to neutral.
  std::string patched = text;
  patched.replace(patched.find(R"([-7.5,0,0,0])"), 12, R"([-7.5,0,0,307])");
  const Dataset ds = dataio::dataset_from_json_string(patched);
  CHECK(ds.scans[1].config.p4_deg == doctest::Approx(7.0));
  // Saving re-applies the offsets.
  const std::string out = dataio::dataset_to_json_string(ds);
  const Dataset back = dataio::dataset_from_json_string(out);
  CHECK(back.scans[1].config.p4_deg == doctest::Approx(7.0));
}

TEST_CASE("to_millimeters scales coordinates by the voxel size") {
  std::string text = minimal_json();
  text.replace(text.find(R"("unit": "mm")"), 12, R"("unit": "voxel")");
  Dataset ds = dataio::dataset_from_json_string(text);
  ds.scans[0].corners[0] = Point3(1000, 2000, 400);
  const Dataset mm = dataio::to_millimeters(ds);
  CHECK((mm.scans[0].corners[0] - Point3(25, 50, 10)).norm() < 1e-12);
  CHECK(mm.unit == dataio::Unit::Millimeter);

  // Unit voxel size leaves coordinates unchanged.
  ds.voxel_size_mm = 1.0;
  const Dataset same = dataio::to_millimeters(ds);
  CHECK(same.scans[0].corners[0] == Point3(1000, 2000, 400));

  // Converting a millimeter dataset again is the identity (plus a warning).
  const Dataset twice = dataio::to_millimeters(same);
  CHECK(twice.unit == dataio::Unit::Millimeter);
  CHECK(twice.scans[0].corners[0] == same.scans[0].corners[0]);
}

TEST_CASE("voxel conversion round trip is tight") {
  const Dataset ds = plan_dataset();
  const Dataset back = dataio::to_millimeters(dataio::to_voxels(ds));
  for (std::size_t s = 0; s < ds.scans.size(); ++s) {
    for (int k = 0; k < 4; ++k) {
      CHECK((back.scans[s].corners[k] - ds.scans[s].corners[k]).norm() < 1e-12 *
            (1.0 + ds.scans[s].corners[k].norm()));
    }
  }
}

TEST_CASE("group_corners follows the acquisition plan layout") {
  const Dataset ds = plan_dataset();

  const auto g1 = dataio::group_corners(ds, 1, dataio::kTagNeutralTrain);
  CHECK(g1.size() == 3);  // scans 1, 4, 7
  CHECK(g1[0] == ds.scans[0].corners[0]);
  CHECK(g1[1] == ds.scans[3].corners[0]);
  CHECK(g1[2] == ds.scans[6].corners[0]);

  CHECK(dataio::group_corners(ds, 4, dataio::kTagNeutralTest).size() == 2);
  CHECK(dataio::group_corners(ds, 2, dataio::kTagAxisTest).size() == 4);

  // No scans carry a tag only when the dataset is restricted.
  Dataset no_t5 = ds;
  no_t5.scans.erase(std::remove_if(no_t5.scans.begin(), no_t5.scans.end(),
                                   [](const dataio::ScanRecord& s) {
                                     return s.has_tag(dataio::kTagAxisTest);
                                   }),
                    no_t5.scans.end());
  CHECK_THROWS_AS(dataio::group_corners(no_t5, 1, dataio::kTagAxisTest),
                  DegenerateInput);
}

TEST_CASE("load_dataset propagates missing files as IoError") {
  CHECK_THROWS_AS(dataio::load_dataset("/nonexistent/path/ds.json"), IoError);
}
