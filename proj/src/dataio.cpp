#include "stagekin/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

namespace stagekin::dataio {

using nlohmann::json;

double StageConfig::operator[](int i) const {
  switch (i) {
    case 0: return p1_mm;
    case 1: return p2_mm;
    case 2: return p3_deg;
    case 3: return p4_deg;
    default: throw Error("StageConfig: index out of range");
  }
}

bool StageConfig::is_neutral(double eps) const {
  return std::abs(p1_mm) <= eps && std::abs(p2_mm) <= eps &&
         std::abs(p3_deg) <= eps && std::abs(p4_deg) <= eps;
}

void StageConfig::validate(const std::string& context) const {
  const auto p = as_array();
  for (double v : p) {
    if (!std::isfinite(v)) {
      throw SchemaViolation(context + ": non-finite stage setting");
    }
  }
  if (std::abs(p1_mm) > 25.0 || std::abs(p2_mm) > 25.0) {
    throw SchemaViolation(context +
                          ": linear stage setting exceeds 25 mm travel");
  }
  if (std::abs(p3_deg) > 25.0) {
    throw SchemaViolation(context + ": goniometer setting exceeds 25 deg");
  }
  if (std::abs(p4_deg) >= 360.0) {
    throw SchemaViolation(context +
                          ": rotation stage setting must stay below 360 deg");
  }
}

bool operator==(const StageConfig& a, const StageConfig& b) {
  return a.p1_mm == b.p1_mm && a.p2_mm == b.p2_mm && a.p3_deg == b.p3_deg &&
         a.p4_deg == b.p4_deg;
}

std::vector<const ScanRecord*> Dataset::scans_with_tag(int tag) const {
  std::vector<const ScanRecord*> out;
  for (const auto& s : scans) {
    if (s.has_tag(tag)) out.push_back(&s);
  }
  std::sort(out.begin(), out.end(),
            [](const ScanRecord* a, const ScanRecord* b) { return a->id < b->id; });
  return out;
}

namespace {

Point3 parse_point(const json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 3) {
    throw SchemaViolation(context + ": expected an array of three numbers");
  }
  Point3 p;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) {
      throw SchemaViolation(context + ": coordinate is not a number");
    }
    p[i] = j[i].get<double>();
    if (!std::isfinite(p[i])) {
      throw SchemaViolation(context + ": non-finite coordinate");
    }
  }
  return p;
}

json point_to_json(const Point3& p) { return json::array({p.x(), p.y(), p.z()}); }

std::vector<Point3> parse_point_list(const json& j, const std::string& context) {
  if (!j.is_array()) {
    throw SchemaViolation(context + ": expected an array of points");
  }
  std::vector<Point3> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(parse_point(j[i], context + "[" + std::to_string(i) + "]"));
  }
  return out;
}

ScanRecord parse_scan(const json& j, const std::array<double, 4>& dial_offsets) {
  if (!j.contains("id") || !j["id"].is_number_integer()) {
    throw SchemaViolation("scan: missing integer 'id'");
  }
  ScanRecord scan;
  scan.id = j["id"].get<int>();
  const std::string ctx = "scan " + std::to_string(scan.id);

  if (!j.contains("types") || !j["types"].is_array() || j["types"].empty()) {
    throw SchemaViolation(ctx + ": missing non-empty 'types' array");
  }
  for (const auto& t : j["types"]) {
    if (!t.is_number_integer()) {
      throw SchemaViolation(ctx + ": type tag is not an integer");
    }
    const int tag = t.get<int>();
    if (tag < 1 || tag > 5) {
      throw SchemaViolation(ctx + ": type tag out of range 1..5");
    }
    scan.types.insert(tag);
  }

  if (!j.contains("P") || !j["P"].is_array() || j["P"].size() != 4) {
    throw SchemaViolation(ctx + ": missing 'P' array of four settings");
  }
  std::array<double, 4> p{};
  for (int i = 0; i < 4; ++i) {
    if (!j["P"][i].is_number()) {
      throw SchemaViolation(ctx + ": stage setting is not a number");
    }
    p[i] = j["P"][i].get<double>() - dial_offsets[i];
  }
  scan.config = StageConfig::from_array(p);
  scan.config.validate(ctx);

  if (!j.contains("corners") || !j["corners"].is_object()) {
    throw SchemaViolation(ctx + ": missing 'corners' object");
  }
  for (int k = 1; k <= 4; ++k) {
    const std::string key = "c" + std::to_string(k);
    if (!j["corners"].contains(key)) {
      throw SchemaViolation(ctx + ": missing corner " + key);
    }
    scan.corners[k - 1] = parse_point(j["corners"][key], ctx + " corner " + key);
  }

  if (j.contains("cornea_points")) {
    scan.cornea_points = parse_point_list(j["cornea_points"], ctx + " cornea_points");
  }
  if (j.contains("eyeball_points")) {
    scan.eyeball_points = parse_point_list(j["eyeball_points"], ctx + " eyeball_points");
  }

  const bool neutral_type = scan.has_tag(kTagNeutralTrain) || scan.has_tag(kTagNeutralTest);
  const bool has_surface = scan.cornea_points.has_value() || scan.eyeball_points.has_value();
  if (neutral_type && !(scan.cornea_points && scan.eyeball_points)) {
    throw SchemaViolation(ctx + ": neutral-type scan must carry cornea_points and eyeball_points");
  }
  if (!neutral_type && has_surface) {
    throw SchemaViolation(ctx + ": surface samples only allowed on neutral-type scans");
  }
  return scan;
}

}  // namespace

Dataset dataset_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaViolation(std::string("dataset: JSON parse error: ") + e.what());
  }

  Dataset ds;
  if (!j.contains("unit") || !j["unit"].is_string()) {
    throw SchemaViolation("dataset: missing 'unit' field");
  }
  const std::string unit = j["unit"].get<std::string>();
  if (unit == "voxel") {
    ds.unit = Unit::Voxel;
  } else if (unit == "mm") {
    ds.unit = Unit::Millimeter;
  } else {
    throw SchemaViolation("dataset: unit must be 'voxel' or 'mm'");
  }

  if (j.contains("voxel_size_mm")) {
    if (!j["voxel_size_mm"].is_number()) {
      throw SchemaViolation("dataset: voxel_size_mm is not a number");
    }
    ds.voxel_size_mm = j["voxel_size_mm"].get<double>();
    if (!(ds.voxel_size_mm > 0.0) || !std::isfinite(ds.voxel_size_mm)) {
      throw SchemaViolation("dataset: voxel_size_mm must be positive");
    }
  } else {
    spdlog::debug("dataset: voxel_size_mm missing, assuming {} mm", ds.voxel_size_mm);
  }

  if (j.contains("dial_offsets")) {
    const auto& d = j["dial_offsets"];
    if (!d.is_object()) {
      throw SchemaViolation("dataset: dial_offsets must be an object");
    }
    const std::array<std::string, 4> keys = {"P1", "P2", "P3", "P4"};
    for (int i = 0; i < 4; ++i) {
      if (d.contains(keys[i])) {
        if (!d[keys[i]].is_number()) {
          throw SchemaViolation("dataset: dial offset " + keys[i] + " is not a number");
        }
        ds.dial_offsets[i] = d[keys[i]].get<double>();
      }
    }
  }

  if (!j.contains("scans") || !j["scans"].is_array() || j["scans"].empty()) {
    throw SchemaViolation("dataset: missing non-empty 'scans' array");
  }
  std::set<int> seen_ids;
  for (const auto& js : j["scans"]) {
    ScanRecord scan = parse_scan(js, ds.dial_offsets);
    if (!seen_ids.insert(scan.id).second) {
      throw SchemaViolation("dataset: duplicate scan id " + std::to_string(scan.id));
    }
    ds.scans.push_back(std::move(scan));
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open dataset file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return dataset_from_json_string(buffer.str());
}

std::string dataset_to_json_string(const Dataset& ds) {
  json j;
  j["unit"] = ds.unit == Unit::Voxel ? "voxel" : "mm";
  j["voxel_size_mm"] = ds.voxel_size_mm;
  j["dial_offsets"] = {{"P1", ds.dial_offsets[0]},
                       {"P2", ds.dial_offsets[1]},
                       {"P3", ds.dial_offsets[2]},
                       {"P4", ds.dial_offsets[3]}};
  j["scans"] = json::array();
  for (const auto& scan : ds.scans) {
    json js;
    js["id"] = scan.id;
    js["types"] = json(scan.types);
    const auto p = scan.config.as_array();
    js["P"] = json::array();
    for (int i = 0; i < 4; ++i) js["P"].push_back(p[i] + ds.dial_offsets[i]);
    for (int k = 1; k <= 4; ++k) {
      js["corners"]["c" + std::to_string(k)] = point_to_json(scan.corners[k - 1]);
    }
    if (scan.cornea_points) {
      js["cornea_points"] = json::array();
      for (const auto& pt : *scan.cornea_points) js["cornea_points"].push_back(point_to_json(pt));
    }
    if (scan.eyeball_points) {
      js["eyeball_points"] = json::array();
      for (const auto& pt : *scan.eyeball_points) js["eyeball_points"].push_back(point_to_json(pt));
    }
    j["scans"].push_back(std::move(js));
  }
  return j.dump(2) + "\n";
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write dataset file: " + path.string());
  }
  out << dataset_to_json_string(ds);
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

namespace {

Dataset scaled(const Dataset& ds, double factor, Unit new_unit) {
  Dataset out = ds;
  out.unit = new_unit;
  for (auto& scan : out.scans) {
    for (auto& c : scan.corners) c *= factor;
    for (auto* list : {&scan.cornea_points, &scan.eyeball_points}) {
      if (list->has_value()) {
        for (auto& p : **list) p *= factor;
      }
    }
  }
  return out;
}

}  // namespace

Dataset to_millimeters(const Dataset& ds) {
  if (ds.unit == Unit::Millimeter) {
    spdlog::warn("to_millimeters: dataset already in millimeters");
    return ds;
  }
  return scaled(ds, ds.voxel_size_mm, Unit::Millimeter);
}

Dataset to_voxels(const Dataset& ds) {
  if (ds.unit == Unit::Voxel) {
    spdlog::warn("to_voxels: dataset already in voxels");
    return ds;
  }
  return scaled(ds, 1.0 / ds.voxel_size_mm, Unit::Voxel);
}

std::vector<Point3> group_corners(const Dataset& ds, int k, int type_tag) {
  if (k < 1 || k > 4) {
    throw DegenerateInput("group_corners: corner index must be in 1..4");
  }
  if (type_tag < 1 || type_tag > 5) {
    throw DegenerateInput("group_corners: type tag must be in 1..5");
  }
  std::vector<Point3> out;
  for (const auto* scan : ds.scans_with_tag(type_tag)) {
    out.push_back(scan->corners[k - 1]);
  }
  if (out.empty()) {
    throw DegenerateInput("group_corners: no scans tagged " + std::to_string(type_tag));
  }
  return out;
}

}  // namespace stagekin::dataio
