#include "relloc/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace relloc {

using nlohmann::json;

namespace {

std::string format_double(double v, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

// Shortest exact decimal representation (17 significant digits round-trip).
std::string exact_double(double v) {
  return format_double(v, "%.17g");
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open for reading: " + path.string());
  }
  return in;
}

} // namespace

ParseError::ParseError(int line_number, const std::string& message)
    : std::runtime_error(line_number > 0 ? "line " + std::to_string(line_number) + ": " + message
                                         : message),
      line_(line_number) {}

void write_keypoints(std::ostream& out, const KeypointSet& set) {
  for (const auto& p : set.points) {
    json record;
    record["frame_id"] = set.frame_id;
    record["observer"] = set.observer;
    record["frame"] = set.frame;
    record["class"] = std::string(class_name(p.cls));
    if (p.source_id != kNoSourceId) {
      record["source_id"] = p.source_id;
    }
    // x/y injected as raw tokens to pin the >= 6-decimal-digit contract
    std::string line = record.dump();
    line.pop_back(); // trailing '}'
    line += ",\"x\":" + format_double(p.position.x(), "%.9f") +
            ",\"y\":" + format_double(p.position.y(), "%.9f") + "}";
    out << line << '\n';
  }
}

void write_keypoints_file(const std::filesystem::path& path, const KeypointSet& set) {
  auto out = open_output(path);
  write_keypoints(out, set);
}

KeypointSet read_keypoints(std::istream& in) {
  KeypointSet set;
  std::string line;
  int line_number = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) {
      continue;
    }
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_number, std::string("invalid JSON: ") + e.what());
    }
    for (const char* field : {"frame_id", "observer", "class", "x", "y"}) {
      if (!record.contains(field)) {
        throw ParseError(line_number, std::string("missing field '") + field + "'");
      }
    }
    if (!record["x"].is_number() || !record["y"].is_number()) {
      throw ParseError(line_number, "x and y must be numbers");
    }
    if (!record["class"].is_string()) {
      throw ParseError(line_number, "class must be a string");
    }
    const auto cls = class_from_name(record["class"].get<std::string>());
    if (!cls) {
      throw ParseError(line_number, "unknown class '" + record["class"].get<std::string>() + "'");
    }
    std::string frame_id;
    std::string frame;
    int observer = -1;
    std::int64_t source_id = kNoSourceId;
    try {
      frame_id = record["frame_id"].get<std::string>();
      observer = record["observer"].get<int>();
      frame = record.value("frame", "");
      source_id = record.value("source_id", kNoSourceId);
    } catch (const json::exception& e) {
      throw ParseError(line_number, std::string("bad field type: ") + e.what());
    }
    if (first) {
      set.frame_id = frame_id;
      set.observer = observer;
      set.frame = frame;
      first = false;
    } else if (frame_id != set.frame_id || observer != set.observer || frame != set.frame) {
      throw ParseError(line_number, "frame_id/observer/frame differ from the first record");
    }
    LabeledPoint p;
    p.position = {record["x"].get<double>(), record["y"].get<double>()};
    p.cls = *cls;
    p.source_id = source_id;
    set.points.push_back(p);
  }
  return set;
}

KeypointSet read_keypoints_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_keypoints(in);
}

void write_scene(std::ostream& out, const WorldScene& scene) {
  json doc;
  doc["schema_version"] = 1;
  doc["extent_m"] = scene.extent;
  doc["vehicles_requested"] = scene.vehicles_requested;
  doc["vehicles"] = json::array();
  for (const auto& v : scene.vehicles) {
    doc["vehicles"].push_back({{"id", v.id},
                               {"x", v.pose.x},
                               {"y", v.pose.y},
                               {"heading_deg", rad2deg(v.pose.theta)},
                               {"length_m", v.length},
                               {"width_m", v.width}});
  }
  doc["poles"] = json::array();
  for (const auto& p : scene.poles) {
    doc["poles"].push_back({{"x", p.x()}, {"y", p.y()}});
  }
  doc["facades"] = json::array();
  for (const auto& f : scene.facades) {
    doc["facades"].push_back({{"x1", f.p1.x()},
                              {"y1", f.p1.y()},
                              {"x2", f.p2.x()},
                              {"y2", f.p2.y()},
                              {"point_spacing_m", f.point_spacing}});
  }
  out << doc.dump(2) << '\n';
}

void write_scene_file(const std::filesystem::path& path, const WorldScene& scene) {
  auto out = open_output(path);
  write_scene(out, scene);
}

WorldScene read_scene(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(0, std::string("invalid scene JSON: ") + e.what());
  }
  if (!doc.contains("schema_version") || doc["schema_version"].get<int>() != 1) {
    throw ParseError(0, "unsupported scene schema_version");
  }
  WorldScene scene;
  scene.extent = doc.value("extent_m", 120.0);
  scene.vehicles_requested = doc.value("vehicles_requested", 0);
  for (const auto& v : doc.value("vehicles", json::array())) {
    scene.vehicles.push_back({v.at("id").get<int>(),
                              Pose2D(v.at("x").get<double>(), v.at("y").get<double>(),
                                     deg2rad(v.at("heading_deg").get<double>())),
                              v.value("length_m", 4.5), v.value("width_m", 2.0)});
  }
  for (const auto& p : doc.value("poles", json::array())) {
    scene.poles.push_back({p.at("x").get<double>(), p.at("y").get<double>()});
  }
  for (const auto& f : doc.value("facades", json::array())) {
    scene.facades.push_back({{f.at("x1").get<double>(), f.at("y1").get<double>()},
                             {f.at("x2").get<double>(), f.at("y2").get<double>()},
                             f.value("point_spacing_m", 0.5)});
  }
  return scene;
}

WorldScene read_scene_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_scene(in);
}

namespace {

std::string optional_cell(const std::optional<double>& v) {
  return v ? exact_double(*v) : "nan";
}

std::optional<double> parse_optional_cell(const std::string& cell, int line_number) {
  if (cell == "nan") {
    return std::nullopt;
  }
  try {
    return std::stod(cell);
  } catch (const std::exception&) {
    throw ParseError(line_number, "invalid number '" + cell + "'");
  }
}

constexpr const char* kReportHeader =
    "sigma_xy_m,sigma_r_deg,n_ransac,thr_cons,n_samples,valid_rate,"
    "rmse_x_m,rmse_y_m,rmse_norm_m,rmse_r_deg,fps";

} // namespace

void write_reports_csv(std::ostream& out, std::span<const ExperimentReport> reports) {
  out << "# fps mode: pairs divided by the summed per-pair correction wall times"
         " (per pair: minimum over the configured timing repetitions)\n";
  out << kReportHeader << '\n';
  for (const auto& r : reports) {
    out << exact_double(r.sigma_xy) << ',' << exact_double(r.sigma_r_deg) << ',' << r.n_ransac
        << ',' << r.thr_cons << ',' << r.n_samples << ',' << exact_double(r.valid_rate) << ','
        << optional_cell(r.rmse_x) << ',' << optional_cell(r.rmse_y) << ','
        << optional_cell(r.rmse_norm) << ',' << optional_cell(r.rmse_r_deg) << ','
        << exact_double(r.fps) << '\n';
  }
}

std::vector<ExperimentReport> read_reports_csv(std::istream& in) {
  std::vector<ExperimentReport> reports;
  std::string line;
  int line_number = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty() || line[0] == '#') {
      continue;
    }
    if (!header_seen) {
      if (line != kReportHeader) {
        throw ParseError(line_number, "unexpected results header");
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cells.push_back(cell);
    }
    if (cells.size() != 11) {
      throw ParseError(line_number, "expected 11 columns");
    }
    const auto number = [&](const std::string& c) {
      const auto v = parse_optional_cell(c, line_number);
      if (!v) {
        throw ParseError(line_number, "unexpected nan");
      }
      return *v;
    };
    ExperimentReport r;
    r.sigma_xy = number(cells[0]);
    r.sigma_r_deg = number(cells[1]);
    r.n_ransac = static_cast<int>(number(cells[2]));
    r.thr_cons = static_cast<int>(number(cells[3]));
    r.n_samples = static_cast<int>(number(cells[4]));
    r.valid_rate = number(cells[5]);
    r.rmse_x = parse_optional_cell(cells[6], line_number);
    r.rmse_y = parse_optional_cell(cells[7], line_number);
    r.rmse_norm = parse_optional_cell(cells[8], line_number);
    r.rmse_r_deg = parse_optional_cell(cells[9], line_number);
    r.fps = number(cells[10]);
    reports.push_back(r);
  }
  return reports;
}

void write_records_jsonl(std::ostream& out, std::span<const ResidualRecord> records) {
  for (const auto& r : records) {
    json record;
    record["pair_id"] = r.pair_id;
    record["e_x_m"] = r.e_x;
    record["e_y_m"] = r.e_y;
    record["e_r_deg"] = r.e_r_deg;
    record["n_cons"] = r.n_cons;
    record["runtime_s"] = r.runtime_s;
    out << record.dump() << '\n';
  }
}

} // namespace relloc
