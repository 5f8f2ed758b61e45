#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "relloc/experiments.hpp"
#include "relloc/keypoints.hpp"
#include "relloc/simulation.hpp"

namespace relloc {

// Schema violation in an input file; line is 1-based (0 when not applicable).
class ParseError : public std::runtime_error {
public:
  ParseError(int line_number, const std::string& message);
  int line() const { return line_; }

private:
  int line_;
};

// Keypoint-set files: one JSON object per line with fields frame_id (string),
// observer (integer), class ("vehicle_center" | "pole" | "planar"), x, y
// (meters, written with 9 decimal digits) and the optional fields frame and
// source_id. See README "File formats".
void write_keypoints(std::ostream& out, const KeypointSet& set);
void write_keypoints_file(const std::filesystem::path& path, const KeypointSet& set);
KeypointSet read_keypoints(std::istream& in);
KeypointSet read_keypoints_file(const std::filesystem::path& path);

// Scene files: a single JSON document with a schema_version field; headings
// in degrees, lengths in meters.
void write_scene(std::ostream& out, const WorldScene& scene);
void write_scene_file(const std::filesystem::path& path, const WorldScene& scene);
WorldScene read_scene(std::istream& in);
WorldScene read_scene_file(const std::filesystem::path& path);

// Results tables: CSV with the column set
//   sigma_xy_m, sigma_r_deg, n_ransac, thr_cons, n_samples, valid_rate,
//   rmse_x_m, rmse_y_m, rmse_norm_m, rmse_r_deg, fps
// Missing RMSEs (no valid samples) are written as "nan". Lines starting with
// '#' are comments. Doubles round-trip exactly.
void write_reports_csv(std::ostream& out, std::span<const ExperimentReport> reports);
std::vector<ExperimentReport> read_reports_csv(std::istream& in);

// Raw per-pair records as JSON lines.
void write_records_jsonl(std::ostream& out, std::span<const ResidualRecord> records);

} // namespace relloc
