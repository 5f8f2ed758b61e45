#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relloc/estimation.hpp"
#include "relloc/simulation.hpp"

namespace relloc {

// Residual between an estimated and the ground-truth correction, with the
// translation part expressed in global axes.
struct Residual {
  double e_x = 0.0;     // m
  double e_y = 0.0;     // m
  double e_r_deg = 0.0; // (-180, 180]
};

// E = estimated^-1 o truth; e_r is E's rotation, (e_x, e_y) is E's
// translation rotated by the ego's erroneous heading into global axes.
Residual residual(const Transform2D& estimated, const Transform2D& truth,
                  double ego_erroneous_heading);

struct ResidualRecord {
  std::string pair_id;
  double e_x = 0.0;
  double e_y = 0.0;
  double e_r_deg = 0.0;
  int n_cons = 0;
  double runtime_s = 0.0;
};

// Fraction of records with n_cons strictly above thr_cons. Throws on empty
// input.
double valid_rate(std::span<const ResidualRecord> records, int thr_cons);

struct RmseSummary {
  int n_valid = 0;
  std::optional<double> x;     // m
  std::optional<double> y;     // m
  std::optional<double> norm;  // m, RMSE of sqrt(e_x^2 + e_y^2)
  std::optional<double> r_deg;
};

// Component RMSEs over the records with n_cons > thr_cons. All components
// are nullopt when no record passes the filter.
RmseSummary rmse(std::span<const ResidualRecord> records, int thr_cons);

struct ExperimentReport {
  double sigma_xy = 0.0;
  double sigma_r_deg = 0.0;
  int n_ransac = 0;
  int thr_cons = 0;
  int n_samples = 0;
  double valid_rate = 0.0;
  std::optional<double> rmse_x;
  std::optional<double> rmse_y;
  std::optional<double> rmse_norm;
  std::optional<double> rmse_r_deg;
  double fps = 0.0;

  bool operator==(const ExperimentReport&) const = default;
};

struct SweepGrid {
  std::vector<double> sigma_xy = {0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<double> sigma_r_deg = {2.0, 4.0, 6.0, 8.0, 10.0};
  std::vector<int> n_ransac = {10, 20, 30, 40, 50};
  std::vector<int> thr_cons = {2, 3, 4, 5, 6, 7, 8, 9, 10};
};

struct SweepOptions {
  WorldConfig world;
  ScenarioConfig scenario; // pose_noise is overwritten per grid cell
  SweepGrid grid;
  std::uint64_t master_seed = 1;
  int pairs_target = 100;      // sample pairs per (sigma_xy, sigma_r) cell
  int max_worlds = 400;        // cap on worlds generated while collecting pairs
  int min_shared_anchors = 0;  // pair filter
  int threads = 1;
  int timing_reps = 1;         // per-pair runtime = min over this many repetitions
};

// Maps the cooperative observation into the ego frame with the pose-derived
// relative transform and runs the RANSAC correction.
CorrectionResult correct_sample_pair(const SamplePair& pair, const RansacParams& params);

// One report row per grid cell. Per-pair seeds derive from the master seed
// and the (sigma, pair) indices only, so every cell is reproducible in
// isolation and N_ransac cells see identical scenarios. Results are
// independent of the thread count; only the timing-derived fps field varies
// between runs. Raw per-pair records are appended to *raw_records when given.
std::vector<ExperimentReport> run_sweep(const SweepOptions& options,
                                        std::vector<ResidualRecord>* raw_records = nullptr);

} // namespace relloc
