#include "relloc/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <thread>

namespace relloc {

Residual residual(const Transform2D& estimated, const Transform2D& truth,
                  double ego_erroneous_heading) {
  const Transform2D e = compose(inverse(estimated), truth);
  const double c = std::cos(ego_erroneous_heading);
  const double s = std::sin(ego_erroneous_heading);
  return {c * e.dx - s * e.dy, s * e.dx + c * e.dy, rad2deg(e.dtheta)};
}

double valid_rate(std::span<const ResidualRecord> records, int thr_cons) {
  if (records.empty()) {
    throw std::invalid_argument("valid_rate: no records");
  }
  std::size_t valid = 0;
  for (const auto& r : records) {
    if (r.n_cons > thr_cons) {
      ++valid;
    }
  }
  return static_cast<double>(valid) / static_cast<double>(records.size());
}

RmseSummary rmse(std::span<const ResidualRecord> records, int thr_cons) {
  RmseSummary out;
  double sx = 0.0, sy = 0.0, snorm = 0.0, sr = 0.0;
  for (const auto& r : records) {
    if (r.n_cons <= thr_cons) {
      continue;
    }
    ++out.n_valid;
    sx += r.e_x * r.e_x;
    sy += r.e_y * r.e_y;
    snorm += r.e_x * r.e_x + r.e_y * r.e_y;
    sr += r.e_r_deg * r.e_r_deg;
  }
  if (out.n_valid == 0) {
    return out;
  }
  const double n = static_cast<double>(out.n_valid);
  out.x = std::sqrt(sx / n);
  out.y = std::sqrt(sy / n);
  out.norm = std::sqrt(snorm / n);
  out.r_deg = std::sqrt(sr / n);
  return out;
}

CorrectionResult correct_sample_pair(const SamplePair& pair, const RansacParams& params) {
  const Transform2D t_rel = erroneous_relative_transform(pair.ego_err, pair.coop_err);
  const KeypointSet coop_in_ego = transform_set(pair.coop_obs, t_rel, "ego");
  return ransac_correct(pair.ego_obs, coop_in_ego, params);
}

namespace {

std::string make_pair_id(std::size_t sigma_cell, std::size_t pair_index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "c%zu_p%zu", sigma_cell, pair_index);
  return buf;
}

// Pairs for one (sigma_xy, sigma_r) cell, deterministic in (master, cell).
std::vector<SamplePair> collect_pairs(const SweepOptions& options, std::size_t sigma_cell,
                                      const ScenarioConfig& scenario) {
  std::vector<SamplePair> pairs;
  for (int w = 0; w < options.max_worlds && pairs.size() < static_cast<std::size_t>(options.pairs_target);
       ++w) {
    const WorldScene world =
        generate_world(options.world, derive_seed(options.master_seed, sigma_cell, w, 0));
    Rng rng(derive_seed(options.master_seed, sigma_cell, w, 1));
    for (auto& pair : make_sample_pairs(world, scenario, rng)) {
      if (pair.shared_anchors >= options.min_shared_anchors) {
        pairs.push_back(std::move(pair));
        if (pairs.size() >= static_cast<std::size_t>(options.pairs_target)) {
          break;
        }
      }
    }
  }
  return pairs;
}

// Runs every n_ransac cell for one sigma cell. The timing loop interleaves
// the cells per pair; a pair's recorded runtime is its fastest correction
// over timing_reps repetitions.
void run_sigma_cell(const SweepOptions& options, const std::vector<SamplePair>& pairs,
                    std::size_t sigma_cell, double sigma_r_deg,
                    std::vector<std::vector<ResidualRecord>>& records_per_n) {
  const std::vector<int>& n_grid = options.grid.n_ransac;
  records_per_n.assign(n_grid.size(), {});
  for (auto& records : records_per_n) {
    records.resize(pairs.size());
  }
  MatchParams match;
  match.epsilon1 = epsilon1_from_noise(match.eta, options.scenario.r_c, sigma_r_deg);
  const int reps = std::max(1, options.timing_reps);

  const auto worker = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      std::vector<double> best_time(n_grid.size(), std::numeric_limits<double>::infinity());
      std::vector<CorrectionResult> results(n_grid.size());
      for (int rep = 0; rep < reps; ++rep) {
        for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
          RansacParams params;
          params.n_ransac = n_grid[ni];
          params.match = match;
          params.rng_seed = derive_seed(options.master_seed, sigma_cell, i, 2);

          const auto t0 = std::chrono::steady_clock::now();
          CorrectionResult result = correct_sample_pair(pairs[i], params);
          const auto t1 = std::chrono::steady_clock::now();
          best_time[ni] =
              std::min(best_time[ni], std::chrono::duration<double>(t1 - t0).count());
          results[ni] = std::move(result);
        }
      }
      for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
        const Residual res =
            residual(results[ni].transform, pairs[i].gt_correction, pairs[i].ego_err.theta);
        records_per_n[ni][i] = {make_pair_id(sigma_cell, i), res.e_x, res.e_y, res.e_r_deg,
                                results[ni].n_cons, best_time[ni]};
      }
    }
  };

  const int threads = std::max(1, options.threads);
  if (threads == 1 || pairs.size() < 2) {
    worker(0, pairs.size());
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (pairs.size() + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const std::size_t begin = std::min(pairs.size(), static_cast<std::size_t>(t) * chunk);
    const std::size_t end = std::min(pairs.size(), begin + chunk);
    if (begin < end) {
      pool.emplace_back(worker, begin, end);
    }
  }
  for (auto& th : pool) {
    th.join();
  }
}

} // namespace

std::vector<ExperimentReport> run_sweep(const SweepOptions& options,
                                        std::vector<ResidualRecord>* raw_records) {
  std::vector<ExperimentReport> reports;
  for (std::size_t si = 0; si < options.grid.sigma_xy.size(); ++si) {
    for (std::size_t ri = 0; ri < options.grid.sigma_r_deg.size(); ++ri) {
      const double sigma_xy = options.grid.sigma_xy[si];
      const double sigma_r = options.grid.sigma_r_deg[ri];
      const std::size_t sigma_cell = si * 1000 + ri;

      ScenarioConfig scenario = options.scenario;
      scenario.pose_noise = PoseNoise(sigma_xy, sigma_r);
      const std::vector<SamplePair> pairs = collect_pairs(options, sigma_cell, scenario);
      if (pairs.empty()) {
        throw std::runtime_error("run_sweep: no sample pairs for sigma cell");
      }

      std::vector<std::vector<ResidualRecord>> records_per_n;
      run_sigma_cell(options, pairs, sigma_cell, sigma_r, records_per_n);

      for (std::size_t ni = 0; ni < options.grid.n_ransac.size(); ++ni) {
        const int n_ransac = options.grid.n_ransac[ni];
        const std::vector<ResidualRecord>& records = records_per_n[ni];

        double total_runtime = 0.0;
        for (const auto& r : records) {
          total_runtime += r.runtime_s;
        }
        const double fps =
            total_runtime > 0.0 ? static_cast<double>(records.size()) / total_runtime : 0.0;

        for (const int thr : options.grid.thr_cons) {
          const RmseSummary summary = rmse(records, thr);
          reports.push_back({sigma_xy, sigma_r, n_ransac, thr, static_cast<int>(records.size()),
                             valid_rate(records, thr), summary.x, summary.y, summary.norm,
                             summary.r_deg, fps});
        }
        if (raw_records != nullptr) {
          for (const auto& r : records) {
            ResidualRecord tagged = r;
            tagged.pair_id = "n" + std::to_string(n_ransac) + "_" + r.pair_id;
            raw_records->push_back(std::move(tagged));
          }
        }
      }
    }
  }
  return reports;
}

} // namespace relloc
