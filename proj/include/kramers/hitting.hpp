#pragma once

#include <cstdint>
#include <optional>
#include <stop_token>
#include <utility>
#include <vector>

#include "kramers/dynamics.hpp"
#include "kramers/landscape.hpp"
#include "kramers/stats.hpp"

namespace kramers {

struct EnsembleConfig {
  double epsilon = 0.1;
  double gamma = 1.0;
  std::int64_t n_traj = 1000;
  PhaseState start;
  Ball target;
  std::optional<Ball> avoid;
  IntegratorConfig integrator;
  std::uint64_t base_seed = 0;
  // trajectory i uses stream stream_offset + i
  std::uint64_t stream_offset = 0;

  void validate(int dimension) const;
};

// desk scale default: max(eps, 0.2); the eps-ball is available through the config
double default_target_radius(double epsilon);

struct HittingStats {
  std::int64_t n_completed = 0;
  std::int64_t n_timeout = 0;
  std::int64_t n_cancelled = 0;  // never started because of a stop request
  double mean = 0.0;
  double variance = 0.0;
  double ci95_half_width = 0.0;
  double min = 0.0;
  double max = 0.0;
  double wall_time = 0.0;
  std::uint64_t base_seed = 0;
  std::uint64_t stream_begin = 0;
  std::uint64_t stream_end = 0;  // exclusive
};

struct TrajectoryRecord {
  std::int64_t id = 0;
  double time = 0.0;
  StopReason reason = StopReason::timeout;
};

struct RunOptions {
  int jobs = 1;
  std::vector<TrajectoryRecord>* records = nullptr;
  std::stop_token stop;
};

HittingStats estimate_mean_hitting_time(const EnsembleConfig& cfg, const PotentialModel& model,
                                        const RunOptions& opt = {});

struct CommittorEstimate {
  PhaseState x;
  double h = 0.0;
  double h_star = 0.0;
  std::int64_t n = 0;
  double ci95 = 0.0;
  double h_star_ci95 = 0.0;
  double p_avoid_first = 0.0;
  double timeout_fraction = 0.0;
  bool unreliable = false;  // more than half of the runs timed out
};

// cfg.target is M, cfg.avoid is S
std::vector<CommittorEstimate> estimate_equilibrium_potential(const EnsembleConfig& cfg,
                                                              const PotentialModel& model,
                                                              const std::vector<PhaseState>& points,
                                                              const RunOptions& opt = {});

LinearFit barrier_slope_fit(const std::vector<std::pair<double, HittingStats>>& series);

struct StartProbeResult {
  double radius = 0.0;
  std::vector<PhaseState> starts;  // starts[0] is cfg.start itself
  std::vector<HittingStats> stats;
  double max_relative_spread = 0.0;
};

// Every start reuses the same stream ids, so the spread measures the start dependence and not
// independent Monte Carlo noise.
StartProbeResult start_insensitivity_probe(const EnsembleConfig& cfg, const PotentialModel& model,
                                           double beta, int n_points, std::uint64_t sample_seed,
                                           const RunOptions& opt = {});

struct EnvelopeReport {
  int n_resolvable = 0;
  bool conclusive = false;
  LinearFit fit;
  bool pass = false;  // conclusive and slope >= 0.5
};

EnvelopeReport committor_envelope_check(const std::vector<CommittorEstimate>& estimates,
                                        const LandscapeReport& report, const PotentialModel& model,
                                        double epsilon, int min_failures = 3);

}  // namespace kramers
