#include "kramers/hitting.hpp"

#include <chrono>
#include <cmath>
#include <set>

#include "kramers/errors.hpp"
#include "kramers/parallel.hpp"

namespace kramers {

void EnsembleConfig::validate(int dimension) const {
  if (!(epsilon > 0.0)) throw InputError("ensemble epsilon must be positive");
  if (!(gamma > 0.0)) throw InputError("ensemble gamma must be positive");
  if (n_traj < 1) throw InputError("n_traj must be at least 1");
  if (start.q.size() != dimension || start.p.size() != dimension)
    throw InputError("ensemble start dimension mismatch");
  if (target.center.size() != 2 * dimension) throw InputError("target center dimension mismatch");
  if (!(target.radius > 0.0)) throw InputError("target radius must be positive");
  if (avoid) {
    if (avoid->center.size() != 2 * dimension) throw InputError("avoid center dimension mismatch");
    if ((avoid->center - target.center).norm() <= avoid->radius + target.radius)
      throw InputError("target and avoid balls overlap");
  }
  integrator.validate();
}

double default_target_radius(double epsilon) { return std::max(epsilon, 0.2); }

HittingStats estimate_mean_hitting_time(const EnsembleConfig& cfg, const PotentialModel& model,
                                        const RunOptions& opt) {
  cfg.validate(model.dimension());
  if (cfg.target.contains(cfg.start)) throw InputError("start lies inside the target ball");
  const auto t0 = std::chrono::steady_clock::now();
  StopRule rule;
  rule.target = cfg.target;

  const auto n = cfg.n_traj;
  std::vector<RunningStats> leaves(n);
  std::vector<std::int8_t> status(n, -1);  // -1 not run, 0 timeout, 1 hit
  std::vector<TrajectoryRecord> recs(opt.records ? n : 0);
  parallel_for(
      n, opt.jobs,
      [&](std::int64_t i) {
        const NoiseStream rng(cfg.base_seed, cfg.stream_offset + static_cast<std::uint64_t>(i));
        const auto ev = integrate_until(ProcessKind::forward(), model, cfg.gamma, cfg.epsilon,
                                        cfg.start, rule, cfg.integrator, rng);
        const bool hit = ev.reason == StopReason::hit_target;
        if (hit) leaves[i].add(ev.time);
        status[i] = hit ? 1 : 0;
        if (opt.records) recs[i] = {i, ev.time, ev.reason};
      },
      opt.stop);

  HittingStats st;
  for (auto s : status) {
    if (s == 1) ++st.n_completed;
    else if (s == 0) ++st.n_timeout;
    else ++st.n_cancelled;
  }
  if (opt.records) {
    opt.records->clear();
    for (std::int64_t i = 0; i < n; ++i)
      if (status[i] >= 0) opt.records->push_back(recs[i]);
  }
  st.base_seed = cfg.base_seed;
  st.stream_begin = cfg.stream_offset;
  st.stream_end = cfg.stream_offset + static_cast<std::uint64_t>(n);
  st.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (st.n_completed == 0 && st.n_cancelled == 0)
    throw EstimationError("all " + std::to_string(n) + " trajectories timed out at max_time " +
                          std::to_string(cfg.integrator.max_time));
  const RunningStats merged = tree_merge(leaves);
  st.mean = merged.mean;
  st.variance = merged.variance();
  st.ci95_half_width = merged.n > 0 ? 1.96 * std::sqrt(st.variance / merged.n) : 0.0;
  st.min = merged.n > 0 ? merged.min : 0.0;
  st.max = merged.n > 0 ? merged.max : 0.0;
  return st;
}

std::vector<CommittorEstimate> estimate_equilibrium_potential(const EnsembleConfig& cfg,
                                                              const PotentialModel& model,
                                                              const std::vector<PhaseState>& points,
                                                              const RunOptions& opt) {
  cfg.validate(model.dimension());
  if (!cfg.avoid) throw InputError("committor estimation needs an avoid ball");
  StopRule rule;
  rule.target = cfg.target;
  rule.avoid = cfg.avoid;
  const auto n = cfg.n_traj;
  const auto P = static_cast<std::int64_t>(points.size());
  for (const auto& x : points)
    if (x.q.size() != model.dimension() || x.p.size() != model.dimension())
      throw InputError("committor point dimension mismatch");

  // job k: point k / (2n), reversed momentum when (k / n) is odd
  std::vector<std::int8_t> outcome(static_cast<std::size_t>(P * 2 * n), -1);
  parallel_for(
      P * 2 * n, opt.jobs,
      [&](std::int64_t k) {
        const auto j = k / (2 * n);
        const bool flipped = (k / n) % 2 == 1;
        PhaseState x = points[j];
        if (flipped) x.p = -x.p;
        const NoiseStream rng(cfg.base_seed, cfg.stream_offset + static_cast<std::uint64_t>(k));
        const auto ev = integrate_until(ProcessKind::forward(), model, cfg.gamma, cfg.epsilon, x,
                                        rule, cfg.integrator, rng);
        outcome[k] = ev.reason == StopReason::hit_target ? 1
                     : ev.reason == StopReason::hit_avoid ? 2
                                                          : 0;
      },
      opt.stop);

  std::vector<CommittorEstimate> out;
  for (std::int64_t j = 0; j < P; ++j) {
    CommittorEstimate e;
    e.x = points[j];
    e.n = n;
    std::int64_t hit = 0, avoid = 0, timeout = 0, hit_star = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      const auto o = outcome[j * 2 * n + i];
      hit += o == 1;
      avoid += o == 2;
      timeout += o == 0;
      hit_star += outcome[j * 2 * n + n + i] == 1;
    }
    const double dn = static_cast<double>(n);
    e.h = hit / dn;
    e.h_star = hit_star / dn;
    e.p_avoid_first = avoid / dn;
    e.timeout_fraction = timeout / dn;
    e.ci95 = 1.96 * std::sqrt(e.h * (1.0 - e.h) / dn);
    e.h_star_ci95 = 1.96 * std::sqrt(e.h_star * (1.0 - e.h_star) / dn);
    e.unreliable = e.timeout_fraction > 0.5;
    out.push_back(e);
  }
  return out;
}

LinearFit barrier_slope_fit(const std::vector<std::pair<double, HittingStats>>& series) {
  std::set<double> distinct;
  std::vector<double> x, y;
  for (const auto& [eps, st] : series) {
    if (!(eps > 0.0)) throw InputError("epsilon must be positive");
    if (!(st.mean > 0.0)) throw InputError("mean hitting time must be positive for a log fit");
    distinct.insert(eps);
    x.push_back(1.0 / eps);
    y.push_back(std::log(st.mean));
  }
  if (distinct.size() < 3) throw InputError("barrier slope fit needs at least 3 distinct epsilon");
  return least_squares(x, y);
}

StartProbeResult start_insensitivity_probe(const EnsembleConfig& cfg, const PotentialModel& model,
                                           double beta, int n_points, std::uint64_t sample_seed,
                                           const RunOptions& opt) {
  if (!(beta > 0.5 && beta <= 1.0)) throw InputError("beta must lie in (1/2, 1]");
  if (n_points < 1) throw InputError("n_points must be at least 1");
  const int d = model.dimension();
  StartProbeResult res;
  res.radius = std::pow(cfg.epsilon, beta);
  res.starts.push_back(cfg.start);
  // uniform in the 2d dimensional ball: gaussian direction, radius r U^{1/2d}
  const NoiseStream rng(sample_seed, 0);
  std::vector<double> z(2 * d), u(1);
  for (int k = 0; k < n_points; ++k) {
    rng.normals(2 * static_cast<std::uint64_t>(k), z);
    rng.uniforms(2 * static_cast<std::uint64_t>(k) + 1, u);
    Vector dir = Eigen::Map<Vector>(z.data(), 2 * d);
    dir.normalize();
    const Vector offset = res.radius * std::pow(u[0], 1.0 / (2 * d)) * dir;
    res.starts.push_back({cfg.start.q + offset.head(d), cfg.start.p + offset.tail(d)});
  }
  for (const auto& x : res.starts) {
    EnsembleConfig c = cfg;
    c.start = x;
    res.stats.push_back(estimate_mean_hitting_time(c, model, opt));
  }
  for (std::size_t i = 1; i < res.stats.size(); ++i)
    res.max_relative_spread = std::max(res.max_relative_spread,
                                       std::abs(res.stats[i].mean / res.stats[0].mean - 1.0));
  return res;
}

EnvelopeReport committor_envelope_check(const std::vector<CommittorEstimate>& estimates,
                                        const LandscapeReport& report, const PotentialModel& model,
                                        double epsilon, int min_failures) {
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  const double v_sigma = report.saddle.energy;
  std::vector<double> x, y;
  for (const auto& e : estimates) {
    const double v = hamiltonian(model, e.x);
    if (!(v < v_sigma)) throw InputError("committor envelope points must satisfy V < V(sigma, 0)");
    const double failures = std::round((1.0 - e.h) * static_cast<double>(e.n));
    if (failures < min_failures) continue;
    x.push_back((v - v_sigma) / epsilon);
    y.push_back(std::log(1.0 - e.h));
  }
  EnvelopeReport r;
  r.n_resolvable = static_cast<int>(x.size());
  std::set<double> distinct(x.begin(), x.end());
  r.conclusive = r.n_resolvable >= 3 && distinct.size() >= 2;
  if (r.conclusive) {
    r.fit = least_squares(x, y);
    r.pass = r.fit.slope >= 0.5;
  }
  return r;
}

}  // namespace kramers
