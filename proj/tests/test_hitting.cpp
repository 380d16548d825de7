#include <cmath>
#include <vector>

#include "doctest.h"
#include "kramers/errors.hpp"
#include "kramers/hitting.hpp"
#include "kramers/parallel.hpp"

using namespace kramers;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

EnsembleConfig quick_ensemble() {
  EnsembleConfig c;
  c.epsilon = 0.3;
  c.gamma = 1.0;
  c.n_traj = 64;
  c.start = PhaseState::at_rest(v1(1.0));
  c.target = Ball::around(v1(-1.0), 0.2);
  c.integrator.dt = 2e-3;
  c.integrator.max_time = 500.0;
  c.base_seed = 77;
  return c;
}

}  // namespace

TEST_CASE("running stats against a two pass oracle") {
  const std::vector<double> xs{3.0, -1.0, 4.5, 0.25, 9.0, 2.0, 2.0};
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double var = 0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= xs.size() - 1;
  std::vector<RunningStats> leaves(xs.size());
  RunningStats all;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    leaves[i].add(xs[i]);
    all.add(xs[i]);
  }
  const auto merged = tree_merge(leaves);
  CHECK(merged.mean == doctest::Approx(mean).epsilon(1e-15));
  CHECK(merged.variance() == doctest::Approx(var).epsilon(1e-14));
  CHECK(all.variance() == doctest::Approx(var).epsilon(1e-14));
  CHECK(merged.min == -1.0);
  CHECK(merged.max == 9.0);
}

TEST_CASE("least squares recovers an exact line") {
  const auto f = least_squares({1, 2, 3, 4}, {1.5, 3.5, 5.5, 7.5});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(-0.5));
  CHECK(f.r_squared == doctest::Approx(1.0));
}

TEST_CASE("barrier slope fit on exact Arrhenius data") {
  std::vector<std::pair<double, HittingStats>> series;
  for (double eps : {0.3, 0.25, 0.2}) {
    HittingStats s;
    s.mean = 7.0 * std::exp(0.25 / eps);
    series.push_back({eps, s});
  }
  const auto fit = barrier_slope_fit(series);
  CHECK(fit.slope == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(std::log(7.0)).epsilon(1e-12));
  series.pop_back();
  CHECK_THROWS_AS(barrier_slope_fit(series), InputError);
}

TEST_CASE("default target radius") {
  CHECK(default_target_radius(0.1) == 0.2);
  CHECK(default_target_radius(0.3) == 0.3);
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<int> hits(1000, 0);
  CHECK(parallel_for(1000, 3, [&](std::int64_t i) { ++hits[i]; }) == 1000);
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(100, 2, [](std::int64_t i) {
                    if (i == 37) throw EstimationError("boom");
                  }),
                  EstimationError);
}

TEST_CASE("ensemble mean equals a hand rolled loop over the same streams") {
  const auto m = PotentialModel::quartic_double_well();
  const auto c = quick_ensemble();
  const auto st = estimate_mean_hitting_time(c, m);
  StopRule r;
  r.target = c.target;
  double sum = 0;
  int hits = 0;
  for (int i = 0; i < c.n_traj; ++i) {
    const auto ev = integrate_until(ProcessKind::forward(), m, c.gamma, c.epsilon, c.start, r,
                                    c.integrator, NoiseStream(c.base_seed, i));
    if (ev.reason == StopReason::hit_target) {
      sum += ev.time;
      ++hits;
    }
  }
  CHECK(st.n_completed == hits);
  CHECK(st.mean == doctest::Approx(sum / hits).epsilon(1e-12));
  CHECK(st.stream_begin == 0);
  CHECK(st.stream_end == 64);
}

TEST_CASE("ensemble results do not depend on the worker count") {
  const auto m = PotentialModel::quartic_double_well();
  const auto c = quick_ensemble();
  RunOptions one, four;
  four.jobs = 4;
  std::vector<TrajectoryRecord> ra, rb;
  one.records = &ra;
  four.records = &rb;
  const auto a = estimate_mean_hitting_time(c, m, one);
  const auto b = estimate_mean_hitting_time(c, m, four);
  CHECK(a.mean == b.mean);
  CHECK(a.variance == b.variance);
  REQUIRE(ra.size() == rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i) CHECK(ra[i].time == rb[i].time);
}

TEST_CASE("ensemble input validation") {
  const auto m = PotentialModel::quartic_double_well();
  auto c = quick_ensemble();
  c.start = PhaseState::at_rest(v1(-1.0));
  CHECK_THROWS_AS(estimate_mean_hitting_time(c, m), InputError);
  c = quick_ensemble();
  c.n_traj = 0;
  CHECK_THROWS_AS(estimate_mean_hitting_time(c, m), InputError);
  c = quick_ensemble();
  c.integrator.max_time = 1e-2;
  CHECK_THROWS_AS(estimate_mean_hitting_time(c, m), EstimationError);
}

TEST_CASE("committor boundary values and symmetry") {
  const auto m = PotentialModel::quartic_double_well();
  EnsembleConfig c = quick_ensemble();
  c.n_traj = 400;
  c.target = Ball::around(v1(1.0), 0.2);
  c.avoid = Ball::around(v1(-1.0), 0.2);
  const auto est = estimate_equilibrium_potential(
      c, m, {PhaseState::at_rest(v1(1.0)), PhaseState::at_rest(v1(-1.0)), PhaseState::at_rest(v1(0.0))});
  CHECK(est[0].h == 1.0);
  CHECK(est[1].h == 0.0);
  // the symmetric well makes the saddle a fair coin
  CHECK(std::abs(est[2].h - 0.5) < 0.1);
  CHECK(std::abs(est[2].h_star - 0.5) < 0.1);
  c.avoid.reset();
  CHECK_THROWS_AS(estimate_equilibrium_potential(c, m, {PhaseState::at_rest(v1(0.0))}), InputError);
}

TEST_CASE("committor envelope on synthetic estimates") {
  const auto m = PotentialModel::quartic_double_well();
  const auto rep = build_landscape(m, find_critical_points(m, SearchBox::cube(1, 2.5), 40));
  const double eps = 0.1;
  std::vector<CommittorEstimate> est;
  for (double q : {0.2, 0.4, 0.6}) {
    CommittorEstimate e;
    e.x = PhaseState::at_rest(v1(q));
    e.n = 100000;
    // 1 - h = exp(0.8 (V - V(sigma)) / eps)
    e.h = 1.0 - std::exp(0.8 * (m.energy(v1(q)) - 0.25) / eps);
    est.push_back(e);
  }
  const auto r = committor_envelope_check(est, rep, m, eps);
  CHECK(r.conclusive);
  CHECK(r.fit.slope == doctest::Approx(0.8).epsilon(1e-3));
  CHECK(r.pass);
  est.push_back({});
  est.back().x = PhaseState::at_rest(v1(0.0));
  CHECK_THROWS_AS(committor_envelope_check(est, rep, m, eps), InputError);
}

TEST_CASE("start probe reuses streams") {
  const auto m = PotentialModel::quartic_double_well();
  auto c = quick_ensemble();
  c.n_traj = 32;
  const auto r = start_insensitivity_probe(c, m, 0.75, 2, 5);
  CHECK(r.starts.size() == 3);
  CHECK(r.radius == doctest::Approx(std::pow(0.3, 0.75)));
  for (std::size_t i = 1; i < r.starts.size(); ++i) {
    const double dist = std::hypot(r.starts[i].q[0] - 1.0, r.starts[i].p[0]);
    CHECK(dist <= r.radius);
  }
  // the reference start reproduces the plain ensemble exactly
  CHECK(r.stats[0].mean == estimate_mean_hitting_time(c, m).mean);
  CHECK_THROWS_AS(start_insensitivity_probe(c, m, 0.4, 2, 5), InputError);
}
