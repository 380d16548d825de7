// Acceptance run for the quartic double well and its controls. One PASS/FAIL line per
// criterion. Thresholds live here and nowhere else.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kramers/verification.hpp"

using namespace kramers;

namespace {

// Criteria that cannot be met with the pinned box size; they still run and still print FAIL.
const std::set<int> kKnownUnattainable{4, 6};

struct Criterion {
  int id;
  std::string title;
  double budget_seconds;  // reported, not asserted: wall time depends on the host
  std::function<bool(std::ostream&)> body;
};

ModelContext quartic_context() { return analyze_model(PotentialModel::quartic_double_well(), 1.0); }

// random symmetric Hessian with exactly one negative eigenvalue
Matrix random_saddle_hessian(int d, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> neg(0.2, 3.0), pos(0.2, 3.0);
  Matrix A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = normal(gen);
  const Matrix Q = Eigen::HouseholderQR<Matrix>(A).householderQ();
  Vector ev(d);
  ev[0] = -neg(gen);
  for (int i = 1; i < d; ++i) ev[i] = pos(gen);
  return Q * ev.asDiagonal() * Q.transpose();
}

bool criterion_spectral(std::ostream& out) {
  const auto ctx = quartic_context();
  bool ok = std::abs(ctx.report.lambda_sigma - 1.0) < 1e-12;
  const double mu_exact = (std::sqrt(5.0) - 1.0) / 2.0;
  ok = ok && std::abs(ctx.frame.mu - mu_exact) < 1e-12;
  out << "lambda_sigma " << ctx.report.lambda_sigma << " mu " << ctx.frame.mu << "; ";
  ok = frame_identity_check(ctx.frame, 1e-12, 1e-10, 1e-10, 1e-9, out) && ok;
  std::mt19937_64 gen(20240601);
  std::uniform_real_distribution<double> gam(0.2, 5.0);
  int good = 0;
  for (int k = 0; k < 10; ++k) {
    const int d = 2 + k % 2;
    const Matrix H = random_saddle_hessian(d, gen);
    const auto frame = build_saddle_frame(H, gam(gen), Vector::Zero(d));
    std::ostringstream sink;
    if (frame_identity_check(frame, 1e-12, 1e-10, 1e-10, 1e-9, sink)) ++good;
    else out << "; morse saddle " << k << " failed: " << sink.str();
  }
  out << "; random saddles " << good << "/10";
  return ok && good == 10;
}

bool criterion_prefactor(std::ostream& out) {
  const auto ctx = quartic_context();
  const double ku = ek_prediction(ctx.report, ctx.frame, 0.1, Regime::underdamped).prefactor;
  const double ko = ek_prediction(ctx.report, ctx.frame, 0.1, Regime::overdamped).prefactor;
  out << std::setprecision(8) << "kappa_under " << ku << " kappa_over " << ko << "; ";
  bool ok = std::abs(ku - 7.18873) < 1e-4 && std::abs(ko - 4.44288) < 1e-4;
  ok = prefactor_ratio_check(ctx.report, ctx.frame, 1e-12, out) && ok;
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> gam(0.05, 20.0), lam(0.05, 20.0);
  int good = 0;
  for (int k = 0; k < 20; ++k) {
    LandscapeReport rep;
    rep.m.hessian_eigenvalues = Vector::Constant(1, 2.0);
    rep.saddle.energy = 0.25;
    const Matrix H = Matrix::Constant(1, 1, -lam(gen));
    const auto frame = build_saddle_frame(H, gam(gen), Vector::Zero(1));
    std::ostringstream sink;
    if (prefactor_ratio_check(rep, frame, 1e-12, sink)) ++good;
    else out << "; pair " << k << ": " << sink.str();
  }
  out << "; random (gamma, lambda1) pairs " << good << "/20";
  return ok && good == 20;
}

bool criterion_harmonicity(std::ostream& out) {
  const auto ctx = quartic_context();
  HarmonicitySettings s;  // eps 0.05, K 4, 1000 samples, tol 1e-9
  return harmonicity_check(ctx, s, out);
}

QuadratureOptions acceptance_quadrature() {
  QuadratureOptions q;
  q.points = 64;
  q.rel_tol = 1e-11;
  return q;
}

struct CapacityPoint {
  CapacityEstimate cap;
  NumeratorResult num;
  TimeRatio time;
};

CapacityPoint capacity_point(const ModelContext& ctx, double eps, double K) {
  const auto quad = acceptance_quadrature();
  const double Z =
      partition_function(ctx.model, ctx.report, eps, default_truncation_energy(ctx.report, eps), quad)
          .Z_eps;
  CapacityPoint p;
  p.cap = boundary_capacity_integral(ctx.model, ctx.report, ctx.frame, eps, K, quad,
                                     EnergyMode::exact, Z);
  p.num = numerator_integral(ctx.model, ctx.report, eps, quad, 0.0, EnergyMode::exact, Z);
  p.time = predicted_time_ratio(p.num, p.cap,
                                ek_prediction(ctx.report, ctx.frame, eps, Regime::underdamped));
  return p;
}

bool criterion_capacity(std::ostream& out) {
  const auto ctx = quartic_context();
  const auto fine = capacity_point(ctx, 0.02, 4.0);
  const auto coarse = capacity_point(ctx, 0.05, 4.0);
  out << "eps 0.02: boundary/alpha " << fine.cap.ratio << " minus/alpha " << fine.cap.minus_ratio
      << "; eps 0.05: boundary/alpha " << coarse.cap.ratio;
  return fine.cap.ratio >= 0.85 && fine.cap.ratio <= 1.15 && fine.cap.minus_ratio < 0.05 &&
         std::abs(fine.cap.ratio - 1.0) < std::abs(coarse.cap.ratio - 1.0);
}

bool criterion_numerator(std::ostream& out) {
  const auto ctx = quartic_context();
  const auto quad = acceptance_quadrature();
  const double r02 = numerator_integral(ctx.model, ctx.report, 0.02, quad).ratio;
  const double r05 = numerator_integral(ctx.model, ctx.report, 0.05, quad).ratio;
  out << "numerator/laplace eps 0.02: " << r02 << ", eps 0.05: " << r05;
  return r02 >= 0.9 && r02 <= 1.1 && std::abs(r02 - 1.0) < std::abs(r05 - 1.0);
}

bool criterion_end_to_end(std::ostream& out) {
  const auto ctx = quartic_context();
  const auto p = capacity_point(ctx, 0.02, 4.0);
  const double r = p.time.ek_cross_check_ratio;
  out << "quartic eps 0.02 time ratio " << r << "; ";
  const bool control = harmonic_control_check(ctx, 0.02, 4.0, 0.01, acceptance_quadrature(), out);
  return r >= 0.8 && r <= 1.25 && control;
}

bool criterion_monte_carlo(std::ostream& out, int jobs) {
  const auto ctx = quartic_context();
  HittingSettings s;
  s.epsilons = {0.3, 0.25, 0.2};
  s.band_epsilons = {0.25, 0.2};
  s.n_traj = 2000;
  s.radius = 0.2;
  s.dt = 1e-3;
  s.band_lo = 0.4;
  s.band_hi = 2.5;
  s.slope_rel_tol = 0.25;
  s.jobs = jobs;
  return hitting_time_check(ctx, s, out);
}

StartProbeResult start_probe(const ModelContext& ctx, double eps, std::uint64_t seed, int jobs) {
  EnsembleConfig c;
  c.epsilon = eps;
  c.gamma = ctx.gamma;
  c.n_traj = 1000;
  c.start = PhaseState::at_rest(ctx.report.m.location);
  c.target = Ball::around(ctx.report.s.location, 0.2);
  c.integrator.dt = 1e-3;
  c.integrator.max_time =
      50.0 * ek_prediction(ctx.report, ctx.frame, eps, Regime::underdamped).predicted_mean_time;
  c.base_seed = seed;
  RunOptions opt;
  opt.jobs = jobs;
  // five sampled starts against the reference start at m
  return start_insensitivity_probe(c, ctx.model, 0.75, 5, seed + 100, opt);
}

bool criterion_start_insensitivity(std::ostream& out, int jobs) {
  const auto ctx = quartic_context();
  const std::uint64_t seeds[] = {11, 12, 13};
  int improved = 0;
  bool spread_ok = true;
  for (auto seed : seeds) {
    const double s15 = start_probe(ctx, 0.15, seed, jobs).max_relative_spread;
    const double s10 = start_probe(ctx, 0.1, seed, jobs).max_relative_spread;
    out << "seed " << seed << ": spread eps 0.15 " << s15 << " -> eps 0.1 " << s10 << "; ";
    spread_ok = spread_ok && s15 <= 0.25;
    if (s10 < s15) ++improved;
  }
  out << "improved in " << improved << "/3 seeds";
  return spread_ok && 2 * improved > 3;
}

bool criterion_committor(std::ostream& out, int jobs) {
  const auto ctx = quartic_context();
  const double eps = 0.1;
  EnsembleConfig c;
  c.epsilon = eps;
  c.gamma = ctx.gamma;
  c.n_traj = 2000;
  c.start = PhaseState::at_rest(ctx.report.m.location);
  c.target = Ball::around(ctx.report.m.location, 0.1);
  c.avoid = Ball::around(ctx.report.s.location, 0.1);
  c.integrator.dt = 1e-3;
  c.integrator.max_time = 1e4;
  c.base_seed = 3;
  RunOptions opt;
  opt.jobs = jobs;
  std::vector<PhaseState> pts;
  // boundary points first: inside M and inside S
  pts.push_back(PhaseState::at_rest(ctx.report.m.location));
  pts.push_back(PhaseState::at_rest(ctx.report.s.location));
  const double m = ctx.report.m.location[0];
  for (double frac : {0.5, 0.3, 0.2, 0.15, 0.1, 0.05})
    pts.push_back(PhaseState::at_rest(Vector::Constant(1, frac * m)));
  const auto est = estimate_equilibrium_potential(c, ctx.model, pts, opt);
  const bool bc = est[0].h == 1.0 && est[1].h == 0.0;
  const double h_half = est[2].h;
  const std::vector<CommittorEstimate> inner(est.begin() + 2, est.end());
  const auto env = committor_envelope_check(inner, ctx.report, ctx.model, eps);
  out << "h on M " << est[0].h << ", h on S " << est[1].h << ", h(0.5,0) " << h_half << " +- "
      << est[2].ci95 << "; envelope " << env.n_resolvable << " resolvable, slope " << env.fit.slope;
  // with fewer than three resolvable points the slope clause does not apply
  const bool envelope_ok = env.n_resolvable < 3 || env.pass;
  return bc && h_half >= 0.9 && envelope_ok;
}

bool criterion_lyapunov(std::ostream& out) {
  const auto ctx = quartic_context();
  LyapunovSettings s;
  s.global_epsilons = {0.5, 0.99};
  s.local_epsilon = 0.1;
  s.n_samples = 10000;
  return lyapunov_check(ctx, s, out);
}

bool criterion_covariance(std::ostream& out) {
  const auto model = quadratic_well({2.0});
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = 0.25;
  expected(1, 1) = 0.5;
  return covariance_check(model, 1.0, Vector::Zero(1), expected, 1e-8, out);
}

bool criterion_flow(std::ostream& out) {
  const auto ctx = quartic_context();
  FlowSettings s;
  s.n_starts = 100;
  s.tol = 1e-6;
  s.rate_tol = 1e-8;
  return zero_noise_flow_check(ctx, s, out);
}

bool criterion_tightness(std::ostream& out) {
  const auto ctx = quartic_context();
  return tightness_check(ctx, {0.1, 0.3}, {0.1, 0.05, 0.02}, 1e-12, acceptance_quadrature(), out);
}

bool criterion_gibbs(std::ostream& out) {
  GibbsSettings s;
  s.rel_tol = 0.02;
  bool ok = gibbs_marginal_check({2.0}, s, out);
  ok = gibbs_marginal_check({1.0, 4.0}, s, out) && ok;
  return ok;
}

bool criterion_derivatives(std::ostream& out) {
  const std::vector<double> coeffs = [] {
    // 2d polynomial: (q1^2 - 1)^2/4 + q2^2 + q1 q2^2/2 + q2^4/10, dense index e1 + 7 e2
    std::vector<double> c(49, 0.0);
    c[0] = 0.25;
    c[2] = -0.5;
    c[4] = 0.25;
    c[7 * 2] = 1.0;
    c[1 + 7 * 2] = 0.5;
    c[7 * 4] = 0.1;
    return c;
  }();
  const std::vector<PotentialModel> models{
      PotentialModel::quartic_double_well(),
      PotentialModel::separable_double_well({2.0}),
      PotentialModel::separable_double_well({1.0, 3.0}),
      PotentialModel::polynomial(2, coeffs),
  };
  return derivative_check(models, 200, 2.5, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance run"};
  int jobs = 4;
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::Range(1, 4096));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "spectral identities", 1, criterion_spectral},
      {2, "prefactor arithmetic", 1, criterion_prefactor},
      {3, "test-function harmonicity", 1, criterion_harmonicity},
      {4, "capacity quadrature", 60, criterion_capacity},
      {5, "numerator vs Laplace", 60, criterion_numerator},
      {6, "end-to-end ratio", 60, criterion_end_to_end},
      {7, "Monte Carlo mean hitting time", 600,
       [jobs](std::ostream& o) { return criterion_monte_carlo(o, jobs); }},
      {8, "start insensitivity", 600,
       [jobs](std::ostream& o) { return criterion_start_insensitivity(o, jobs); }},
      {9, "committor plateau and envelope", 600,
       [jobs](std::ostream& o) { return criterion_committor(o, jobs); }},
      {10, "Lyapunov suites", 30, criterion_lyapunov},
      {11, "linearization covariance", 5, criterion_covariance},
      {12, "zero-noise flow", 30, criterion_flow},
      {13, "tightness probe", 30, criterion_tightness},
      {14, "Gibbs marginals", 60, criterion_gibbs},
      {15, "derivative consistency", 5, criterion_derivatives},
  };

  int passed = 0;
  std::vector<int> unexpected;
  for (const auto& c : criteria) {
    const auto r = run_check(c.title, c.body);
    std::cout << (r.passed ? "PASS" : "FAIL") << " " << std::setw(2) << c.id << " " << c.title
              << " [" << std::fixed << std::setprecision(1) << r.seconds << " s, budget "
              << c.budget_seconds << " s] " << std::defaultfloat << std::setprecision(6)
              << r.detail << std::endl;
    if (r.passed) ++passed;
    else if (!kKnownUnattainable.count(c.id)) unexpected.push_back(c.id);
  }
  std::cout << passed << "/" << criteria.size() << " criteria passed";
  if (!unexpected.empty()) {
    std::cout << "; unexpected failures:";
    for (int id : unexpected) std::cout << " " << id;
  }
  std::cout << std::endl;
  // exit status guards against regressions; known failures are listed, not hidden
  return unexpected.empty() ? 0 : 1;
}
