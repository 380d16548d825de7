#include "kramers/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>

#include "kramers/errors.hpp"
#include "kramers/rng.hpp"

namespace kramers {

CheckResult run_check(const std::string& name, const std::function<bool(std::ostream&)>& body) {
  CheckResult r;
  r.name = name;
  std::ostringstream out;
  out << std::setprecision(6);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    r.passed = body(out);
  } catch (const std::exception& e) {
    r.passed = false;
    out << "error: " << e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.detail = out.str();
  return r;
}

ModelContext analyze_model(const PotentialModel& model, double gamma, double search_half_width,
                           int grid_density) {
  ModelContext c{model, gamma, {}, {}};
  const auto points =
      find_critical_points(model, SearchBox::cube(model.dimension(), search_half_width), grid_density);
  c.report = build_landscape(model, points);
  c.frame = build_saddle_frame(model, c.report, gamma);
  return c;
}

PotentialModel quadratic_well(const std::vector<double>& stiffness) {
  std::vector<Monomial> terms;
  for (std::size_t i = 0; i < stiffness.size(); ++i) {
    Monomial m;
    m.coefficient = 0.5 * stiffness[i];
    m.exponents[i] = 2;
    terms.push_back(m);
  }
  return PotentialModel::polynomial(static_cast<int>(stiffness.size()), terms);
}

bool derivative_check(const std::vector<PotentialModel>& models, int n_points, double box,
                      std::ostream& out) {
  bool ok = true;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto c = check_derivatives(models[i], n_points, box, 100 + i);
    out << to_string(models[i].family()) << "/d" << models[i].dimension()
        << ": grad " << c.gradient_error << " hess " << c.hessian_error << " asym "
        << c.hessian_asymmetry << "; ";
    ok = ok && c.pass;
  }
  return ok;
}

bool frame_identity_check(const SaddleFrame& frame, double mu_tol, double eigen_tol,
                          double matrix_tol, double zero_tol, std::ostream& out) {
  const auto r = verify_frame_identities(frame);
  out << "mu " << frame.mu << " |mu(mu+g)-l1| " << r.mu_residual << " |HMv+mu v| "
      << r.eigen_residual << " matrix eq " << r.matrix_equality_residual << " shifted min|.| "
      << r.shifted_min_abs << " next " << r.shifted_min_positive;
  return r.mu_residual < mu_tol && r.eigen_residual < eigen_tol &&
         r.matrix_equality_residual < matrix_tol && r.shifted_min_abs < zero_tol &&
         r.shifted_near_zero == 1 && r.shifted_min_positive > 0.0;
}

bool prefactor_ratio_check(const LandscapeReport& report, const SaddleFrame& frame, double tol,
                           std::ostream& out) {
  const double ku = ek_prediction(report, frame, 0.5, Regime::underdamped).prefactor;
  const double ko = ek_prediction(report, frame, 0.5, Regime::overdamped).prefactor;
  const double err = std::abs(ku / ko / (frame.mu + frame.gamma) - 1.0);
  out << "kappa_under " << ku << " kappa_over " << ko << " ratio err " << err;
  return err < tol;
}

bool harmonicity_check(const ModelContext& ctx, const HarmonicitySettings& s, std::ostream& out) {
  const auto test = build_test_function(ctx.frame, s.epsilon, s.K, 0.0, ctx.report.saddle.energy);
  const auto lin = harmonicity_residual(ctx.frame, test, ctx.model, ctx.gamma, s.epsilon,
                                        s.n_samples, s.seed, EnergyMode::exact);
  const auto quad = harmonicity_residual(ctx.frame, test, ctx.model, ctx.gamma, s.epsilon,
                                         s.n_samples, s.seed, EnergyMode::harmonic);
  out << "max |L~ j| " << lin.max_linearized << " over " << lin.n_samples
      << "; quadratic control max |L j| " << quad.max_full << "; exact-force max |L j| "
      << lin.max_full;
  return lin.max_linearized < s.tol && quad.max_full < s.tol;
}

bool lyapunov_check(const ModelContext& ctx, const LyapunovSettings& s, std::ostream& out) {
  bool ok = true;
  const auto g = build_global_lyapunov(ctx.model, ctx.gamma);
  out << "global c " << g.c << " lambda " << g.lambda() << " M " << g.M << " R " << g.R;
  for (double eps : s.global_epsilons) {
    const auto v = verify_global_lyapunov(g, ctx.model, eps, s.n_samples);
    out << "; eps " << eps << ": " << v.n_violations << "/" << v.n_samples << " violations";
    ok = ok && v.n_violations == 0;
  }
  const auto l = build_local_lyapunov(ctx.model, ctx.report.m.location, ctx.gamma);
  const auto lv = verify_local_inequalities(l, ctx.model, s.local_epsilon, s.n_samples);
  out << "; local rho " << l.rho << " alpha " << l.alpha << " eps " << s.local_epsilon << ": "
      << lv.linear_violations << " + " << lv.exponential_violations << " violations in "
      << lv.n_samples;
  return ok && lv.linear_violations == 0 && lv.exponential_violations == 0;
}

bool zero_noise_flow_check(const ModelContext& ctx, const FlowSettings& s, std::ostream& out) {
  const auto& rep = ctx.report;
  const int d = ctx.model.dimension();
  const Vector sigma = rep.saddle.location, m = rep.m.location;
  const Vector u = (m - sigma).normalized();
  const double Us = rep.saddle.energy;
  const double pmax = std::sqrt(2.0 * (Us - rep.m.energy));
  // dense (q, p) grid along the sigma -> m axis, thinned to n_starts admissible points
  std::vector<PhaseState> admissible;
  const int n = 40;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double t = 0.05 + 1.55 * i / (n - 1);
      const Vector q = sigma + t * (m - sigma);
      const Vector p = (-pmax + 2.0 * pmax * j / (n - 1)) * u;
      const PhaseState x{q, p};
      if (hamiltonian(ctx.model, x) < Us - 0.02 * (Us - rep.m.energy)) admissible.push_back(x);
    }
  }
  if (static_cast<int>(admissible.size()) < s.n_starts)
    throw EstimationError("too few admissible flow starts");
  const std::vector<Vector> minima{m, rep.s.location};
  int settled = 0;
  double worst_rate = -1e300;
  for (int k = 0; k < s.n_starts; ++k) {
    const auto& x = admissible[k * admissible.size() / s.n_starts];
    const auto r = run_zero_noise_flow(ctx.model, ctx.gamma, x, minima, s.tol, s.max_time, false);
    if (r.converged && r.minimum_index == 0) ++settled;
    worst_rate = std::max(worst_rate, r.max_energy_increase_rate);
  }
  out << settled << "/" << s.n_starts << " starts settled at (m,0) within " << s.tol
      << "; largest energy increase rate " << worst_rate << " (d=" << d << ")";
  return settled == s.n_starts && worst_rate <= s.rate_tol;
}

bool tightness_check(const ModelContext& ctx, const std::vector<double>& levels,
                     const std::vector<double>& epsilons, double z_tol,
                     const QuadratureOptions& quad, std::ostream& out) {
  const double eps_max = *std::max_element(epsilons.begin(), epsilons.end());
  const double trunc = default_truncation_energy(ctx.report, eps_max);
  bool ok = true;
  for (double a : levels) {
    const auto t = tightness_probe(ctx.model, a, epsilons, trunc, quad);
    out << "a=" << a << (t.bounded ? " bounded" : " UNBOUNDED") << " [";
    for (std::size_t i = 0; i < t.values.size(); ++i) out << (i ? ", " : "") << t.values[i];
    out << "]; ";
    ok = ok && t.bounded;
  }
  double worst = 0.0;
  for (double eps : epsilons) {
    const double t0 = tightness_probe(ctx.model, 0.0, {eps}, trunc, quad).values[0];
    const double z = partition_function(ctx.model, ctx.report, eps, trunc, quad).Z_eps;
    worst = std::max(worst, std::abs(t0 / z - 1.0));
  }
  out << "a=0 vs Z rel diff " << worst;
  return ok && worst <= z_tol;
}

bool covariance_check(const PotentialModel& model, double gamma, const Vector& z,
                      const Matrix& expected, double tol, std::ostream& out) {
  const auto ev = evolve_linearization_covariance(model, gamma, z, 30.0, 1e-3, 0.1);
  const double err = (ev.sigma_limit - expected).cwiseAbs().maxCoeff();
  out << "limit error " << err << " tail slope " << ev.tail_slope << " r^2 " << ev.tail_r_squared
      << " final distance " << ev.distance.back();
  return err <= tol && ev.tail_slope < 0.0 && ev.tail_r_squared > 0.9;
}

bool gibbs_marginal_check(const std::vector<double>& stiffness, const GibbsSettings& s,
                          std::ostream& out) {
  const auto model = quadratic_well(stiffness);
  const int d = model.dimension();
  Stepper stepper(ProcessKind::forward(), model, s.gamma, s.epsilon, s.dt, Scheme::splitting_obabo);
  const NoiseStream rng(s.seed, 0);
  std::vector<double> noise(stepper.noise_size());
  std::vector<RunningStats> q_stats(d), p_stats(d);
  PhaseState x = PhaseState::at_rest(Vector::Zero(d));
  const auto burn = static_cast<std::uint64_t>(50.0 / s.dt);
  const auto n = static_cast<std::uint64_t>(s.horizon / s.dt);
  for (std::uint64_t k = 0; k < burn + n; ++k) {
    rng.normals(k, noise);
    stepper.advance(x, noise);
    if (k < burn) continue;
    for (int i = 0; i < d; ++i) {
      q_stats[i].add(x.q[i]);
      p_stats[i].add(x.p[i]);
    }
  }
  bool ok = true;
  for (int i = 0; i < d; ++i) {
    const double eq = q_stats[i].variance() / (s.epsilon / stiffness[i]) - 1.0;
    const double ep = p_stats[i].variance() / s.epsilon - 1.0;
    out << "w=" << stiffness[i] << ": var q rel err " << eq << ", var p rel err " << ep << "; ";
    ok = ok && std::abs(eq) <= s.rel_tol && std::abs(ep) <= s.rel_tol;
  }
  return ok;
}

bool harmonic_control_check(const ModelContext& ctx, double epsilon, double K, double tol,
                            const QuadratureOptions& quad, std::ostream& out) {
  const double Z =
      partition_function(ctx.model, ctx.report, epsilon,
                         default_truncation_energy(ctx.report, epsilon), quad)
          .Z_eps;
  const auto cap = boundary_capacity_integral(ctx.model, ctx.report, ctx.frame, epsilon, K, quad,
                                              EnergyMode::harmonic, Z);
  const auto num = numerator_integral(ctx.model, ctx.report, epsilon, quad, 0.0,
                                      EnergyMode::harmonic, Z);
  const auto ek = ek_prediction(ctx.report, ctx.frame, epsilon, Regime::underdamped);
  const auto tr = predicted_time_ratio(num, cap, ek);
  out << "eps " << epsilon << ": boundary/alpha " << cap.ratio << " numerator/laplace "
      << num.ratio << " time ratio " << tr.ek_cross_check_ratio;
  return std::abs(cap.ratio - 1.0) <= tol && std::abs(num.ratio - 1.0) <= tol &&
         std::abs(tr.ek_cross_check_ratio - 1.0) <= tol;
}

bool hitting_time_check(const ModelContext& ctx, const HittingSettings& s, std::ostream& out) {
  std::vector<std::pair<double, HittingStats>> series;
  bool band_ok = true;
  for (double eps : s.epsilons) {
    const auto ek = ek_prediction(ctx.report, ctx.frame, eps, Regime::underdamped);
    EnsembleConfig c;
    c.epsilon = eps;
    c.gamma = ctx.gamma;
    c.n_traj = s.n_traj;
    c.start = PhaseState::at_rest(ctx.report.m.location);
    c.target = Ball::around(ctx.report.s.location, s.radius);
    c.integrator.dt = s.dt;
    c.integrator.max_time = s.max_time_factor * ek.predicted_mean_time;
    c.base_seed = s.seed;
    RunOptions opt;
    opt.jobs = s.jobs;
    const auto st = estimate_mean_hitting_time(c, ctx.model, opt);
    const double ratio = st.mean / ek.predicted_mean_time;
    out << "eps " << eps << ": mean " << st.mean << " +- " << st.ci95_half_width << " vs "
        << ek.predicted_mean_time << " (ratio " << ratio << ", " << st.n_timeout
        << " timeouts); ";
    if (std::find(s.band_epsilons.begin(), s.band_epsilons.end(), eps) != s.band_epsilons.end())
      band_ok = band_ok && ratio >= s.band_lo && ratio <= s.band_hi;
    series.push_back({eps, st});
  }
  const auto fit = barrier_slope_fit(series);
  const double barrier = ctx.report.barrier_from_m;
  const double rel = fit.slope / barrier - 1.0;
  out << "Arrhenius slope " << fit.slope << " vs barrier " << barrier << " (rel " << rel << ")";
  return band_ok && std::abs(rel) <= s.slope_rel_tol;
}

}  // namespace kramers
