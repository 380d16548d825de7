#include "kramers/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kramers/errors.hpp"
#include "kramers/parallel.hpp"
#include "kramers/rng.hpp"
#include "kramers/stats.hpp"

namespace kramers {

double LyapunovForm::value(const PotentialModel& model, const PhaseState& x) const {
  const Vector dq = x.q - z;
  const double A = a();
  return 0.5 * x.p.squaredNorm() + A * dq.dot(x.p) + A * A * dq.squaredNorm() + model.energy(x.q) -
         shift;
}

FunctionBundle LyapunovForm::bundle(const PotentialModel& model, double alpha, double epsilon) const {
  const LyapunovForm f = *this;
  const PotentialModel* m = &model;
  const int d = model.dimension();
  auto grad = [f, m, d](const Vector& x) {
    const PhaseState s = PhaseState::from_stacked(x);
    const double A = f.a();
    Vector g(2 * d);
    g.head(d) = A * s.p + 2.0 * A * A * (s.q - f.z) + eval_gradient(*m, s.q);
    g.tail(d) = s.p + A * (s.q - f.z);
    return g;
  };
  auto hess = [f, m, d](const Vector& x) {
    const PhaseState s = PhaseState::from_stacked(x);
    const double A = f.a();
    Matrix h(2 * d, 2 * d);
    h.topLeftCorner(d, d) = 2.0 * A * A * Matrix::Identity(d, d) + eval_hessian(*m, s.q);
    h.topRightCorner(d, d) = A * Matrix::Identity(d, d);
    h.bottomLeftCorner(d, d) = A * Matrix::Identity(d, d);
    h.bottomRightCorner(d, d).setIdentity();
    return h;
  };
  auto val = [f, m](const Vector& x) { return f.value(*m, PhaseState::from_stacked(x)); };
  if (alpha <= 0.0) return {val, grad, hess};
  const double k = alpha / epsilon;
  return {[val, k](const Vector& x) { return std::exp(k * val(x)); },
          [val, grad, k](const Vector& x) -> Vector { return k * std::exp(k * val(x)) * grad(x); },
          [val, grad, hess, k](const Vector& x) -> Matrix {
            const Vector g = grad(x);
            return k * std::exp(k * val(x)) * (hess(x) + k * g * g.transpose());
          }};
}

namespace {

// half of the largest lambda in (0, gamma) with lambda (gamma - lambda)/2 < c and
// 2 lambda / (gamma - lambda) < c
double choose_lambda(double c, double gamma) {
  double hi = c * gamma / (2.0 + c);
  if (gamma * gamma / 8.0 >= c) {
    // smaller root of lambda^2 - gamma lambda + 2c = 0
    hi = std::min(hi, 0.5 * (gamma - std::sqrt(gamma * gamma - 8.0 * c)));
  }
  return 0.5 * hi;
}

}  // namespace

GlobalLyapunov build_global_lyapunov(const PotentialModel& model, double gamma) {
  if (!(gamma > 0.0)) throw InputError("gamma must be positive");
  const int d = model.dimension();
  const auto dirs = shell_directions(d, 64);
  Vector g(d);
  auto shell_min_ratio = [&](double r) {
    double mn = std::numeric_limits<double>::infinity();
    for (const auto& u : dirs) {
      const Vector q = r * u;
      model.gradient(q, g);
      const double den = q.squaredNorm() + model.energy(q);
      mn = std::min(mn, den > 0.0 ? q.dot(g) / den : -std::numeric_limits<double>::infinity());
    }
    return mn;
  };
  // shells out to radius 20
  std::vector<double> radii, ratios;
  for (int k = 1; k <= 80; ++k) {
    radii.push_back(0.25 * k);
    ratios.push_back(shell_min_ratio(0.25 * k));
  }
  const double outer = *std::min_element(ratios.end() - 8, ratios.end());
  if (!(outer > 0.0))
    throw ConstructionError("growth sampling failed: <q, grad U>/(|q|^2 + U) is not positive "
                            "on the outer shells");
  GlobalLyapunov gl;
  gl.c = 0.5 * outer;
  // M1: every shell from here on satisfies the bound with c
  std::size_t first = radii.size() - 1;
  for (std::size_t k = radii.size(); k-- > 0;) {
    if (ratios[k] >= gl.c) first = k;
    else break;
  }
  gl.M1 = radii[first];
  const double lambda = choose_lambda(gl.c, gamma);
  gl.form = {Vector::Zero(d), gamma, lambda, 0.0};
  const double A = gl.form.a();
  const double m_needed = std::sqrt(d * gamma / (A * (gl.c - lambda * A)));
  gl.M = 1.05 * std::max(gl.M1, m_needed);

  // sup over |q| <= M of the bracket in the identity for L H + lambda H
  double sup = 0.0;
  for (int k = 0; k <= 200; ++k) {
    const double r = gl.M * k / 200.0;
    for (const auto& u : dirs) {
      const Vector q = r * u;
      model.gradient(q, g);
      const double bracket = g.dot(q) - lambda / A * model.energy(q) - lambda * A * q.squaredNorm();
      sup = std::max(sup, std::abs(bracket));
    }
  }
  gl.R = 1.05 * std::sqrt(2.0 / gamma * (A * sup + d * gamma * 1.0));
  return gl;
}

LyapunovViolations verify_global_lyapunov(const GlobalLyapunov& gl, const PotentialModel& model,
                                          double epsilon, int n_samples, std::uint64_t seed) {
  const int d = model.dimension();
  const double gamma = gl.form.gamma;
  const auto bundle = gl.form.bundle(model);
  const NoiseStream rng(seed, 2);
  std::vector<double> u(2 * d);
  LyapunovViolations out;
  out.max_residual = -std::numeric_limits<double>::infinity();
  std::uint64_t k = 0;
  while (out.n_samples < n_samples) {
    rng.uniforms(k++, u);
    PhaseState x{Vector(d), Vector(d)};
    for (int i = 0; i < d; ++i) {
      x.q[i] = 3.0 * gl.M * (2.0 * u[i] - 1.0);
      x.p[i] = 3.0 * gl.R * (2.0 * u[d + i] - 1.0);
    }
    if (gl.in_compact_set(x)) continue;
    ++out.n_samples;
    const double H = gl.form.value(model, x);
    const double lhs = apply_generator(model, gamma, epsilon, bundle, x) + gl.lambda() * H;
    // rounding allowance relative to the size of the terms
    const double tol = 1e-12 * (std::abs(H) + 1.0);
    out.max_residual = std::max(out.max_residual, lhs);
    if (lhs > tol) {
      ++out.n_violations;
      if (out.violations.size() < 10) out.violations.push_back(x);
    }
  }
  return out;
}

LocalLyapunov build_local_lyapunov(const PotentialModel& model, const Vector& z, double gamma,
                                   std::uint64_t seed) {
  const int d = model.dimension();
  if (z.size() != d) throw InputError("center dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> es(eval_hessian(model, z));
  const double lmin = es.eigenvalues().minCoeff(), lmax = es.eigenvalues().maxCoeff();
  if (!(lmin > 0.0)) throw ConstructionError("local Lyapunov center is not a strict minimum");
  if (eval_gradient(model, z).norm() > 1e-8) throw ConstructionError("center is not critical");

  LocalLyapunov l;
  // quadratic model: <H dq, dq> >= lmin |dq|^2 and U - U(z) <= lmax |dq|^2 / 2; keep half
  l.c_local = 0.5 * lmin / (1.0 + 0.5 * lmax);
  const double Uz = model.energy(z);
  const auto dirs = shell_directions(d, 64);
  Vector g(d);
  auto holds = [&](double rho) {
    for (int k = 1; k <= 40; ++k) {
      const double r = rho * k / 40.0;
      for (const auto& u : dirs) {
        const Vector q = z + r * u;
        model.gradient(q, g);
        if (g.dot(q - z) < l.c_local * (r * r + model.energy(q) - Uz)) return false;
      }
    }
    return true;
  };
  double rho = 1.0;
  while (!holds(rho)) {
    rho *= 0.8;
    if (rho < 1e-3) throw ConstructionError("no admissible rho above 1e-3");
  }
  l.rho = rho;
  // lambda must satisfy the growth conditions for both the global and the local constant
  double c_eff = l.c_local;
  try {
    c_eff = std::min(c_eff, build_global_lyapunov(model, gamma).c);
  } catch (const ConstructionError&) {
  }
  l.form = {z, gamma, choose_lambda(c_eff, gamma), Uz};

  // C from |p + a (q - z)|^2 <= C H on samples of the phase space ball
  const NoiseStream rng(seed, 4);
  std::vector<double> nz(2 * d), un(1);
  double worst = 0.0;
  double min_on_sphere = std::numeric_limits<double>::infinity();
  for (std::uint64_t k = 0; k < 20000; ++k) {
    rng.normals(2 * k, nz);
    rng.uniforms(2 * k + 1, un);
    Vector dir = Eigen::Map<Vector>(nz.data(), 2 * d);
    dir.normalize();
    const PhaseState on_sphere{z + rho * dir.head(d), rho * dir.tail(d)};
    min_on_sphere = std::min(min_on_sphere, l.form.value(model, on_sphere));
    const double r = rho * std::pow(un[0], 1.0 / (2 * d));
    const PhaseState x{z + r * dir.head(d), r * dir.tail(d)};
    const double H = l.form.value(model, x);
    if (H <= 0.0) continue;
    const double w = (x.p + l.form.a() * (x.q - z)).squaredNorm();
    worst = std::max(worst, w / H);
  }
  l.C = 1.5 * worst;
  l.alpha = l.lambda() / (2.0 * l.C * gamma);
  l.delta_admissible = min_on_sphere;
  return l;
}

LocalViolations verify_local_inequalities(const LocalLyapunov& l, const PotentialModel& model,
                                          double epsilon, int n_samples, std::uint64_t seed) {
  const int d = model.dimension();
  const double gamma = l.form.gamma;
  const auto hb = l.form.bundle(model);
  const auto eb = l.form.bundle(model, l.alpha, epsilon);
  const NoiseStream rng(seed, 6);
  std::vector<double> nz(2 * d), un(1);
  LocalViolations out;
  for (int k = 0; k < n_samples; ++k) {
    // sample 0 is the center itself, where both inequalities are equalities
    PhaseState x{l.form.z, Vector::Zero(d)};
    if (k > 0) {
      rng.normals(2 * static_cast<std::uint64_t>(k), nz);
      rng.uniforms(2 * static_cast<std::uint64_t>(k) + 1, un);
      Vector dir = Eigen::Map<Vector>(nz.data(), 2 * d);
      dir.normalize();
      const double r = l.rho * std::pow(un[0], 1.0 / (2 * d));
      x = {l.form.z + r * dir.head(d), r * dir.tail(d)};
    }
    ++out.n_samples;
    const double H = l.form.value(model, x);
    const double tol = 1e-12 * (1.0 + std::abs(H));
    const double lin = apply_generator(model, gamma, epsilon, hb, x) + l.lambda() * H - d * gamma * epsilon;
    out.max_linear_residual = std::max(out.max_linear_residual, lin);
    if (lin > tol) ++out.linear_violations;
    const double e = std::exp(l.alpha * H / epsilon);
    const double ex = apply_generator(model, gamma, epsilon, eb, x) / e - l.alpha * d * gamma;
    out.max_exponential_residual = std::max(out.max_exponential_residual, ex);
    if (ex > tol) ++out.exponential_violations;
  }
  return out;
}

ExitProbability exit_probability_probe(const LocalLyapunov& l, const PotentialModel& model,
                                       double epsilon, double a, double b, double t,
                                       std::int64_t n_traj, std::uint64_t seed, int jobs,
                                       double dt) {
  if (!(a > 0.0 && b >= a)) throw InputError("need 0 < a <= b");
  if (!(t > 0.0)) throw InputError("horizon t must be positive");
  const int d = model.dimension();
  ExitProbability out;
  out.epsilon = epsilon;
  out.n = n_traj;
  out.admissible = b <= l.delta_admissible;
  const LyapunovForm form = l.form;

  // starting states on {H = a} by bisection along random phase space rays
  const NoiseStream sampler(seed, 1ull << 40);
  std::vector<PhaseState> starts(n_traj);
  std::vector<double> nz(2 * d);
  for (std::int64_t k = 0; k < n_traj; ++k) {
    sampler.normals(static_cast<std::uint64_t>(k), nz);
    Vector dir = Eigen::Map<Vector>(nz.data(), 2 * d);
    dir.normalize();
    auto at = [&](double r) { return PhaseState{form.z + r * dir.head(d), r * dir.tail(d)}; };
    double lo = 0.0, hi = l.rho;
    while (form.value(model, at(hi)) < a) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (form.value(model, at(mid)) < a ? lo : hi) = mid;
    }
    starts[k] = at(hi);
  }

  StopRule rule;
  rule.level_function = [&](const PhaseState& x) { return form.value(model, x) - b; };
  IntegratorConfig cfg;
  cfg.dt = dt;
  cfg.max_time = t;
  std::vector<std::int8_t> exited(n_traj, 0);
  parallel_for(n_traj, jobs, [&](std::int64_t k) {
    const NoiseStream rng(seed, static_cast<std::uint64_t>(k));
    const auto ev = integrate_until(ProcessKind::forward(), model, form.gamma, epsilon, starts[k],
                                    rule, cfg, rng);
    exited[k] = ev.reason == StopReason::energy_level_crossed;
  });
  for (auto e : exited) out.exits += e;
  out.probability = static_cast<double>(out.exits) / static_cast<double>(n_traj);
  out.upper_95 = out.exits == 0 ? 3.0 / static_cast<double>(n_traj) : out.probability;
  return out;
}

ExitTrend exit_probability_trend(const LocalLyapunov& l, const PotentialModel& model,
                                 const std::vector<double>& epsilons, double a, double b, double t,
                                 std::int64_t n_traj, std::uint64_t seed, int jobs) {
  ExitTrend tr;
  std::vector<double> x, y;
  for (double eps : epsilons) {
    tr.points.push_back(exit_probability_probe(l, model, eps, a, b, t, n_traj, seed, jobs));
    const auto& p = tr.points.back();
    if (p.exits > 0) {
      x.push_back((b - a) / eps);
      y.push_back(std::log(p.probability));
    }
  }
  tr.n_used = static_cast<int>(x.size());
  tr.conclusive = tr.n_used >= 2;
  if (tr.conclusive) tr.slope = least_squares(x, y).slope;
  return tr;
}

}  // namespace kramers
