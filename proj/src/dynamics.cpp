#include "kramers/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kramers/errors.hpp"

namespace kramers {

ProcessKind ProcessKind::perturbed(double alpha) {
  if (!(alpha > 0.0)) throw InputError("perturbed process needs alpha > 0");
  return {Kind::perturbed, alpha};
}

std::string to_string(Scheme s) {
  return s == Scheme::euler_maruyama ? "euler-maruyama" : "splitting-obabo";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "euler-maruyama") return Scheme::euler_maruyama;
  if (name == "splitting-obabo") return Scheme::splitting_obabo;
  throw InputError("unknown integrator scheme '" + name + "'");
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::hit_target: return "hit_target";
    case StopReason::hit_avoid: return "hit_avoid";
    case StopReason::energy_level_crossed: return "energy_level_crossed";
    case StopReason::left_domain: return "left_domain";
    case StopReason::timeout: return "timeout";
  }
  return "unknown";
}

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("integrator dt must be positive");
  if (!(max_time > dt)) throw InputError("integrator max_time must exceed dt");
}

int noise_size(ProcessKind process, Scheme scheme, int dimension) {
  if (process.kind == ProcessKind::Kind::zero_noise) return 0;
  int n = scheme == Scheme::euler_maruyama ? dimension : 2 * dimension;
  if (process.kind == ProcessKind::Kind::perturbed) n += dimension;
  return n;
}

Stepper::Stepper(ProcessKind process, const PotentialModel& model, double gamma, double epsilon,
                 double dt, Scheme scheme)
    : process_(process), model_(model), gamma_(gamma), epsilon_(epsilon), dt_(dt), scheme_(scheme),
      d_(model.dimension()), noise_size_(kramers::noise_size(process, scheme, model.dimension())),
      cached_q_(model.dimension()), cached_g_(model.dimension()) {
  if (!(gamma > 0.0)) throw InputError("gamma must be positive");
  if (!(epsilon >= 0.0)) throw InputError("epsilon must be non-negative");
  if (!(dt > 0.0)) throw InputError("dt must be positive");
  if (process_.kind == ProcessKind::Kind::zero_noise) epsilon_ = 0.0;
  if (process_.kind == ProcessKind::Kind::reversed) {
    // anti-damped OU: p(t) = e^{gt} p0 + noise with variance eps (e^{2gt} - 1)
    ou_c_ = std::exp(0.5 * gamma_ * dt_);
    ou_sd_ = std::sqrt(epsilon_ * (ou_c_ * ou_c_ - 1.0));
  } else {
    ou_c_ = std::exp(-0.5 * gamma_ * dt_);
    ou_sd_ = std::sqrt(epsilon_ * (1.0 - ou_c_ * ou_c_));
  }
}

const Vector& Stepper::gradient_at(const Vector& q) {
  bool same = cache_valid_;
  for (int i = 0; same && i < d_; ++i) same = q[i] == cached_q_[i];
  if (!same) {
    cached_q_ = q;
    model_.gradient(q, cached_g_);
    cache_valid_ = true;
  }
  return cached_g_;
}

// plain loops: for d <= 3 the Eigen expression machinery costs more than the arithmetic
void Stepper::advance(PhaseState& x, std::span<const double> noise) {
  if (x.q.size() != d_ || x.p.size() != d_) throw InputError("state dimension mismatch");
  if (static_cast<int>(noise.size()) < noise_size_)
    throw InputError("step needs " + std::to_string(noise_size_) + " normals, got " +
                     std::to_string(noise.size()));
  using K = ProcessKind::Kind;
  const bool noisy = epsilon_ > 0.0 && process_.kind != K::zero_noise;
  const bool perturbed = process_.kind == K::perturbed;
  const double sgn = process_.kind == K::reversed ? -1.0 : 1.0;
  double* q = x.q.data();
  double* p = x.p.data();
  const double* xi = noise.data();

  if (scheme_ == Scheme::euler_maruyama) {
    const Vector& g = gradient_at(x.q);
    const double kick = std::sqrt(2.0 * gamma_ * epsilon_ * dt_);
    const double qkick = perturbed ? std::sqrt(2.0 * process_.alpha * epsilon_ * dt_) : 0.0;
    for (int i = 0; i < d_; ++i) {
      const double qi = q[i], pi = p[i], gi = g[i];
      q[i] = qi + sgn * dt_ * pi;
      p[i] = pi - sgn * dt_ * (gi + gamma_ * pi);
      if (noisy) p[i] += kick * xi[i];
      if (perturbed) {
        q[i] -= process_.alpha * dt_ * gi;
        if (noisy) q[i] += qkick * xi[d_ + i];
      }
    }
    return;
  }

  // O B A B O
  const double half = sgn * 0.5 * dt_;
  {
    const Vector& g = gradient_at(x.q);
    for (int i = 0; i < d_; ++i) {
      p[i] *= ou_c_;
      if (noisy) p[i] += ou_sd_ * xi[i];
      p[i] -= half * g[i];
      q[i] += sgn * dt_ * p[i];
    }
  }
  if (perturbed) {
    const Vector& g = gradient_at(x.q);
    const double qkick = std::sqrt(2.0 * process_.alpha * epsilon_ * dt_);
    for (int i = 0; i < d_; ++i) {
      q[i] -= process_.alpha * dt_ * g[i];
      if (noisy) q[i] += qkick * xi[2 * d_ + i];
    }
  }
  const Vector& g = gradient_at(x.q);
  for (int i = 0; i < d_; ++i) {
    p[i] -= half * g[i];
    p[i] *= ou_c_;
    if (noisy) p[i] += ou_sd_ * xi[d_ + i];
  }
}

namespace {

void guard(const PhaseState& x) {
  for (int i = 0; i < x.q.size(); ++i) {
    if (!std::isfinite(x.q[i]) || !std::isfinite(x.p[i]) || std::abs(x.q[i]) > kBlowUpBound ||
        std::abs(x.p[i]) > kBlowUpBound)
      throw NumericalBlowUp("trajectory blew up", x);
  }
}

double phase_norm(const PhaseState& x) {
  return std::sqrt(x.q.squaredNorm() + x.p.squaredNorm());
}

PhaseState lerp(const PhaseState& a, const PhaseState& b, double t) {
  return {a.q + t * (b.q - a.q), a.p + t * (b.p - a.p)};
}

}  // namespace

PhaseState step(ProcessKind process, const PotentialModel& model, double gamma, double epsilon,
                const PhaseState& state, double dt, std::span<const double> noise, Scheme scheme) {
  Stepper s(process, model, gamma, epsilon, dt, scheme);
  PhaseState x = state;
  s.advance(x, noise);
  guard(x);
  return x;
}

StopEvent integrate_until(ProcessKind process, const PotentialModel& model, double gamma,
                          double epsilon, const PhaseState& start, const StopRule& stop,
                          const IntegratorConfig& config) {
  return integrate_until(process, model, gamma, epsilon, start, stop, config,
                         NoiseStream(config.rng_seed, config.stream_id));
}

StopEvent integrate_until(ProcessKind process, const PotentialModel& model, double gamma,
                          double epsilon, const PhaseState& start, const StopRule& stop,
                          const IntegratorConfig& config, const NoiseStream& rng) {
  config.validate();
  const int d = model.dimension();
  if (start.q.size() != d || start.p.size() != d) throw InputError("start dimension mismatch");
  guard(start);
  for (const auto* b : {&stop.target, &stop.avoid})
    if (*b && (*b)->center.size() != 2 * d) throw InputError("ball center dimension mismatch");

  // signed indicators, each fires when it becomes <= 0
  const double energy_sign =
      stop.energy_level ? (hamiltonian(model, start) > *stop.energy_level ? 1.0 : -1.0) : 1.0;
  constexpr StopReason reasons[5] = {StopReason::hit_target, StopReason::hit_avoid,
                                     StopReason::energy_level_crossed,
                                     StopReason::energy_level_crossed, StopReason::left_domain};
  std::array<int, 5> active{};
  int n_active = 0;
  if (stop.target) active[n_active++] = 0;
  if (stop.avoid) active[n_active++] = 1;
  if (stop.energy_level) active[n_active++] = 2;
  if (stop.level_function) active[n_active++] = 3;
  if (stop.domain_radius) active[n_active++] = 4;
  auto indicator = [&](int i, const PhaseState& x) {
    switch (i) {
      case 0: return stop.target->distance(x) - stop.target->radius;
      case 1: return stop.avoid->distance(x) - stop.avoid->radius;
      case 2: return energy_sign * (hamiltonian(model, x) - *stop.energy_level);
      case 3: return -stop.level_function(x);
      default: return *stop.domain_radius - phase_norm(x);
    }
  };

  std::array<double, 5> g0{}, g1{};
  for (int a = 0; a < n_active; ++a) {
    g0[a] = indicator(active[a], start);
    if (g0[a] <= 0.0) return {reasons[active[a]], 0.0, start, 0};
  }

  Stepper stepper(process, model, gamma, epsilon, config.dt, config.scheme);
  const int n_noise = stepper.noise_size();
  std::vector<double> noise(std::max(n_noise, 1));
  const auto n_steps = static_cast<std::uint64_t>(std::floor(config.max_time / config.dt + 1e-9));
  PhaseState x = start, prev = start;
  for (std::uint64_t k = 0; k < n_steps; ++k) {
    prev.q = x.q;
    prev.p = x.p;
    if (n_noise > 0) rng.normals(k, std::span(noise.data(), n_noise));
    stepper.advance(x, noise);
    guard(x);
    int fired = -1;
    double best = 2.0;
    for (int a = 0; a < n_active; ++a) {
      g1[a] = indicator(active[a], x);
      if (g1[a] > 0.0) continue;
      const double frac = g0[a] / (g0[a] - g1[a]);
      if (frac < best) {
        best = frac;
        fired = active[a];
      }
    }
    if (fired >= 0) {
      const double t = (static_cast<double>(k) + best) * config.dt;
      return {reasons[fired], t, lerp(prev, x, best), k + 1};
    }
    g0 = g1;
  }
  return {StopReason::timeout, static_cast<double>(n_steps) * config.dt, x, n_steps};
}

void check_bundle_consistency(const FunctionBundle& bundle, const Vector& x, double tol) {
  if (!bundle.f || !bundle.gradient || !bundle.hessian)
    throw ContractError("function bundle is missing an evaluator");
  const Vector g = bundle.gradient(x);
  const Matrix h = bundle.hessian(x);
  const double step = 1e-5 * std::max(1.0, x.norm());
  const double gscale = std::max(1.0, g.norm());
  const double hscale = std::max(1.0, h.norm());
  for (int i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    const double fd = (bundle.f(xp) - bundle.f(xm)) / (2.0 * step);
    if (std::abs(fd - g[i]) / gscale > tol)
      throw ContractError("bundle gradient disagrees with finite differences of f on axis " +
                          std::to_string(i));
    const Vector col = (bundle.gradient(xp) - bundle.gradient(xm)) / (2.0 * step);
    if ((col - h.col(i)).norm() / hscale > tol)
      throw ContractError("bundle Hessian disagrees with finite differences of the gradient");
  }
}

double apply_generator(const PotentialModel& model, double gamma, double epsilon,
                       const FunctionBundle& bundle, const PhaseState& x, bool adjoint,
                       bool check_consistency) {
  const int d = model.dimension();
  const Vector xs = x.stacked();
  if (check_consistency) check_bundle_consistency(bundle, xs);
  const Vector g = bundle.gradient(xs);
  const Matrix h = bundle.hessian(xs);
  const Vector gradU = eval_gradient(model, x.q);
  const auto gq = g.head(d);
  const auto gp = g.tail(d);
  const double transport = x.p.dot(gq) - gradU.dot(gp);
  return (adjoint ? -transport : transport) - gamma * x.p.dot(gp) +
         gamma * epsilon * h.bottomRightCorner(d, d).trace();
}

ZeroNoiseFlowResult run_zero_noise_flow(const PotentialModel& model, double gamma,
                                        const PhaseState& start, const std::vector<Vector>& minima,
                                        double tol, double max_time, bool record_trace) {
  const int d = model.dimension();
  const int n = 2 * d;
  Vector gq(d);
  auto rhs = [&](const Vector& y) {
    Vector f(n);
    model.gradient(y.head(d), gq);
    f.head(d) = y.tail(d);
    f.tail(d) = -gq - gamma * y.tail(d);
    return f;
  };
  auto energy = [&](const Vector& y) { return model.energy(y.head(d)) + 0.5 * y.tail(d).squaredNorm(); };
  auto settled = [&](const Vector& y) {
    for (std::size_t i = 0; i < minima.size(); ++i) {
      const double dist = std::sqrt((y.head(d) - minima[i]).squaredNorm() + y.tail(d).squaredNorm());
      if (dist < tol) return static_cast<int>(i);
    }
    return -1;
  };

  // Dormand-Prince 5(4)
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  (void)c2; (void)c3; (void)c4; (void)c5;
  constexpr double rtol = 1e-12, atol = 1e-14, h_max = 0.1;

  ZeroNoiseFlowResult res;
  Vector y = start.stacked();
  double t = 0.0, h = 1e-3;
  double v_prev = energy(y);
  if (record_trace) {
    res.times.push_back(0.0);
    res.energies.push_back(v_prev);
  }
  Vector k1 = rhs(y);
  int hit = settled(y);
  while (hit < 0 && t < max_time) {
    h = std::min({h, h_max, max_time - t});
    const Vector k2 = rhs(y + h * a21 * k1);
    const Vector k3 = rhs(y + h * (a31 * k1 + a32 * k2));
    const Vector k4 = rhs(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vector k5 = rhs(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vector k6 = rhs(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vector y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vector k7 = rhs(y_new);
    const Vector err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double en = 0.0;
    for (int i = 0; i < n; ++i) {
      const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      en = std::max(en, std::abs(err[i]) / sc);
    }
    if (en <= 1.0) {
      t += h;
      y = y_new;
      k1 = k7;
      for (int i = 0; i < n; ++i)
        if (!std::isfinite(y[i]) || std::abs(y[i]) > kBlowUpBound)
          throw NumericalBlowUp("zero-noise flow blew up", PhaseState::from_stacked(y));
      const double v = energy(y);
      res.max_energy_increase_rate = std::max(res.max_energy_increase_rate, (v - v_prev) / h);
      v_prev = v;
      if (record_trace) {
        res.times.push_back(t);
        res.energies.push_back(v);
      }
      hit = settled(y);
    }
    const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
    h *= fac;
  }
  res.final_state = PhaseState::from_stacked(y);
  res.converged = hit >= 0;
  res.minimum_index = hit;
  res.settle_time = t;
  return res;
}

Matrix linearization_drift(const PotentialModel& model, double gamma, const Vector& z) {
  const int d = model.dimension();
  Matrix A = Matrix::Zero(2 * d, 2 * d);
  A.topRightCorner(d, d).setIdentity();
  A.bottomLeftCorner(d, d) = -eval_hessian(model, z);
  A.bottomRightCorner(d, d) = -gamma * Matrix::Identity(d, d);
  return A;
}

Matrix stationary_covariance(const Matrix& A, const Matrix& JJt) {
  const auto n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  // column-major vec: vec(A S) = (I kron A) vec S, vec(S A^T) = (A kron I) vec S
  Matrix K = Matrix::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      K.block(i * n, j * n, n, n) += I(i, j) * A;
      K.block(i * n, j * n, n, n) += A(i, j) * I;
    }
  const Vector rhs = -Eigen::Map<const Vector>(JJt.data(), n * n);
  const Vector s = K.fullPivLu().solve(rhs);
  Matrix S = Eigen::Map<const Matrix>(s.data(), n, n);
  return 0.5 * (S + S.transpose());
}

CovarianceEvolution evolve_linearization_covariance(const PotentialModel& model, double gamma,
                                                    const Vector& z, double T, double dt,
                                                    double checkpoint_interval) {
  if (!(T > 0.0) || !(dt > 0.0) || dt > T) throw InputError("need 0 < dt <= T");
  const int d = model.dimension();
  const Matrix A = linearization_drift(model, gamma, z);
  Eigen::EigenSolver<Matrix> es(A, false);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i].real() >= 0.0)
      throw StabilityError("linearization drift has an eigenvalue with non-negative real part; "
                           "the point is not a minimum");
  Matrix JJt = Matrix::Zero(2 * d, 2 * d);
  JJt.bottomRightCorner(d, d).setIdentity();

  CovarianceEvolution out;
  out.sigma_limit = stationary_covariance(A, JJt);
  auto f = [&](const Matrix& S) -> Matrix { return A * S + S * A.transpose() + JJt; };
  Matrix S = Matrix::Zero(2 * d, 2 * d);
  const auto n_steps = static_cast<long>(std::llround(T / dt));
  const long every = std::max<long>(1, std::lround(checkpoint_interval / dt));
  auto record = [&](double t) {
    out.times.push_back(t);
    out.sigma.push_back(S);
    out.distance.push_back((S - out.sigma_limit).norm());
  };
  record(0.0);
  for (long k = 1; k <= n_steps; ++k) {
    const Matrix k1 = f(S);
    const Matrix k2 = f(S + 0.5 * dt * k1);
    const Matrix k3 = f(S + 0.5 * dt * k2);
    const Matrix k4 = f(S + dt * k3);
    S += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    S = 0.5 * (S + S.transpose());
    if (k % every == 0 || k == n_steps) record(static_cast<double>(k) * dt);
  }

  // least squares on the tail, ignoring points already at rounding level
  std::vector<double> xs, ys;
  for (std::size_t i = out.times.size() / 2; i < out.times.size(); ++i) {
    if (out.distance[i] > 1e-13) {
      xs.push_back(out.times[i]);
      ys.push_back(std::log(out.distance[i]));
    }
  }
  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
      syy += ys[i] * ys[i];
    }
    const double cxx = sxx - sx * sx / n, cxy = sxy - sx * sy / n, cyy = syy - sy * sy / n;
    out.tail_slope = cxy / cxx;
    out.tail_r_squared = cyy > 0 ? cxy * cxy / (cxx * cyy) : 1.0;
  }
  return out;
}

CoupledProbeResult coupled_distance_probe(const PotentialModel& model, double gamma, double epsilon,
                                          double alpha, const PhaseState& start, double T,
                                          const IntegratorConfig& config, double box) {
  if (alpha < 0.0) throw InputError("alpha must be non-negative");
  if (!(T > 0.0)) throw InputError("T must be positive");
  const int d = model.dimension();
  const double dt = config.dt;
  const NoiseStream rng(config.rng_seed, config.stream_id);
  std::vector<double> noise(2 * d);
  PhaseState x = start, y = start;  // forward, perturbed
  Vector gx(d), gy(d), btilde = Vector::Zero(d);
  Matrix h(d, d);
  auto jacobian_norm = [&](const Vector& q) {
    model.hessian(q, h);
    Matrix J = Matrix::Zero(2 * d, 2 * d);
    J.topLeftCorner(d, d) = -alpha * h;
    J.topRightCorner(d, d).setIdentity();
    J.bottomLeftCorner(d, d) = -h;
    J.bottomRightCorner(d, d) = -gamma * Matrix::Identity(d, d);
    return Eigen::JacobiSVD<Matrix>(J).singularValues()(0);
  };

  CoupledProbeResult out;
  std::vector<double> dist, drift_int, noise_sup;
  double integral = 0.0, sup_b = 0.0;
  out.lipschitz = std::max(jacobian_norm(x.q), 0.0);
  const auto n_steps = static_cast<long>(std::llround(T / dt));
  long k = 0;
  for (; k < n_steps; ++k) {
    rng.normals(static_cast<std::uint64_t>(k), noise);
    const auto xp = Eigen::Map<const Vector>(noise.data(), d);
    const auto xq = Eigen::Map<const Vector>(noise.data() + d, d);
    model.gradient(x.q, gx);
    model.gradient(y.q, gy);
    integral += alpha * gx.norm() * dt;
    const double sn = std::sqrt(2.0 * gamma * epsilon * dt);
    const Vector xq_new = x.q + dt * x.p;
    const Vector xp_new = x.p - dt * (gx + gamma * x.p) + sn * xp;
    const Vector yq_new = y.q + dt * (y.p - alpha * gy) + std::sqrt(2.0 * alpha * epsilon * dt) * xq;
    const Vector yp_new = y.p - dt * (gy + gamma * y.p) + sn * xp;
    x = {xq_new, xp_new};
    y = {yq_new, yp_new};
    btilde += std::sqrt(dt) * xq;
    sup_b = std::max(sup_b, btilde.norm());
    if (phase_norm(x) > box || phase_norm(y) > box || !std::isfinite(phase_norm(y))) {
      out.truncated = true;
      ++k;
      break;
    }
    out.lipschitz = std::max({out.lipschitz, jacobian_norm(x.q), jacobian_norm(y.q)});
    const double dd = std::sqrt((x.q - y.q).squaredNorm() + (x.p - y.p).squaredNorm());
    dist.push_back(dd);
    drift_int.push_back(integral);
    noise_sup.push_back(sup_b);
    out.max_distance = std::max(out.max_distance, dd);
  }
  out.end_time = static_cast<double>(k) * dt;
  const double amp = std::sqrt(2.0 * alpha * epsilon);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double t = static_cast<double>(i + 1) * dt;
    const double bound = std::exp(out.lipschitz * t) * (drift_int[i] + amp * noise_sup[i]);
    if (dist[i] > bound) out.within_bound = false;
    out.gronwall_bound = bound;
  }
  return out;
}

double select_time_step(const PotentialModel& model, double gamma, const PhaseState& start,
                        Scheme scheme, double dt, double horizon, double tol, double min_dt) {
  const std::vector<double> none;
  while (true) {
    Stepper s(ProcessKind::zero_noise(), model, gamma, 0.0, dt, scheme);
    PhaseState x = start;
    double v_min = hamiltonian(model, x), worst = 0.0;
    const auto n = static_cast<long>(std::llround(horizon / dt));
    for (long k = 0; k < n; ++k) {
      s.advance(x, none);
      guard(x);
      const double v = hamiltonian(model, x);
      worst = std::max(worst, v - v_min);
      v_min = std::min(v_min, v);
    }
    if (worst / horizon <= tol || dt / 2 < min_dt) return dt;
    dt /= 2;
  }
}

}  // namespace kramers
