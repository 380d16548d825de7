#include "kramers/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "kramers/errors.hpp"
#include "kramers/rng.hpp"

namespace kramers {

namespace {

constexpr double kPi = std::numbers::pi;

void require_low_dimension(const PotentialModel& model) {
  if (model.dimension() > 2) throw InputError("quadrature routines support d <= 2");
}

// U > level on every sampled shell between R and 2R; the sublevel set sits inside [-R, R]^d
double sublevel_radius(const PotentialModel& model, double level) {
  const auto dirs = shell_directions(model.dimension(), 256);
  for (double R = 0.5; R < 1e6; R *= 2) {
    bool outside = true;
    for (double f : {1.0, 1.25, 1.5, 1.75, 2.0}) {
      for (const auto& u : dirs)
        if (model.energy(f * R * u) <= level) {
          outside = false;
          break;
        }
      if (!outside) break;
    }
    if (outside) return R;
  }
  throw InputError("sublevel set of the potential looks unbounded");
}

// smooth step from 0 at t <= 0 to 1 at t >= 1
double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

// e^{-(U - ref)/eps} * measure of momenta with lower - U <= |p|^2/2 <= upper - U under e^{-|p|^2/2eps}
double momentum_band(int d, double U, double lower, double upper, double ref, double eps) {
  const double hi = upper - U;
  if (hi <= 0.0) return 0.0;
  const double lo = std::max(lower - U, 0.0);
  if (lo >= hi) return 0.0;
  if (d == 1) {
    const double a = std::sqrt(lo / eps), b = std::sqrt(hi / eps);
    const double diff = a > 0.5 ? std::erfc(a) - std::erfc(b) : std::erf(b) - std::erf(a);
    return std::exp(-(U - ref) / eps) * std::sqrt(2.0 * kPi * eps) * diff;
  }
  return 2.0 * kPi * eps * (std::exp(-(U - ref + lo) / eps) - std::exp(-(U - ref + hi) / eps));
}

double integrate_positions_box(int d, const Vector& lo, const Vector& hi,
                               const std::function<double(const Vector&)>& g,
                               const QuadratureOptions& quad) {
  std::vector<NestedBounds> bounds;
  for (int i = 0; i < d; ++i)
    bounds.push_back([l = lo[i], h = hi[i]](std::span<const double>) { return std::pair{l, h}; });
  return integrate_nested(
      [&](std::span<const double> x) {
        return g(Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size())));
      },
      bounds, quad);
}

double integrate_positions(int d, double R, const std::function<double(const Vector&)>& g,
                           const QuadratureOptions& quad) {
  return integrate_positions_box(d, Vector::Constant(d, -R), Vector::Constant(d, R), g, quad);
}

}  // namespace

double default_truncation_energy(const LandscapeReport& report, double epsilon) {
  return report.saddle.energy + std::max(8.0, 30.0 * epsilon);
}

double energy_band_integral(const PotentialModel& model, double epsilon, double lower, double upper,
                            double reference_energy, const QuadratureOptions& quad) {
  require_low_dimension(model);
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  const int d = model.dimension();
  const double R = sublevel_radius(model, upper);
  return integrate_positions(
      d, R,
      [&](const Vector& q) {
        return momentum_band(d, model.energy(q), lower, upper, reference_energy, epsilon);
      },
      quad);
}

PartitionResult partition_function(const PotentialModel& model,
                                   const std::vector<CriticalPoint>& minima, double epsilon,
                                   double truncation_energy, const QuadratureOptions& quad) {
  require_low_dimension(model);
  if (minima.empty()) throw InputError("partition function needs at least one minimum");
  const int d = model.dimension();
  double ref = std::numeric_limits<double>::infinity();
  for (const auto& m : minima) ref = std::min(ref, m.energy);
  if (std::exp(-(truncation_energy - ref) / epsilon) > 1e-12)
    throw InputError("truncation energy too low: discarded Gibbs tail above 1e-12");
  const double lower = -std::numeric_limits<double>::infinity();
  const double scaled = energy_band_integral(model, epsilon, lower, truncation_energy, ref, quad);
  QuadratureOptions fine = quad;
  fine.rel_tol *= 1e-2;
  const double scaled_fine = energy_band_integral(model, epsilon, lower, truncation_energy, ref, fine);
  PartitionResult r;
  r.refinement_change = std::abs(scaled_fine - scaled) / std::abs(scaled_fine);
  if (r.refinement_change > 1e-8)
    throw AccuracyError("partition function quadrature unstable under refinement");
  r.Z_eps = scaled * std::exp(-ref / epsilon);
  for (const auto& m : minima)
    r.laplace_approx += std::pow(2.0 * kPi * epsilon, d) / std::sqrt(m.hessian_eigenvalues.prod()) *
                        std::exp(-m.energy / epsilon);
  r.ratio = r.Z_eps / r.laplace_approx;
  return r;
}

PartitionResult partition_function(const PotentialModel& model, const LandscapeReport& report,
                                   double epsilon, double truncation_energy,
                                   const QuadratureOptions& quad) {
  return partition_function(model, std::vector<CriticalPoint>{report.m, report.s}, epsilon, truncation_energy, quad);
}

TightnessResult tightness_probe(const PotentialModel& model, double a,
                                const std::vector<double>& epsilon_grid, double truncation_energy,
                                const QuadratureOptions& quad) {
  if (!(a >= 0.0)) throw InputError("tightness level a must be non-negative");
  TightnessResult r;
  r.a = a;
  r.epsilons = epsilon_grid;
  for (double eps : epsilon_grid)
    r.values.push_back(a >= truncation_energy
                           ? 0.0
                           : energy_band_integral(model, eps, a, truncation_energy, a, quad));
  r.bounded = true;
  for (std::size_t i = 1; i < r.values.size(); ++i)
    if (r.values[i] > 1.1 * r.values[i - 1]) r.bounded = false;
  return r;
}

bool SaddleBox::contains(const Vector& coords) const {
  for (Eigen::Index i = 0; i < coords.size(); ++i)
    if (std::abs(coords[i]) > half_widths[i]) return false;
  return true;
}

SaddleBox build_saddle_box(const SaddleFrame& frame, double epsilon, double K) {
  if (!(K > 0.0)) throw InputError("box constant K must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InputError("box needs 0 < epsilon < 1");
  SaddleBox b;
  b.K = K;
  b.delta = std::sqrt(epsilon * std::log(1.0 / epsilon));
  const int n = 2 * frame.dimension;
  b.half_widths.resize(n);
  b.half_widths[0] = K * b.delta / std::sqrt(frame.lambda[0]);
  for (int i = 1; i < n; ++i) b.half_widths[i] = 2.0 * K * b.delta / std::sqrt(frame.lambda[i]);
  return b;
}

double TestFunction::projection(const PhaseState& x) const {
  const int d = frame.dimension;
  return (x.q - frame.saddle).dot(frame.v.head(d)) + x.p.dot(frame.v.tail(d));
}

double TestFunction::j_of(double s) const {
  return 0.5 * std::erfc(-s * std::sqrt(frame.mu / (2.0 * frame.gamma * epsilon)));
}

double TestFunction::dj_of(double s) const {
  const double c = frame.mu / (frame.gamma * epsilon);
  return std::sqrt(c / (2.0 * kPi)) * std::exp(-0.5 * c * s * s);
}

double TestFunction::d2j_of(double s) const {
  return -frame.mu / (frame.gamma * epsilon) * s * dj_of(s);
}

PhaseState TestFunction::reflect(const PhaseState& x) const {
  const int d = frame.dimension;
  const double s = projection(x);
  const double vv = frame.v.squaredNorm();
  return {x.q - 2.0 * s / vv * frame.v.head(d), x.p - 2.0 * s / vv * frame.v.tail(d)};
}

double TestFunction::varphi_theta(double x1) const {
  const double w = box.half_widths[0] - std::abs(x1);
  if (theta <= 0.0) return w >= 0.0 ? 1.0 : 0.0;
  return smooth_step(w / theta);
}

double TestFunction::mollifier(double V) const {
  const double k2d2 = box.K * box.K * box.delta * box.delta;
  return 1.0 - smooth_step((V - saddle_energy - 0.5 * k2d2) / (0.5 * k2d2));
}

FunctionBundle TestFunction::bundle() const {
  const TestFunction self = *this;
  auto s_of = [self](const Vector& x) {
    return self.projection(PhaseState::from_stacked(x));
  };
  return {[self, s_of](const Vector& x) { return self.j_of(s_of(x)); },
          [self, s_of](const Vector& x) -> Vector { return self.dj_of(s_of(x)) * self.frame.v; },
          [self, s_of](const Vector& x) -> Matrix {
            return self.d2j_of(s_of(x)) * self.frame.v * self.frame.v.transpose();
          }};
}

TestFunction build_test_function(const SaddleFrame& frame, double epsilon, double K, double theta,
                                 double saddle_energy) {
  if (theta < 0.0) throw InputError("theta must be non-negative");
  TestFunction t;
  t.frame = frame;
  t.box = build_saddle_box(frame, epsilon, K);
  t.epsilon = epsilon;
  t.theta = theta;
  t.saddle_energy = saddle_energy;
  return t;
}

namespace {

// bracket of L j shared by both generators: j'(s) [<p, v_q> - <F, v_p> - gamma <p, v_p>] + ...
double generator_on_j(const TestFunction& t, double gamma, const PhaseState& x, const Vector& force) {
  const int d = t.frame.dimension;
  const auto vq = t.frame.v.head(d);
  const auto vp = t.frame.v.tail(d);
  const double s = t.projection(x);
  const double drift = x.p.dot(vq) - force.dot(vp) - gamma * x.p.dot(vp);
  return t.dj_of(s) * drift + gamma * t.epsilon * t.d2j_of(s) * vp.squaredNorm();
}

}  // namespace

double linearized_generator_j(const TestFunction& test, double gamma, const PhaseState& x) {
  const Vector force = test.frame.hessian * (x.q - test.frame.saddle);
  return generator_on_j(test, gamma, x, force);
}

double full_generator_j(const TestFunction& test, const PotentialModel& model, double gamma,
                        const PhaseState& x) {
  return generator_on_j(test, gamma, x, eval_gradient(model, x.q));
}

double alpha_epsilon_times_Z(const SaddleFrame& frame, double epsilon, double saddle_energy) {
  const double det = std::abs(frame.hessian.determinant());
  return std::pow(2.0 * kPi * epsilon, frame.dimension) / (2.0 * kPi) * frame.mu / std::sqrt(det) *
         std::exp(-saddle_energy / epsilon);
}

namespace {

// position energy at frame position coordinates y (length d)
struct FrameEnergy {
  const PotentialModel& model;
  const SaddleFrame& frame;
  EnergyMode mode;
  double saddle_energy;

  double operator()(const Vector& y) const {
    const int d = frame.dimension;
    if (mode == EnergyMode::harmonic) {
      double e = saddle_energy;
      for (int i = 0; i < d; ++i) e += 0.5 * frame.signed_lambda(i) * y[i] * y[i];
      return e;
    }
    return model.energy(frame.saddle + frame.basis.topLeftCorner(d, d) * y);
  }
};

double resolve_Z(const PotentialModel& model, const LandscapeReport& report, double epsilon,
                 double Z_eps, const QuadratureOptions& quad) {
  if (Z_eps > 0.0) return Z_eps;
  return partition_function(model, report, epsilon, default_truncation_energy(report, epsilon), quad)
      .Z_eps;
}

}  // namespace

HarmonicityResult harmonicity_residual(const SaddleFrame& frame, const TestFunction& test,
                                       const PotentialModel& model, double gamma, double epsilon,
                                       int n_samples, std::uint64_t seed, EnergyMode mode,
                                       bool integrate, double Z_eps,
                                       const QuadratureOptions& quad) {
  const int d = frame.dimension;
  if (model.dimension() != d) throw InputError("frame and model dimensions differ");
  const double U_sigma = test.saddle_energy;
  const double k2d2 = test.box.K * test.box.K * test.box.delta * test.box.delta;
  const double level = U_sigma + k2d2;
  const FrameEnergy energy{model, frame, mode, U_sigma};

  auto force_at = [&](const PhaseState& x) -> Vector {
    if (mode == EnergyMode::harmonic) return frame.hessian * (x.q - frame.saddle);
    return eval_gradient(model, x.q);
  };

  HarmonicityResult r;
  const NoiseStream rng(seed, 0);
  std::vector<double> u(2 * d);
  double sum = 0.0;
  std::uint64_t draw = 0;
  while (r.n_samples < n_samples) {
    if (draw > 1000ull * static_cast<std::uint64_t>(n_samples) + 1000)
      throw EstimationError("could not place samples inside the box below the energy cap");
    rng.uniforms(draw++, u);
    Vector y(2 * d);
    for (int i = 0; i < 2 * d; ++i) y[i] = (2.0 * u[i] - 1.0) * test.box.half_widths[i];
    const PhaseState x = frame.from_frame(y);
    const double V = energy(Vector(y.head(d))) + 0.5 * x.p.squaredNorm();
    if (!(V < level)) continue;
    ++r.n_samples;
    r.max_linearized = std::max(r.max_linearized, std::abs(linearized_generator_j(test, gamma, x)));
    const double full = std::abs(generator_on_j(test, gamma, x, force_at(x)));
    r.max_full = std::max(r.max_full, full);
    sum += full;
  }
  r.mean_full = r.n_samples > 0 ? sum / r.n_samples : 0.0;
  r.integral_full = r.integral_ratio = r.alpha_epsilon = std::numeric_limits<double>::quiet_NaN();
  if (!integrate) return r;

  // (1/Z) int_{K and V < level} |L j| e^{-V/eps}; the last momentum axis for d = 2 is done
  // analytically because L j does not depend on it
  const double aZ = alpha_epsilon_times_Z(frame, epsilon, U_sigma);
  const auto& hw = test.box.half_widths;
  std::function<double(std::span<const double>)> integrand;
  std::vector<NestedBounds> bounds;
  for (int i = 0; i < d; ++i)
    bounds.push_back([w = hw[i]](std::span<const double>) { return std::pair{-w, w}; });
  // momentum along u: |x_{d}| bounded by box and by the energy cap
  bounds.push_back([&, w = hw[d]](std::span<const double> outer) {
    const double Uq = energy(Eigen::Map<const Vector>(outer.data(), d));
    const double r2 = 2.0 * (level - Uq);
    if (r2 <= 0.0) return std::pair{0.0, 0.0};
    const double c = std::min(w, std::sqrt(r2));
    return std::pair{-c, c};
  });
  integrand = [&](std::span<const double> c) {
    Vector y = Vector::Zero(2 * d);
    for (int i = 0; i <= d; ++i) y[i] = c[i];
    const PhaseState x = frame.from_frame(y);
    const double Uq = energy(Vector(y.head(d)));
    const double pu = c[d];
    double weight = std::exp(-(Uq - U_sigma) / epsilon) * std::exp(-0.5 * pu * pu / epsilon);
    if (d == 2) {
      const double rem = level - Uq - 0.5 * pu * pu;
      if (rem <= 0.0) return 0.0;
      const double lim = std::min(hw[3], std::sqrt(2.0 * rem));
      weight *= std::sqrt(2.0 * kPi * epsilon) * std::erf(lim / std::sqrt(2.0 * epsilon));
    }
    return std::abs(generator_on_j(test, gamma, x, force_at(x))) * weight;
  };
  // |L j| has kinks, so a tight tolerance only burns panels
  QuadratureOptions q = quad;
  q.rel_tol = std::max(q.rel_tol, 1e-7);
  const double scaled = integrate_nested(integrand, bounds, q);
  // scaled integral carries e^{U(sigma)/eps}; the ratio to alpha is Z free
  r.integral_ratio = scaled * std::exp(-U_sigma / epsilon) / aZ;
  if (Z_eps > 0.0) {
    r.alpha_epsilon = aZ / Z_eps;
    r.integral_full = r.integral_ratio * r.alpha_epsilon;
  }
  return r;
}

CapacityEstimate boundary_capacity_integral(const PotentialModel& model,
                                            const LandscapeReport& report,
                                            const SaddleFrame& frame_in, double epsilon, double K,
                                            const QuadratureOptions& quad, EnergyMode mode,
                                            double Z_eps) {
  require_low_dimension(model);
  const int d = model.dimension();
  const SaddleFrame frame = orient_toward(frame_in, report.m.location);
  const TestFunction test = build_test_function(frame, epsilon, K, 0.0, report.saddle.energy);
  const double U_sigma = report.saddle.energy;
  const double level = U_sigma + K * K * test.box.delta * test.box.delta;
  const FrameEnergy energy{model, frame, mode, U_sigma};
  const auto& hw = test.box.half_widths;
  const double v1 = frame.v_in_basis[0], vd = frame.v_in_basis[d];

  // side = +1: (-x_{d+1})(1 - j) on the m face; side = -1: x_{d+1} j on the far face
  auto face = [&](double side) {
    const double x1 = side * hw[0];
    std::vector<NestedBounds> bounds;
    for (int i = 1; i < d; ++i)
      bounds.push_back([w = hw[i]](std::span<const double>) { return std::pair{-w, w}; });
    auto position = [&, x1](std::span<const double> outer) {
      Vector y(d);
      y[0] = x1;
      for (int i = 1; i < d; ++i) y[i] = outer[i - 1];
      return y;
    };
    bounds.push_back([&, position](std::span<const double> outer) {
      const double Uq = energy(position(outer));
      const double r2 = 2.0 * (level - Uq);
      if (r2 <= 0.0) return std::pair{0.0, 0.0};
      const double c = std::min(hw[d], std::sqrt(r2));
      return std::pair{-c, c};
    });
    auto integrand = [&, x1, side, position](std::span<const double> c) {
      const double pu = c[d - 1];
      const double Uq = energy(position(c));
      const double s = x1 * v1 + pu * vd;
      // 1 - j(s) = j(-s)
      const double w = side > 0 ? -pu * test.j_of(-s) : pu * test.j_of(s);
      double weight = std::exp(-(Uq - U_sigma) / epsilon - 0.5 * pu * pu / epsilon);
      if (d == 2) {
        const double rem = level - Uq - 0.5 * pu * pu;
        if (rem <= 0.0) return 0.0;
        const double lim = std::min(hw[3], std::sqrt(2.0 * rem));
        weight *= std::sqrt(2.0 * kPi * epsilon) * std::erf(lim / std::sqrt(2.0 * epsilon));
      }
      return w * weight;
    };
    return integrate_nested(integrand, bounds, quad);
  };

  CapacityEstimate c;
  c.epsilon = epsilon;
  c.K = K;
  c.Z_eps = resolve_Z(model, report, epsilon, Z_eps, quad);
  const double aZ_scaled =
      std::pow(2.0 * kPi * epsilon, d) / (2.0 * kPi) * frame.mu / std::sqrt(std::abs(frame.hessian.determinant()));
  const double plus = face(+1.0), minus = face(-1.0);
  c.ratio = plus / aZ_scaled;
  c.minus_ratio = minus / aZ_scaled;
  const double scale = std::exp(-U_sigma / epsilon) / c.Z_eps;
  c.alpha_epsilon = aZ_scaled * scale;
  c.boundary_integral = plus * scale;
  c.minus_side_integral = minus * scale;
  return c;
}

namespace {

// which minimum steepest descent reaches from q: 0 for m, 1 for s
int descent_basin(const PotentialModel& model, const LandscapeReport& report, Vector q) {
  const double r0 = 0.05 * (report.m.location - report.s.location).norm();
  const int d = model.dimension();
  Vector g(d);
  double t = 0.1;
  double U = model.energy(q);
  for (int it = 0; it < 10000; ++it) {
    if ((q - report.m.location).norm() < r0) return 0;
    if ((q - report.s.location).norm() < r0) return 1;
    model.gradient(q, g);
    const double g2 = g.squaredNorm();
    if (g2 == 0.0) break;
    for (int ls = 0; ls < 60; ++ls) {
      const Vector trial = q - t * g;
      const double Ut = model.energy(trial);
      if (Ut <= U - 0.5 * t * g2) {
        q = trial;
        U = Ut;
        t *= 2.0;
        break;
      }
      t *= 0.5;
    }
  }
  throw ClassificationError("steepest descent did not reach a minimum");
}

}  // namespace

NumeratorResult numerator_integral(const PotentialModel& model, const LandscapeReport& report,
                                   double epsilon, const QuadratureOptions& quad, double margin,
                                   EnergyMode mode, double Z_eps) {
  require_low_dimension(model);
  const int d = model.dimension();
  NumeratorResult r;
  r.epsilon = epsilon;
  r.margin = margin > 0.0 ? margin : 0.1 * report.barrier_from_m;
  const double level = report.saddle.energy - r.margin;
  const double Um = report.m.energy;
  if (!(level > Um)) throw InputError("numerator margin leaves an empty region");
  const Matrix Hm = eval_hessian(model, report.m.location);
  const double det_m = report.m.hessian_eigenvalues.prod();

  double scaled = 0.0;
  if (mode == EnergyMode::harmonic) {
    const Matrix Hinv = Hm.inverse();
    Vector lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
      const double w = std::sqrt(2.0 * (level - Um) * Hinv(i, i));
      lo[i] = report.m.location[i] - w;
      hi[i] = report.m.location[i] + w;
    }
    scaled = integrate_positions_box(
        d, lo, hi,
        [&](const Vector& q) {
          const Vector dq = q - report.m.location;
          const double U = Um + 0.5 * dq.dot(Hm * dq);
          return momentum_band(d, U, -std::numeric_limits<double>::infinity(), level, Um, epsilon);
        },
        quad);
  } else {
    const double R = sublevel_radius(model, level);
    scaled = integrate_positions(
        d, R,
        [&](const Vector& q) {
          const double U = model.energy(q);
          if (U >= level) return 0.0;
          if (descent_basin(model, report, q) != 0) return 0.0;
          return momentum_band(d, U, -std::numeric_limits<double>::infinity(), level, Um, epsilon);
        },
        quad);
  }
  const double Z = resolve_Z(model, report, epsilon, Z_eps, quad);
  const double laplace_scaled = std::pow(2.0 * kPi * epsilon, d) / std::sqrt(det_m);
  r.ratio = scaled / laplace_scaled;
  r.value = scaled * std::exp(-Um / epsilon) / Z;
  r.laplace_formula = laplace_scaled * std::exp(-Um / epsilon) / Z;
  return r;
}

TimeRatio predicted_time_ratio(const NumeratorResult& numerator, const CapacityEstimate& capacity,
                               const EKPrediction& prediction) {
  if (numerator.epsilon != capacity.epsilon || capacity.epsilon != prediction.epsilon)
    throw InputError("numerator, capacity and prediction use different epsilon");
  if (!(capacity.boundary_integral > 0.0)) throw EstimationError("capacity is zero");
  TimeRatio t;
  t.mean_time_estimate = numerator.value / capacity.boundary_integral;
  t.ek_cross_check_ratio = t.mean_time_estimate / prediction.predicted_mean_time;
  return t;
}

BoxEnergyCheck box_boundary_energy_check(const PotentialModel& model, const LandscapeReport& report,
                                         const SaddleFrame& frame_in, double epsilon, double K,
                                         int n_samples, std::uint64_t seed, EnergyMode mode) {
  const SaddleFrame frame = orient_toward(frame_in, report.m.location);
  const int d = frame.dimension;
  const SaddleBox box = build_saddle_box(frame, epsilon, K);
  const double U_sigma = report.saddle.energy;
  const double k2d2 = K * K * box.delta * box.delta;
  const FrameEnergy energy{model, frame, mode, U_sigma};
  const NoiseStream rng(seed, 1);
  std::vector<double> u(2 * d + 1);
  BoxEnergyCheck r;
  r.n_samples = n_samples;
  r.lateral_margin = std::numeric_limits<double>::infinity();
  r.dichotomy_a = std::numeric_limits<double>::infinity();
  auto V_of = [&](const Vector& y) { return energy(Vector(y.head(d))) + 0.5 * y.tail(d).squaredNorm(); };
  auto draw = [&](std::uint64_t k) {
    rng.uniforms(k, u);
    Vector y(2 * d);
    for (int i = 0; i < 2 * d; ++i) y[i] = (2.0 * u[i] - 1.0) * box.half_widths[i];
    return y;
  };
  for (int k = 0; k < n_samples; ++k) {
    // lateral faces: any axis but x_1
    Vector y = draw(2 * static_cast<std::uint64_t>(k));
    const int pick = std::min(static_cast<int>(u[2 * d] * 2 * (2 * d - 1)), 2 * (2 * d - 1) - 1);
    const int axis = 1 + pick / 2;
    y[axis] = (pick % 2 == 0 ? 1.0 : -1.0) * box.half_widths[axis];
    r.lateral_margin = std::min(r.lateral_margin, V_of(y) - U_sigma - 1.25 * k2d2);

    // x_1 faces: either <x, v> beyond a K delta on the outer side or V above U(sigma) + a K^2 delta^2
    y = draw(2 * static_cast<std::uint64_t>(k) + 1);
    const double side = u[2 * d] < 0.5 ? 1.0 : -1.0;
    y[0] = side * box.half_widths[0];
    const double s = y.dot(frame.v_in_basis);
    r.dichotomy_a = std::min(r.dichotomy_a,
                             std::max(side * s / (K * box.delta), (V_of(y) - U_sigma) / k2d2));
  }
  r.lateral_margin_units = r.lateral_margin / k2d2;
  r.pass = r.lateral_margin > 0.0 && r.dichotomy_a > 0.0;
  return r;
}

}  // namespace kramers
