#include <cmath>
#include <numbers>

#include "doctest.h"
#include "kramers/capacity.hpp"
#include "kramers/errors.hpp"

using namespace kramers;

namespace {

constexpr double kPi = std::numbers::pi;

struct Quartic {
  PotentialModel model = PotentialModel::quartic_double_well();
  LandscapeReport report;
  SaddleFrame frame;
  Quartic() {
    report = build_landscape(model, find_critical_points(model, SearchBox::cube(1, 2.5), 40));
    frame = build_saddle_frame(model, report, 1.0);
  }
};

// composite Simpson on a fine grid, the brute force reference for 1d position integrals
template <class F>
double simpson(F f, double a, double b, int n = 200000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

}  // namespace

TEST_CASE("gauss-legendre rule is exact to degree 2n-1") {
  const auto& r = gauss_legendre(5);
  double w = 0, x8 = 0, x9 = 0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    w += r.weights[i];
    x8 += r.weights[i] * std::pow(r.nodes[i], 8);
    x9 += r.weights[i] * std::pow(r.nodes[i], 9);
  }
  CHECK(w == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(x8 == doctest::Approx(2.0 / 9).epsilon(1e-14));
  CHECK(std::abs(x9) < 1e-15);
}

TEST_CASE("adaptive and nested quadrature against closed forms") {
  const double g = integrate_adaptive([](double x) { return std::exp(-x * x); }, -6, 6);
  CHECK(g == doctest::Approx(std::sqrt(kPi) * std::erf(6.0)).epsilon(1e-12));
  // a kink is handled by bisection
  CHECK(integrate_adaptive([](double x) { return std::abs(x - 0.3); }, -1, 1) ==
        doctest::Approx(0.5 * 1.3 * 1.3 + 0.5 * 0.7 * 0.7).epsilon(1e-10));
  const std::vector<NestedBounds> disk{
      [](std::span<const double>) { return std::pair{-1.0, 1.0}; },
      [](std::span<const double> o) {
        const double h = std::sqrt(std::max(0.0, 1 - o[0] * o[0]));
        return std::pair{-h, h};
      }};
  const double area = integrate_nested([](std::span<const double>) { return 1.0; }, disk);
  CHECK(area == doctest::Approx(kPi).epsilon(1e-9));
}

TEST_CASE("partition function against brute force and Laplace") {
  const Quartic w;
  for (double eps : {0.1, 0.05}) {
    const auto Z = partition_function(w.model, w.report, eps,
                                      default_truncation_energy(w.report, eps));
    const double brute = std::sqrt(2 * kPi * eps) *
                         simpson([&](double q) { return std::exp(-std::pow(q * q - 1, 2) / 4 / eps); }, -4, 4);
    CHECK(Z.Z_eps == doctest::Approx(brute).epsilon(1e-9));
    // two minima with U'' = 2; the located minima carry Newton-level error
    CHECK(Z.laplace_approx == doctest::Approx(2 * 2 * kPi * eps / std::sqrt(2.0)).epsilon(1e-9));
  }
  CHECK(default_truncation_energy(w.report, 0.1) == doctest::Approx(8.25));
  CHECK(default_truncation_energy(w.report, 0.5) == doctest::Approx(15.25));
}

TEST_CASE("tightness probe at a = 0 is the partition function") {
  const Quartic w;
  const double trunc = default_truncation_energy(w.report, 0.1);
  const auto t = tightness_probe(w.model, 0.0, {0.1}, trunc);
  const auto Z = partition_function(w.model, w.report, 0.1, trunc);
  CHECK(t.values[0] == doctest::Approx(Z.Z_eps).epsilon(1e-12));
}

TEST_CASE("energy bands add up") {
  const Quartic w;
  const double a = energy_band_integral(w.model, 0.1, 0.0, 0.1, 0.0);
  const double b = energy_band_integral(w.model, 0.1, 0.1, 0.4, 0.0);
  const double c = energy_band_integral(w.model, 0.1, 0.0, 0.4, 0.0);
  CHECK(a + b == doctest::Approx(c).epsilon(1e-9));
}

TEST_CASE("saddle box half widths") {
  const Quartic w;
  const double eps = 0.02, K = 4.0;
  const auto box = build_saddle_box(w.frame, eps, K);
  const double delta = std::sqrt(eps * std::log(1 / eps));
  CHECK(box.delta == doctest::Approx(delta));
  CHECK(box.half_widths[0] == doctest::Approx(K * delta / std::sqrt(w.frame.lambda[0])));
  CHECK(box.half_widths[1] == doctest::Approx(2 * K * delta / std::sqrt(w.frame.lambda[1])));
  Vector inside = Vector::Zero(2), outside = Vector::Zero(2);
  outside[0] = 1.01 * box.half_widths[0];
  CHECK(box.contains(inside));
  CHECK_FALSE(box.contains(outside));
}

TEST_CASE("test function profile and geometry") {
  const Quartic w;
  const auto t = build_test_function(w.frame, 0.05, 4.0, 0.0, 0.25);
  CHECK(t.j_of(0.0) == doctest::Approx(0.5));
  CHECK(t.j_of(10.0) == doctest::Approx(1.0));
  CHECK(t.j_of(-10.0) == doctest::Approx(0.0));
  const double h = 1e-5;
  for (double s : {-0.2, 0.0, 0.15}) {
    CHECK(t.dj_of(s) == doctest::Approx((t.j_of(s + h) - t.j_of(s - h)) / (2 * h)).epsilon(1e-6));
    CHECK(t.d2j_of(s) == doctest::Approx((t.dj_of(s + h) - t.dj_of(s - h)) / (2 * h)).epsilon(1e-5));
  }
  const PhaseState x{Vector::Constant(1, 0.1), Vector::Constant(1, -0.3)};
  const auto y = t.reflect(x);
  CHECK(t.projection(y) == doctest::Approx(-t.projection(x)));
  const auto z = t.reflect(y);
  CHECK(z.q[0] == doctest::Approx(x.q[0]));
  CHECK(z.p[0] == doctest::Approx(x.p[0]));
  const double k2d2 = 16 * t.box.delta * t.box.delta;
  CHECK(t.mollifier(0.25 + 0.4 * k2d2) == 1.0);
  CHECK(t.mollifier(0.25 + 1.01 * k2d2) == 0.0);
  check_bundle_consistency(t.bundle(), x.stacked());
}

TEST_CASE("j is harmonic for the linearized generator") {
  const Quartic w;
  const auto t = build_test_function(w.frame, 0.05, 4.0, 0.0, 0.25);
  for (double q : {-0.1, 0.0, 0.07})
    for (double p : {-0.2, 0.1})
      CHECK(std::abs(linearized_generator_j(t, 1.0, {Vector::Constant(1, q), Vector::Constant(1, p)})) < 1e-12);
}

TEST_CASE("alpha epsilon closed form") {
  const Quartic w;
  const double eps = 0.05;
  const double mu = (std::sqrt(5.0) - 1) / 2;
  // (2 pi eps)^d / (2 pi) * mu / sqrt|det H_sigma| * exp(-U(sigma)/eps), d = 1
  CHECK(alpha_epsilon_times_Z(w.frame, eps, 0.25) ==
        doctest::Approx(eps * mu * std::exp(-0.25 / eps)).epsilon(1e-14));
}

TEST_CASE("harmonic control reproduces the closed forms") {
  const Quartic w;
  const double eps = 0.02;
  const double Z = partition_function(w.model, w.report, eps, default_truncation_energy(w.report, eps)).Z_eps;
  const auto cap = boundary_capacity_integral(w.model, w.report, w.frame, eps, 4.0, {},
                                              EnergyMode::harmonic, Z);
  CHECK(cap.ratio == doctest::Approx(1.0).epsilon(1e-6));
  const auto num = numerator_integral(w.model, w.report, eps, {}, 0.0, EnergyMode::harmonic, Z);
  CHECK(num.ratio == doctest::Approx(1.0).epsilon(1e-3));
  const auto ek = ek_prediction(w.report, w.frame, eps, Regime::underdamped);
  CHECK(predicted_time_ratio(num, cap, ek).ek_cross_check_ratio == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("exact numerator approaches its Laplace value") {
  const Quartic w;
  const auto a = numerator_integral(w.model, w.report, 0.05);
  const auto b = numerator_integral(w.model, w.report, 0.02);
  CHECK(a.margin == doctest::Approx(0.025));
  CHECK(std::abs(b.ratio - 1) < std::abs(a.ratio - 1));
  CHECK(b.ratio == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("bad inputs") {
  const Quartic w;
  CHECK_THROWS_AS(build_saddle_box(w.frame, 0.0, 4.0), InputError);
  CHECK_THROWS_AS(build_saddle_box(w.frame, 0.05, -1.0), InputError);
}
