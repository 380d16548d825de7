#include <cmath>

#include "doctest.h"
#include "kramers/errors.hpp"
#include "kramers/landscape.hpp"

using namespace kramers;

TEST_CASE("quartic well has two minima and one saddle") {
  const auto m = PotentialModel::quartic_double_well();
  const auto pts = find_critical_points(m, SearchBox::cube(1, 2.5), 40);
  REQUIRE(pts.size() == 3);
  int minima = 0, saddles = 0;
  for (const auto& p : pts) {
    if (p.kind == CriticalKind::minimum) {
      ++minima;
      CHECK(std::abs(std::abs(p.location[0]) - 1.0) < 1e-9);
      CHECK(p.hessian_eigenvalues[0] == doctest::Approx(2.0));
    } else if (p.kind == CriticalKind::index1_saddle) {
      ++saddles;
      CHECK(std::abs(p.location[0]) < 1e-9);
      CHECK(p.energy == doctest::Approx(0.25));
    }
  }
  CHECK(minima == 2);
  CHECK(saddles == 1);

  const auto rep = build_landscape(m, pts);
  CHECK(rep.is_valid_double_well);
  CHECK(rep.barrier_from_m == doctest::Approx(0.25));
  CHECK(rep.barrier_from_s == doctest::Approx(0.25));
  CHECK(rep.lambda_sigma == doctest::Approx(1.0));
  // symmetric barriers: the greater location is m
  CHECK(rep.m.location[0] == doctest::Approx(1.0));
  CHECK(rep.s.location[0] == doctest::Approx(-1.0));

  const auto left = build_landscape(m, pts, Vector::Constant(1, -0.8));
  CHECK(left.m.location[0] == doctest::Approx(-1.0));
}

TEST_CASE("tilted well puts m in the deeper basin") {
  // (q^2-1)^2/4 + 0.1 q: the left well is deeper and has the larger barrier
  const auto m = PotentialModel::polynomial(
      1, std::vector<Monomial>{{0.25, {0, 0, 0}}, {-0.5, {2, 0, 0}}, {0.25, {4, 0, 0}}, {0.1, {1, 0, 0}}});
  const auto rep = build_landscape(m, find_critical_points(m, SearchBox::cube(1, 2.5), 40));
  CHECK(rep.m.location[0] < 0.0);
  CHECK(rep.barrier_from_m > rep.barrier_from_s);
  // barrier equals U(sigma) - U(m) computed directly
  const double us = m.energy(rep.saddle.location), um = m.energy(rep.m.location);
  CHECK(rep.barrier_from_m == doctest::Approx(us - um).epsilon(1e-10));
}

TEST_CASE("separable well in 2d") {
  const auto m = PotentialModel::separable_double_well({2.0});
  const auto rep = build_landscape(m, find_critical_points(m, SearchBox::cube(2, 2.5), 30));
  CHECK(rep.is_valid_double_well);
  CHECK(rep.saddle.location.norm() < 1e-9);
  CHECK(rep.saddle.hessian_eigenvalues[0] == doctest::Approx(-1.0));
  CHECK(rep.saddle.hessian_eigenvalues[1] == doctest::Approx(2.0));
  CHECK(rep.n_minima == 2);
  CHECK(rep.n_saddles == 1);
}

TEST_CASE("single well is rejected") {
  const auto m = PotentialModel::polynomial(1, std::vector<Monomial>{{0.5, {2, 0, 0}}});
  const auto pts = find_critical_points(m, SearchBox::cube(1, 2.0), 20);
  REQUIRE(pts.size() == 1);
  CHECK_THROWS_AS(build_landscape(m, pts), StructuralError);
}

TEST_CASE("classification by hessian signature") {
  const auto m = PotentialModel::separable_double_well({2.0});
  Vector q = Vector::Zero(2);
  CHECK(classify_point(m, q).kind == CriticalKind::index1_saddle);
  q[0] = 1.0;
  CHECK(classify_point(m, q).kind == CriticalKind::minimum);
}

TEST_CASE("well membership follows the zero-noise flow") {
  const auto m = PotentialModel::quartic_double_well();
  const auto rep = build_landscape(m, find_critical_points(m, SearchBox::cube(1, 2.5), 40));
  const auto at = [](double q, double p) { return PhaseState{Vector::Constant(1, q), Vector::Constant(1, p)}; };
  CHECK(well_membership(m, rep, at(0.9, 0.0)) == WellMembership::W_m);
  CHECK(well_membership(m, rep, at(-0.9, 0.0)) == WellMembership::W_s);
  // the wells are sublevel components below the saddle energy
  CHECK(well_membership(m, rep, at(0.1, -1.0)) == WellMembership::outside);
  CHECK(well_membership(m, rep, at(0.3, -0.1)) == WellMembership::W_m);
}

TEST_CASE("bottleneck energy is the saddle energy") {
  const auto m = PotentialModel::quartic_double_well();
  const auto rep = build_landscape(m, find_critical_points(m, SearchBox::cube(1, 2.5), 40));
  CHECK(minimax_path_energy(m, rep, 201) == doctest::Approx(0.25).epsilon(1e-2));
}
