#include <cmath>
#include <vector>

#include "doctest.h"
#include "kramers/errors.hpp"
#include "kramers/potential.hpp"

using namespace kramers;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }
Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

// central differences of the energy, written out here so the library is not its own reference
Vector fd_gradient(const PotentialModel& m, const Vector& q, double h = 1e-6) {
  Vector g(q.size());
  for (int i = 0; i < q.size(); ++i) {
    Vector a = q, b = q;
    a[i] += h;
    b[i] -= h;
    g[i] = (m.energy(a) - m.energy(b)) / (2 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("quartic well matches its closed form") {
  const auto m = PotentialModel::quartic_double_well();
  CHECK(m.dimension() == 1);
  for (double q : {-2.0, -1.0, -0.3, 0.0, 0.7, 1.0, 1.9}) {
    const double e = (q * q - 1) * (q * q - 1) / 4;
    CHECK(m.energy(v1(q)) == doctest::Approx(e).epsilon(1e-14));
    CHECK(eval_gradient(m, v1(q))[0] == doctest::Approx(q * q * q - q).epsilon(1e-14));
    CHECK(eval_hessian(m, v1(q))(0, 0) == doctest::Approx(3 * q * q - 1).epsilon(1e-14));
    CHECK(m.laplacian(v1(q)) == doctest::Approx(3 * q * q - 1).epsilon(1e-14));
  }
}

TEST_CASE("separable well adds the transverse quadratic") {
  const auto m = PotentialModel::separable_double_well({3.0});
  CHECK(m.dimension() == 2);
  const Vector q = v2(0.4, -0.7);
  const double e = std::pow(0.16 - 1, 2) / 4 + 1.5 * 0.49;
  CHECK(m.energy(q) == doctest::Approx(e).epsilon(1e-14));
  const Vector g = eval_gradient(m, q);
  CHECK(g[0] == doctest::Approx(0.064 - 0.4));
  CHECK(g[1] == doctest::Approx(-2.1));
  const Matrix H = eval_hessian(m, q);
  CHECK(H(0, 1) == 0.0);
  CHECK(H(1, 1) == doctest::Approx(3.0));
}

TEST_CASE("dense and sparse polynomial constructors agree") {
  std::vector<double> dense(49, 0.0);
  dense[0] = 1.0;        // 1
  dense[3] = -2.0;       // q1^3
  dense[1 + 7 * 2] = 0.5;  // q1 q2^2
  dense[7 * 6] = 0.25;   // q2^6
  const auto a = PotentialModel::polynomial(2, dense);
  const auto b = PotentialModel::polynomial(
      2, std::vector<Monomial>{{1.0, {0, 0, 0}}, {-2.0, {3, 0, 0}}, {0.5, {1, 2, 0}}, {0.25, {0, 6, 0}}});
  for (const Vector& q : {v2(0.1, 0.2), v2(-1.3, 0.8), v2(2.0, -1.5)}) {
    const double x = q[0], y = q[1];
    const double e = 1 - 2 * x * x * x + 0.5 * x * y * y + 0.25 * std::pow(y, 6);
    CHECK(a.energy(q) == doctest::Approx(e).epsilon(1e-13));
    CHECK(b.energy(q) == doctest::Approx(e).epsilon(1e-13));
    CHECK((eval_gradient(a, q) - eval_gradient(b, q)).norm() < 1e-12);
  }
}

TEST_CASE("gradients agree with finite differences for every family") {
  std::vector<double> dense(343, 0.0);
  dense[4] = 0.25;
  dense[2] = -0.5;
  dense[7 * 2] = 1.0;
  dense[49 * 2] = 2.0;
  dense[1 + 7 + 49] = 0.3;
  const std::vector<PotentialModel> models{PotentialModel::quartic_double_well(),
                                           PotentialModel::separable_double_well({1.0, 2.0}),
                                           PotentialModel::polynomial(3, dense)};
  for (const auto& m : models) {
    Vector q = Vector::LinSpaced(m.dimension(), -0.8, 1.1);
    const Vector g = eval_gradient(m, q);
    CHECK((g - fd_gradient(m, q)).norm() < 1e-7 * (1 + g.norm()));
    const auto c = check_derivatives(m, 50, 2.0, 1);
    CHECK(c.pass);
    CHECK(c.hessian_asymmetry == doctest::Approx(0.0));
  }
}

TEST_CASE("offset shifts energy but not derivatives") {
  const auto m = PotentialModel::quartic_double_well();
  const auto s = m.with_offset(2.5);
  CHECK(s.energy(v1(0.3)) == doctest::Approx(m.energy(v1(0.3)) + 2.5));
  CHECK(eval_gradient(s, v1(0.3))[0] == eval_gradient(m, v1(0.3))[0]);
  const auto n = normalize_offset(s, 2.5);
  CHECK(n.energy(v1(1.0)) == doctest::Approx(0.0));
}

TEST_CASE("hamiltonian adds kinetic energy") {
  const auto m = PotentialModel::quartic_double_well();
  const PhaseState x{v1(0.0), v1(2.0)};
  CHECK(hamiltonian(m, x) == doctest::Approx(0.25 + 2.0));
}

TEST_CASE("quartic growth conditions hold") {
  const auto g = check_growth_conditions(PotentialModel::quartic_double_well(), 0.75,
                                         default_growth_radii());
  CHECK(g.pass);
  CHECK(g.min_ratio_1 > 0.0);
  CHECK(g.min_ratio_2 > 0.0);
}

TEST_CASE("growth fails for a potential that flattens out") {
  // U = q^2 / 2 - q^4 / 100 + q^6 / 10^6 dips over a wide range before the sextic term wins
  const auto m = PotentialModel::polynomial(
      1, std::vector<Monomial>{{0.5, {2, 0, 0}}, {-0.01, {4, 0, 0}}, {1e-6, {6, 0, 0}}});
  const auto g = check_growth_conditions(m, 0.75, {2.0, 5.0, 8.0});
  CHECK_FALSE(g.pass);
}

TEST_CASE("shell directions are unit vectors") {
  for (int d : {1, 2, 3})
    for (const auto& u : shell_directions(d, 16)) CHECK(u.norm() == doctest::Approx(1.0));
}

TEST_CASE("bad inputs throw") {
  const auto m = PotentialModel::quartic_double_well();
  CHECK_THROWS_AS(m.energy(v2(0, 0)), InputError);
  CHECK_THROWS_AS(PotentialModel::polynomial(4, std::vector<Monomial>{}), InputError);
  CHECK_THROWS_AS(PotentialModel::polynomial(2, std::vector<double>(10, 0.0)), InputError);
  CHECK_THROWS_AS(potential_family_from_string("cubic"), InputError);
  CHECK(potential_family_from_string(to_string(PotentialFamily::separable_double_well_nd)) ==
        PotentialFamily::separable_double_well_nd);
}
