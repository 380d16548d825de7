#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kramers/types.hpp"

namespace kramers {

enum class PotentialFamily { quartic_double_well_1d, separable_double_well_nd, polynomial_custom };

std::string to_string(PotentialFamily f);
PotentialFamily potential_family_from_string(const std::string& name);

inline constexpr int kMaxPolynomialDimension = 3;
inline constexpr int kMaxPolynomialDegree = 6;

struct Monomial {
  double coefficient = 0.0;
  std::array<int, kMaxPolynomialDimension> exponents{};
};

// Immutable after construction. All evaluators are pure.
class PotentialModel {
 public:
  // (q^2-1)^2/4
  static PotentialModel quartic_double_well();
  // (q1^2-1)^2/4 + sum_i w_i q_i^2/2, one stiffness w_i = omega_i^2 per extra coordinate
  static PotentialModel separable_double_well(std::vector<double> transverse_stiffness);
  // dense coefficient tensor, index sum_i e_i * 7^i, entries past total degree 6 must vanish
  static PotentialModel polynomial(int dimension, std::span<const double> dense_coefficients);
  static PotentialModel polynomial(int dimension, const std::vector<Monomial>& terms);

  int dimension() const { return dimension_; }
  PotentialFamily family() const { return family_; }
  const std::vector<double>& parameters() const { return parameters_; }
  double offset() const { return offset_; }
  PotentialModel with_offset(double offset) const;

  double energy(const Eigen::Ref<const Vector>& q) const;
  // allocation free, out must have size d
  void gradient(const Eigen::Ref<const Vector>& q, Eigen::Ref<Vector> out) const;
  void hessian(const Eigen::Ref<const Vector>& q, Eigen::Ref<Matrix> out) const;
  double laplacian(const Eigen::Ref<const Vector>& q) const;

 private:
  struct Poly {
    std::vector<Monomial> terms;
    double eval(const Eigen::Ref<const Vector>& q, int d) const;
  };

  PotentialModel() = default;
  void build_derivatives();
  void check(const Eigen::Ref<const Vector>& q) const;

  int dimension_ = 1;
  PotentialFamily family_ = PotentialFamily::quartic_double_well_1d;
  std::vector<double> parameters_;
  double offset_ = 0.0;
  Poly value_;
  std::vector<Poly> grad_;
  std::vector<Poly> hess_;  // row major d*d
};

double eval_energy(const PotentialModel& model, const Vector& q);
Vector eval_gradient(const PotentialModel& model, const Vector& q);
Matrix eval_hessian(const PotentialModel& model, const Vector& q);
double hamiltonian(const PotentialModel& model, const PhaseState& x);

struct GrowthReport {
  double beta = 0.0;
  std::vector<double> radii;
  // per shell minima, last entry is the outermost shell
  std::vector<double> shell_min_ratio_1;
  std::vector<double> shell_min_ratio_2;
  double min_ratio_1 = 0.0;
  double min_ratio_2 = 0.0;
  bool pass = false;
};

std::vector<double> default_growth_radii();

GrowthReport check_growth_conditions(const PotentialModel& model, double beta,
                                     const std::vector<double>& radius_grid,
                                     int samples_per_shell = 64);

// unit directions used by the shell samplers: evenly spaced on the circle, fibonacci on the sphere
std::vector<Vector> shell_directions(int dimension, int count);

PotentialModel normalize_offset(const PotentialModel& model, double landscape_min_value);

// max relative error of gradient vs central differences of energy and Hessian vs differences
// of the gradient, plus the Hessian asymmetry, over n random points in [-box, box]^d
struct DerivativeCheck {
  double gradient_error = 0.0;
  double hessian_error = 0.0;
  double hessian_asymmetry = 0.0;
  bool pass = false;
};
DerivativeCheck check_derivatives(const PotentialModel& model, int n_points, double box,
                                  std::uint64_t seed);

}  // namespace kramers
