#pragma once

#include <cstdint>
#include <vector>

#include "kramers/dynamics.hpp"
#include "kramers/quadrature.hpp"
#include "kramers/rates.hpp"

namespace kramers {

// exact: V as given by the model. harmonic: V replaced by its quadratic expansion at the saddle
// (boundary terms) or at m (numerator); this is the exact-quadratic control.
enum class EnergyMode { exact, harmonic };

// default cutoff of the phase space domain: U(sigma) + max(8, 30 eps)
double default_truncation_energy(const LandscapeReport& report, double epsilon);

struct PartitionResult {
  double Z_eps = 0.0;
  double laplace_approx = 0.0;
  double ratio = 0.0;
  double refinement_change = 0.0;  // relative change under a tighter tolerance
};

// laplace sum runs over the given minima
PartitionResult partition_function(const PotentialModel& model,
                                   const std::vector<CriticalPoint>& minima, double epsilon,
                                   double truncation_energy, const QuadratureOptions& quad = {});
PartitionResult partition_function(const PotentialModel& model, const LandscapeReport& report,
                                   double epsilon, double truncation_energy,
                                   const QuadratureOptions& quad = {});

struct TightnessResult {
  double a = 0.0;
  std::vector<double> epsilons;
  std::vector<double> values;
  bool bounded = false;
};

TightnessResult tightness_probe(const PotentialModel& model, double a,
                                const std::vector<double>& epsilon_grid, double truncation_energy,
                                const QuadratureOptions& quad = {});

// e^{ref/eps} * integral over {lower <= V <= upper} of e^{-V/eps}
double energy_band_integral(const PotentialModel& model, double epsilon, double lower, double upper,
                            double reference_energy, const QuadratureOptions& quad = {});

struct SaddleBox {
  double K = 4.0;
  double delta = 0.0;
  Vector half_widths;  // along the frame basis
  bool contains(const Vector& coords) const;
};

SaddleBox build_saddle_box(const SaddleFrame& frame, double epsilon, double K);

struct TestFunction {
  SaddleFrame frame;
  SaddleBox box;
  double epsilon = 0.0;
  double theta = 0.0;
  double saddle_energy = 0.0;  // U(sigma)

  double projection(const PhaseState& x) const;  // <x - (sigma, 0), v>
  double j_of(double s) const;
  double dj_of(double s) const;
  double d2j_of(double s) const;
  double j(const PhaseState& x) const { return j_of(projection(x)); }
  // mirror of x through the hyperplane <x, v> = 0
  PhaseState reflect(const PhaseState& x) const;
  // ramp on the two x_1 faces: 1 deeper than theta inside, 0 outside the box
  double varphi_theta(double x1) const;
  // 1 on {V <= U(sigma) + K^2 delta^2 / 2}, 0 on {V >= U(sigma) + K^2 delta^2}
  double mollifier(double V) const;
  FunctionBundle bundle() const;
};

TestFunction build_test_function(const SaddleFrame& frame, double epsilon, double K, double theta,
                                 double saddle_energy = 0.0);

// L_eps j at x with the linearized (at sigma) or the exact force
double linearized_generator_j(const TestFunction& test, double gamma, const PhaseState& x);
double full_generator_j(const TestFunction& test, const PotentialModel& model, double gamma,
                        const PhaseState& x);

struct HarmonicityResult {
  int n_samples = 0;
  double max_linearized = 0.0;     // max |L~ j| over the samples
  double max_full = 0.0;
  double mean_full = 0.0;          // mean |L j| over the samples
  double integral_full = 0.0;      // (1/Z) int_{K and J} |L j| e^{-V/eps}, NaN unless requested
  double alpha_epsilon = 0.0;
  double integral_ratio = 0.0;     // integral_full / alpha_epsilon
};

double alpha_epsilon_times_Z(const SaddleFrame& frame, double epsilon, double saddle_energy);

HarmonicityResult harmonicity_residual(const SaddleFrame& frame, const TestFunction& test,
                                       const PotentialModel& model, double gamma, double epsilon,
                                       int n_samples, std::uint64_t seed = 7,
                                       EnergyMode mode = EnergyMode::exact,
                                       bool integrate = false, double Z_eps = 0.0,
                                       const QuadratureOptions& quad = {});

struct CapacityEstimate {
  double epsilon = 0.0;
  double K = 0.0;
  double Z_eps = 0.0;
  double boundary_integral = 0.0;
  double alpha_epsilon = 0.0;
  double ratio = 0.0;
  double minus_side_integral = 0.0;
  double minus_ratio = 0.0;
};

// frame is re-oriented internally so that e_1 points toward m
CapacityEstimate boundary_capacity_integral(const PotentialModel& model,
                                            const LandscapeReport& report,
                                            const SaddleFrame& frame, double epsilon, double K,
                                            const QuadratureOptions& quad = {},
                                            EnergyMode mode = EnergyMode::exact,
                                            double Z_eps = 0.0);

struct NumeratorResult {
  double epsilon = 0.0;
  double margin = 0.0;
  double value = 0.0;
  double laplace_formula = 0.0;
  double ratio = 0.0;
};

// margin <= 0 selects the default 0.1 * barrier_from_m
NumeratorResult numerator_integral(const PotentialModel& model, const LandscapeReport& report,
                                   double epsilon, const QuadratureOptions& quad = {},
                                   double margin = 0.0, EnergyMode mode = EnergyMode::exact,
                                   double Z_eps = 0.0);

struct TimeRatio {
  double mean_time_estimate = 0.0;
  double ek_cross_check_ratio = 0.0;
};

TimeRatio predicted_time_ratio(const NumeratorResult& numerator, const CapacityEstimate& capacity,
                               const EKPrediction& prediction);

struct BoxEnergyCheck {
  bool pass = false;
  int n_samples = 0;
  double lateral_margin = 0.0;        // min of V - U(sigma) - 5/4 K^2 delta^2 on lateral faces
  double lateral_margin_units = 0.0;  // same in units of K^2 delta^2
  double dichotomy_a = 0.0;           // largest a for which the face dichotomy holds
};

BoxEnergyCheck box_boundary_energy_check(const PotentialModel& model, const LandscapeReport& report,
                                         const SaddleFrame& frame, double epsilon, double K,
                                         int n_samples, std::uint64_t seed = 11,
                                         EnergyMode mode = EnergyMode::exact);

}  // namespace kramers
