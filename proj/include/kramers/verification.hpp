#pragma once

#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "kramers/capacity.hpp"
#include "kramers/hitting.hpp"
#include "kramers/lyapunov.hpp"
#include "kramers/rates.hpp"

namespace kramers {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

// runs body, timing it; an exception fails the check with its message as detail
CheckResult run_check(const std::string& name, const std::function<bool(std::ostream&)>& body);

// model with its landscape and saddle frame
struct ModelContext {
  PotentialModel model;
  double gamma = 1.0;
  LandscapeReport report;
  SaddleFrame frame;
};

ModelContext analyze_model(const PotentialModel& model, double gamma, double search_half_width = 2.5,
                           int grid_density = 40);

// quadratic well U = sum_i w_i q_i^2 / 2
PotentialModel quadratic_well(const std::vector<double>& stiffness);

// Each check states its thresholds in its arguments; callers pin them.

bool derivative_check(const std::vector<PotentialModel>& models, int n_points, double box,
                      std::ostream& out);

bool frame_identity_check(const SaddleFrame& frame, double mu_tol, double eigen_tol,
                          double matrix_tol, double zero_tol, std::ostream& out);

// prefactor ratio kappa_under / kappa_over = mu + gamma
bool prefactor_ratio_check(const LandscapeReport& report, const SaddleFrame& frame, double tol,
                           std::ostream& out);

struct HarmonicitySettings {
  double epsilon = 0.05;
  double K = 4.0;
  int n_samples = 1000;
  double tol = 1e-9;
  std::uint64_t seed = 7;
};
// |L~ j| and, on the quadratic control, |L j| below tol at every sample
bool harmonicity_check(const ModelContext& ctx, const HarmonicitySettings& s, std::ostream& out);

struct LyapunovSettings {
  std::vector<double> global_epsilons{0.5, 0.99};
  double local_epsilon = 0.1;
  int n_samples = 10000;
};
bool lyapunov_check(const ModelContext& ctx, const LyapunovSettings& s, std::ostream& out);

struct FlowSettings {
  int n_starts = 100;
  double tol = 1e-6;
  double rate_tol = 1e-8;  // energy increase per unit time
  double max_time = 1e3;
};
// grid of starts on the m side of the saddle with V below the saddle energy, which keeps them in
// W_m and off the stable manifold of sigma
bool zero_noise_flow_check(const ModelContext& ctx, const FlowSettings& s, std::ostream& out);

bool tightness_check(const ModelContext& ctx, const std::vector<double>& levels,
                     const std::vector<double>& epsilons, double z_tol,
                     const QuadratureOptions& quad, std::ostream& out);

// stationary covariance of the linearization at z against expected, and a decaying tail
bool covariance_check(const PotentialModel& model, double gamma, const Vector& z,
                      const Matrix& expected, double tol, std::ostream& out);

struct GibbsSettings {
  double epsilon = 0.5;
  double gamma = 1.0;
  double dt = 0.01;
  double horizon = 2e5;
  double rel_tol = 0.02;
  std::uint64_t seed = 17;
};
// long splitting run in a quadratic well: Var p = eps and Var q_i = eps / w_i
bool gibbs_marginal_check(const std::vector<double>& stiffness, const GibbsSettings& s,
                          std::ostream& out);

// harmonic control of the capacity route: boundary, numerator and time ratio all near 1
bool harmonic_control_check(const ModelContext& ctx, double epsilon, double K, double tol,
                            const QuadratureOptions& quad, std::ostream& out);

struct HittingSettings {
  std::vector<double> epsilons{0.3, 0.25, 0.2};
  std::vector<double> band_epsilons{0.25, 0.2};
  std::int64_t n_traj = 2000;
  double radius = 0.2;
  double dt = 1e-3;
  double band_lo = 0.4, band_hi = 2.5;
  double slope_rel_tol = 0.25;
  double max_time_factor = 50.0;
  std::uint64_t seed = 1;
  int jobs = 1;
};
bool hitting_time_check(const ModelContext& ctx, const HittingSettings& s, std::ostream& out);

}  // namespace kramers
