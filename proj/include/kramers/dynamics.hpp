#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kramers/potential.hpp"
#include "kramers/rng.hpp"

namespace kramers {

struct ProcessKind {
  enum class Kind { forward, perturbed, reversed, zero_noise };
  Kind kind = Kind::forward;
  double alpha = 0.0;

  static ProcessKind forward() { return {Kind::forward, 0.0}; }
  static ProcessKind perturbed(double alpha);
  static ProcessKind reversed() { return {Kind::reversed, 0.0}; }
  static ProcessKind zero_noise() { return {Kind::zero_noise, 0.0}; }
};

enum class Scheme { euler_maruyama, splitting_obabo };
std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

struct IntegratorConfig {
  Scheme scheme = Scheme::splitting_obabo;
  double dt = 1e-3;
  double max_time = 1e6;
  std::uint64_t rng_seed = 0;
  std::uint64_t stream_id = 0;
  void validate() const;
};

// normals consumed per step: momentum noise first (d for euler-maruyama, 2d for the two
// half kicks of obabo), then d position normals for the perturbed process
int noise_size(ProcessKind process, Scheme scheme, int dimension);

// One-step map with a reusable gradient cache. Not thread safe; one per worker.
class Stepper {
 public:
  Stepper(ProcessKind process, const PotentialModel& model, double gamma, double epsilon,
          double dt, Scheme scheme);

  int noise_size() const { return noise_size_; }
  void advance(PhaseState& x, std::span<const double> noise);

 private:
  const Vector& gradient_at(const Vector& q);

  ProcessKind process_;
  const PotentialModel& model_;
  double gamma_, epsilon_, dt_;
  Scheme scheme_;
  int d_;
  int noise_size_;
  double ou_c_, ou_sd_;  // half step OU factors
  Vector cached_q_, cached_g_;
  bool cache_valid_ = false;
};

PhaseState step(ProcessKind process, const PotentialModel& model, double gamma, double epsilon,
                const PhaseState& state, double dt, std::span<const double> noise,
                Scheme scheme = Scheme::splitting_obabo);

enum class StopReason { hit_target, hit_avoid, energy_level_crossed, left_domain, timeout };
std::string to_string(StopReason r);

struct StopRule {
  std::optional<Ball> target;
  std::optional<Ball> avoid;
  // fires when V - level changes sign relative to the start
  std::optional<double> energy_level;
  // fires when |x| exceeds the radius
  std::optional<double> domain_radius;
  // fires when the function becomes >= 0, reported as energy_level_crossed
  std::function<double(const PhaseState&)> level_function;
};

struct StopEvent {
  StopReason reason = StopReason::timeout;
  double time = 0.0;
  PhaseState state;
  std::uint64_t steps = 0;
};

inline constexpr double kBlowUpBound = 1e8;

StopEvent integrate_until(ProcessKind process, const PotentialModel& model, double gamma,
                          double epsilon, const PhaseState& start, const StopRule& stop,
                          const IntegratorConfig& config);
StopEvent integrate_until(ProcessKind process, const PotentialModel& model, double gamma,
                          double epsilon, const PhaseState& start, const StopRule& stop,
                          const IntegratorConfig& config, const NoiseStream& rng);

// f and its derivatives on R^{2d}, x = (q, p)
struct FunctionBundle {
  std::function<double(const Vector&)> f;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;
};

// throws ContractError when the bundle derivatives disagree with finite differences
void check_bundle_consistency(const FunctionBundle& bundle, const Vector& x, double tol = 1e-4);

double apply_generator(const PotentialModel& model, double gamma, double epsilon,
                       const FunctionBundle& bundle, const PhaseState& x, bool adjoint = false,
                       bool check_consistency = false);

struct ZeroNoiseFlowResult {
  bool converged = false;
  PhaseState final_state;
  int minimum_index = -1;  // into the minima list
  double settle_time = 0.0;
  std::vector<double> times;
  std::vector<double> energies;
  // largest V increase per unit time between consecutive accepted steps
  double max_energy_increase_rate = 0.0;
};

ZeroNoiseFlowResult run_zero_noise_flow(const PotentialModel& model, double gamma,
                                        const PhaseState& start, const std::vector<Vector>& minima,
                                        double tol, double max_time, bool record_trace = true);

struct CovarianceEvolution {
  std::vector<double> times;
  std::vector<Matrix> sigma;
  Matrix sigma_limit;
  std::vector<double> distance;  // Frobenius norm of sigma_t - sigma_limit
  double tail_slope = 0.0;       // least squares slope of log distance on the last half
  double tail_r_squared = 0.0;
};

Matrix linearization_drift(const PotentialModel& model, double gamma, const Vector& z);
Matrix stationary_covariance(const Matrix& A, const Matrix& JJt);

CovarianceEvolution evolve_linearization_covariance(const PotentialModel& model, double gamma,
                                                    const Vector& z, double T, double dt,
                                                    double checkpoint_interval = 0.1);

struct CoupledProbeResult {
  double max_distance = 0.0;
  double gronwall_bound = 0.0;  // right hand side at the final time
  double lipschitz = 0.0;
  bool within_bound = true;     // distance(t) <= bound(t) at every step
  bool truncated = false;
  double end_time = 0.0;
};

// forward and perturbed euler-maruyama paths driven by the same normals
CoupledProbeResult coupled_distance_probe(const PotentialModel& model, double gamma, double epsilon,
                                          double alpha, const PhaseState& start, double T,
                                          const IntegratorConfig& config, double box = 1e3);

// halves dt until a noiseless run from start shows no energy increase above tol per unit time
double select_time_step(const PotentialModel& model, double gamma, const PhaseState& start,
                        Scheme scheme, double dt, double horizon = 10.0, double tol = 1e-8,
                        double min_dt = 1e-6);

}  // namespace kramers
