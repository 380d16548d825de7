#pragma once

#include <cstdint>
#include <vector>

#include "kramers/dynamics.hpp"
#include "kramers/landscape.hpp"

namespace kramers {

// H(x) = |p|^2/2 + a <q - z, p> + a^2 |q - z|^2 + U(q) - shift, a = (gamma - lambda)/2.
// The global function has z = 0 and shift = 0.
struct LyapunovForm {
  Vector z;
  double gamma = 1.0;
  double lambda = 0.0;
  double shift = 0.0;

  double a() const { return 0.5 * (gamma - lambda); }
  double value(const PotentialModel& model, const PhaseState& x) const;
  // bundle of H, or of exp(alpha H / eps) when alpha > 0
  FunctionBundle bundle(const PotentialModel& model, double alpha = 0.0, double epsilon = 1.0) const;
};

struct GlobalLyapunov {
  LyapunovForm form;
  double c = 0.0;    // growth constant: <q, grad U> >= c (|q|^2 + U) for |q| >= M1
  double M1 = 0.0;
  double M = 0.0;
  double R = 0.0;    // built at eps = 1
  double lambda() const { return form.lambda; }
  bool in_compact_set(const PhaseState& x) const { return x.q.norm() <= M && x.p.norm() <= R; }
};

GlobalLyapunov build_global_lyapunov(const PotentialModel& model, double gamma);

struct LyapunovViolations {
  int n_samples = 0;
  int n_violations = 0;
  double max_residual = 0.0;  // largest value of the left minus right side
  std::vector<PhaseState> violations;  // first few offenders
};

// samples uniformly in [-3M, 3M]^d x [-3R, 3R]^d outside the compact set
LyapunovViolations verify_global_lyapunov(const GlobalLyapunov& g, const PotentialModel& model,
                                          double epsilon, int n_samples, std::uint64_t seed = 3);

struct LocalLyapunov {
  LyapunovForm form;
  double c_local = 0.0;
  double rho = 0.0;
  double C = 0.0;
  double alpha = 0.0;
  double delta_admissible = 0.0;  // largest b with {H < b} inside B((z, 0), rho), sampled
  double lambda() const { return form.lambda; }
};

LocalLyapunov build_local_lyapunov(const PotentialModel& model, const Vector& z, double gamma,
                                   std::uint64_t seed = 5);

struct LocalViolations {
  int n_samples = 0;
  int linear_violations = 0;       // L H <= -lambda H + d gamma eps
  int exponential_violations = 0;  // L e^{alpha H/eps} <= alpha d gamma e^{alpha H/eps}
  double max_linear_residual = -1e300;
  double max_exponential_residual = -1e300;  // relative to e^{alpha H/eps}
};

LocalViolations verify_local_inequalities(const LocalLyapunov& l, const PotentialModel& model,
                                          double epsilon, int n_samples, std::uint64_t seed = 9);

struct ExitProbability {
  double epsilon = 0.0;
  std::int64_t n = 0;
  std::int64_t exits = 0;
  double probability = 0.0;
  double upper_95 = 0.0;  // 3/n rule when no exit is seen
  bool admissible = true;  // b within delta_admissible
};

// starts on {H = a}, exits when H reaches b, horizon t; starts and noise are shared across t
ExitProbability exit_probability_probe(const LocalLyapunov& l, const PotentialModel& model,
                                       double epsilon, double a, double b, double t,
                                       std::int64_t n_traj, std::uint64_t seed = 13, int jobs = 1,
                                       double dt = 1e-3);

struct ExitTrend {
  std::vector<ExitProbability> points;
  double slope = 0.0;  // d log P / d ((b - a)/eps)
  int n_used = 0;
  bool conclusive = false;
};

ExitTrend exit_probability_trend(const LocalLyapunov& l, const PotentialModel& model,
                                 const std::vector<double>& epsilons, double a, double b, double t,
                                 std::int64_t n_traj, std::uint64_t seed = 13, int jobs = 1);

}  // namespace kramers
