#pragma once

#include <string>

#include "kramers/landscape.hpp"

namespace kramers {

double compute_mu(double gamma, double lambda1);

// Eigen-decomposition of H_V = blockdiag(H_U^sigma, I) at (sigma, 0).
// basis columns: e_i = (h_i, 0) for i < d and e_{d+i} = (0, h_i), with h_0 = u the unstable
// direction. lambda holds magnitudes: lambda[0] = lambda_1 > 0 stands for the eigenvalue -lambda_1.
struct SaddleFrame {
  int dimension = 1;
  double gamma = 1.0;
  Vector saddle;       // sigma
  Vector lambda;       // length 2d
  Matrix basis;        // 2d x 2d, orthonormal columns
  Matrix hessian;      // H_U^sigma
  double mu = 0.0;
  Vector u;            // unit negative eigenvector of H_U^sigma
  Vector v;            // (v_q, v_p) = ((mu + gamma) u, u)
  Vector v_in_basis;

  // signed eigenvalue of H_V along e_i
  double signed_lambda(int i) const { return i == 0 ? -lambda[0] : lambda[i]; }
  // saddle centered coordinates x_i = <(q - sigma, p), e_i>
  Vector to_frame(const PhaseState& x) const;
  PhaseState from_frame(const Vector& coords) const;
};

Matrix rate_matrix_M(int dimension, double gamma);
Matrix hamiltonian_hessian(const SaddleFrame& frame);

SaddleFrame build_saddle_frame(const Matrix& saddle_hessian, double gamma,
                               const Vector& saddle_location, double degeneracy_tol = 1e-8);
SaddleFrame build_saddle_frame(const PotentialModel& model, const LandscapeReport& report,
                               double gamma);

// flip u (and with it e_1, e_{d+1}, v) so that e_1 points toward q
SaddleFrame orient_toward(const SaddleFrame& frame, const Vector& q);

struct FrameIdentityReport {
  double mu_residual = 0.0;            // |mu (mu + gamma) - lambda_1|
  double eigen_residual = 0.0;         // |H_V M v + mu v|_inf
  double matrix_equality_residual = 0.0;
  double shifted_min_abs = 0.0;        // smallest |eigenvalue| of H_V + (mu/gamma) v v^T
  double shifted_min_positive = 0.0;   // smallest of the remaining eigenvalues
  int shifted_near_zero = 0;
  int unit_eigenvalues = 0;            // lambda_i equal to 1 (momentum block)
  bool ok = false;
};

FrameIdentityReport verify_frame_identities(const SaddleFrame& frame);

enum class Regime { underdamped, overdamped };
std::string to_string(Regime r);

struct EKPrediction {
  Regime regime = Regime::underdamped;
  double prefactor = 0.0;
  double exponent = 0.0;
  double epsilon = 0.0;
  double predicted_mean_time = 0.0;
};

EKPrediction ek_prediction(const LandscapeReport& report, const SaddleFrame& frame, double epsilon,
                           Regime regime);

double fw_exponent(const LandscapeReport& report);

}  // namespace kramers
