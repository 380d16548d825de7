#include "kramers/rates.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "kramers/errors.hpp"

namespace kramers {

double compute_mu(double gamma, double lambda1) {
  if (!(gamma > 0.0) || !(lambda1 > 0.0)) throw InputError("compute_mu needs gamma, lambda1 > 0");
  // 2 lambda / (gamma + sqrt(...)) avoids cancellation at large gamma
  return 2.0 * lambda1 / (gamma + std::sqrt(gamma * gamma + 4.0 * lambda1));
}

Vector SaddleFrame::to_frame(const PhaseState& x) const {
  Vector y(2 * dimension);
  y << x.q - saddle, x.p;
  return basis.transpose() * y;
}

PhaseState SaddleFrame::from_frame(const Vector& coords) const {
  const Vector y = basis * coords;
  return {saddle + y.head(dimension), y.tail(dimension)};
}

Matrix rate_matrix_M(int dimension, double gamma) {
  const int d = dimension;
  Matrix M = Matrix::Zero(2 * d, 2 * d);
  M.topRightCorner(d, d).setIdentity();
  M.bottomLeftCorner(d, d) = -Matrix::Identity(d, d);
  M.bottomRightCorner(d, d) = gamma * Matrix::Identity(d, d);
  return M;
}

Matrix hamiltonian_hessian(const SaddleFrame& frame) {
  const int d = frame.dimension;
  Matrix H = Matrix::Zero(2 * d, 2 * d);
  H.topLeftCorner(d, d) = frame.hessian;
  H.bottomRightCorner(d, d).setIdentity();
  return H;
}

SaddleFrame build_saddle_frame(const Matrix& saddle_hessian, double gamma,
                               const Vector& saddle_location, double degeneracy_tol) {
  const auto d = static_cast<int>(saddle_hessian.rows());
  if (saddle_hessian.cols() != d || saddle_location.size() != d)
    throw InputError("saddle Hessian must be square and match the saddle location");
  if (!(gamma > 0.0)) throw InputError("gamma must be positive");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (saddle_hessian + saddle_hessian.transpose()));
  const Vector& ev = es.eigenvalues();
  for (int i = 0; i < d; ++i)
    if (std::abs(ev[i]) < degeneracy_tol) throw SpectralError("degenerate saddle Hessian");
  if (!(ev[0] < 0.0) || (d > 1 && !(ev[1] > 0.0)))
    throw SpectralError("saddle Hessian must have exactly one negative eigenvalue");

  SaddleFrame f;
  f.dimension = d;
  f.gamma = gamma;
  f.saddle = saddle_location;
  f.hessian = saddle_hessian;
  Matrix h = es.eigenvectors();
  // sign convention: first nonzero component of u positive
  for (int c = 0; c < d; ++c) {
    for (int r = 0; r < d; ++r) {
      if (std::abs(h(r, c)) > 1e-14) {
        if (h(r, c) < 0) h.col(c) *= -1.0;
        break;
      }
    }
  }
  f.u = h.col(0);
  f.lambda.resize(2 * d);
  f.lambda[0] = -ev[0];
  for (int i = 1; i < d; ++i) f.lambda[i] = ev[i];
  for (int i = d; i < 2 * d; ++i) f.lambda[i] = 1.0;
  f.basis = Matrix::Zero(2 * d, 2 * d);
  f.basis.topLeftCorner(d, d) = h;
  f.basis.bottomRightCorner(d, d) = h;
  f.mu = compute_mu(gamma, f.lambda[0]);
  f.v.resize(2 * d);
  f.v << (f.mu + gamma) * f.u, f.u;
  f.v_in_basis = f.basis.transpose() * f.v;
  return f;
}

SaddleFrame build_saddle_frame(const PotentialModel& model, const LandscapeReport& report,
                               double gamma) {
  if (report.saddle.kind != CriticalKind::index1_saddle)
    throw StructuralError("landscape has no index-1 saddle");
  return build_saddle_frame(eval_hessian(model, report.saddle.location), gamma,
                            report.saddle.location);
}

SaddleFrame orient_toward(const SaddleFrame& frame, const Vector& q) {
  if (frame.u.dot(q - frame.saddle) >= 0.0) return frame;
  SaddleFrame f = frame;
  const int d = f.dimension;
  f.u = -f.u;
  f.basis.col(0) *= -1.0;
  f.basis.col(d) *= -1.0;
  f.v = -f.v;
  f.v_in_basis = f.basis.transpose() * f.v;
  return f;
}

FrameIdentityReport verify_frame_identities(const SaddleFrame& f) {
  const int d = f.dimension;
  FrameIdentityReport r;
  r.mu_residual = std::abs(f.mu * (f.mu + f.gamma) - f.lambda[0]);
  const Matrix HV = hamiltonian_hessian(f);
  r.eigen_residual = (HV * rate_matrix_M(d, f.gamma) * f.v + f.mu * f.v).cwiseAbs().maxCoeff();
  double s = -f.v_in_basis[0] * f.v_in_basis[0] / f.lambda[0];
  for (int i = 1; i < 2 * d; ++i) s += f.v_in_basis[i] * f.v_in_basis[i] / f.lambda[i];
  r.matrix_equality_residual = std::abs(s + f.gamma / f.mu);

  const Matrix shifted = HV + (f.mu / f.gamma) * f.v * f.v.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(shifted, Eigen::EigenvaluesOnly);
  const Vector ev = es.eigenvalues();
  Eigen::Index imin = 0;
  r.shifted_min_abs = ev.cwiseAbs().minCoeff(&imin);
  r.shifted_min_positive = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i]) < 1e-9) ++r.shifted_near_zero;
    if (i != imin) r.shifted_min_positive = std::min(r.shifted_min_positive, ev[i]);
  }
  for (int i = 0; i < 2 * d; ++i)
    if (std::abs(f.lambda[i] - 1.0) < 1e-12) ++r.unit_eigenvalues;
  r.ok = r.mu_residual < 1e-12 && r.eigen_residual < 1e-10 && r.matrix_equality_residual < 1e-10 &&
         r.shifted_near_zero == 1 && r.shifted_min_positive > 0.0 && r.unit_eigenvalues >= d;
  return r;
}

std::string to_string(Regime r) { return r == Regime::underdamped ? "underdamped" : "overdamped"; }

EKPrediction ek_prediction(const LandscapeReport& report, const SaddleFrame& frame, double epsilon,
                           Regime regime) {
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  const double det_m = report.m.hessian_eigenvalues.prod();
  const double det_s = frame.hessian.determinant();
  if (!(det_m > 0.0)) throw StructuralError("det H_U at m is not positive");
  if (!(det_s < 0.0)) throw StructuralError("det H_U at the saddle is not negative");
  const double root = std::sqrt(-det_s / det_m);
  EKPrediction p;
  p.regime = regime;
  p.epsilon = epsilon;
  p.exponent = report.saddle.energy - report.m.energy;
  const double rate = regime == Regime::underdamped ? frame.mu : frame.lambda[0];
  p.prefactor = 2.0 * std::numbers::pi / rate * root;
  p.predicted_mean_time = p.prefactor * std::exp(p.exponent / epsilon);
  return p;
}

double fw_exponent(const LandscapeReport& report) {
  return report.saddle.energy - report.m.energy;
}

}  // namespace kramers
