#include "kramers/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

#include "kramers/dynamics.hpp"
#include "kramers/errors.hpp"

namespace kramers {

std::string to_string(CriticalKind k) {
  switch (k) {
    case CriticalKind::minimum: return "minimum";
    case CriticalKind::index1_saddle: return "index-1-saddle";
    case CriticalKind::other: return "other";
  }
  return "unknown";
}

std::string to_string(WellMembership w) {
  switch (w) {
    case WellMembership::W_m: return "W_m";
    case WellMembership::W_s: return "W_s";
    case WellMembership::outside: return "outside";
  }
  return "unknown";
}

SearchBox SearchBox::cube(int dimension, double half_width) {
  return {Vector::Constant(dimension, -half_width), Vector::Constant(dimension, half_width)};
}

CriticalPoint classify_point(const PotentialModel& model, const Vector& q, double degeneracy_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(eval_hessian(model, q));
  CriticalPoint cp;
  cp.location = q;
  cp.energy = model.energy(q);
  cp.hessian_eigenvalues = es.eigenvalues();
  cp.hessian_eigenvectors = es.eigenvectors();
  int neg = 0, pos = 0;
  for (Eigen::Index i = 0; i < cp.hessian_eigenvalues.size(); ++i) {
    if (cp.hessian_eigenvalues[i] < -degeneracy_tol) ++neg;
    else if (cp.hessian_eigenvalues[i] > degeneracy_tol) ++pos;
  }
  const int d = model.dimension();
  if (pos == d) cp.kind = CriticalKind::minimum;
  else if (neg == 1 && pos == d - 1) cp.kind = CriticalKind::index1_saddle;
  else cp.kind = CriticalKind::other;
  return cp;
}

namespace {

bool lex_less(const Vector& a, const Vector& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

// damped Newton on grad U = 0 with backtracking on |grad U|^2
std::optional<Vector> newton(const PotentialModel& model, Vector q, const SearchOptions& opt) {
  const int d = model.dimension();
  Vector g(d);
  Matrix h(d, d);
  model.gradient(q, g);
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (g.norm() < opt.newton_tol) return q;
    model.hessian(q, h);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    Vector lam = es.eigenvalues();
    for (Eigen::Index i = 0; i < lam.size(); ++i)
      if (std::abs(lam[i]) < 1e-12) lam[i] = lam[i] < 0 ? -1e-12 : 1e-12;
    const Matrix& V = es.eigenvectors();
    const Vector dir = -(V * (V.transpose() * g).cwiseQuotient(lam));
    double t = 1.0;
    const double merit = g.squaredNorm();
    Vector trial(d), gt(d);
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
      trial = q + t * dir;
      if (!trial.allFinite()) continue;
      model.gradient(trial, gt);
      if (gt.squaredNorm() < merit) {
        accepted = true;
        break;
      }
    }
    if (!accepted) return std::nullopt;
    q = trial;
    g = gt;
  }
  if (g.norm() < opt.newton_tol) return q;
  return std::nullopt;
}

}  // namespace

std::vector<CriticalPoint> find_critical_points(const PotentialModel& model, const SearchBox& box,
                                                int grid_density, const SearchOptions& opt) {
  const int d = model.dimension();
  if (box.lower.size() != d || box.upper.size() != d)
    throw InputError("search box dimension does not match the model");
  if ((box.upper - box.lower).minCoeff() <= 0.0) throw InputError("search box is empty");
  if (grid_density < 2) throw InputError("grid_density must be at least 2");

  std::vector<Vector> found;
  std::vector<int> idx(d, 0);
  while (true) {
    Vector seed(d);
    for (int i = 0; i < d; ++i)
      seed[i] = box.lower[i] + (box.upper[i] - box.lower[i]) * idx[i] / (grid_density - 1);
    if (auto root = newton(model, seed, opt)) found.push_back(*root);
    int axis = 0;
    while (axis < d && ++idx[axis] == grid_density) idx[axis++] = 0;
    if (axis == d) break;
  }

  std::sort(found.begin(), found.end(), lex_less);
  std::vector<Vector> unique;
  for (const auto& q : found) {
    const bool dup = std::any_of(unique.begin(), unique.end(),
                                 [&](const Vector& u) { return (u - q).norm() < opt.dedup_tol; });
    if (!dup) unique.push_back(q);
  }
  std::vector<CriticalPoint> out;
  out.reserve(unique.size());
  for (const auto& q : unique) out.push_back(classify_point(model, q, opt.degeneracy_tol));
  return out;
}

LandscapeReport build_landscape(const PotentialModel& model,
                                const std::vector<CriticalPoint>& critical_points,
                                const std::optional<Vector>& start_well) {
  std::vector<CriticalPoint> minima, saddles;
  int n_other = 0;
  for (const auto& cp : critical_points) {
    if (cp.location.size() != model.dimension())
      throw InputError("critical point dimension does not match the model");
    if (cp.kind == CriticalKind::minimum) minima.push_back(cp);
    else if (cp.kind == CriticalKind::index1_saddle) saddles.push_back(cp);
    else ++n_other;
  }
  auto by_energy_then_position = [](const CriticalPoint& a, const CriticalPoint& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return lex_less(a.location, b.location);
  };
  std::sort(minima.begin(), minima.end(), by_energy_then_position);
  std::sort(saddles.begin(), saddles.end(), by_energy_then_position);
  if (minima.size() < 2 || saddles.empty())
    throw StructuralError("not a double well: found " + std::to_string(minima.size()) +
                          " minima, " + std::to_string(saddles.size()) +
                          " index-1 saddles, " + std::to_string(n_other) + " other points");

  LandscapeReport rep;
  rep.n_minima = static_cast<int>(minima.size());
  rep.n_saddles = static_cast<int>(saddles.size());
  rep.n_other = n_other;
  rep.is_valid_double_well = minima.size() == 2 && saddles.size() == 1;
  rep.saddle = saddles.front();
  CriticalPoint a = minima[0], b = minima[1];

  bool a_is_m;
  if (start_well) {
    if (start_well->size() != model.dimension()) throw InputError("start well dimension mismatch");
    a_is_m = (a.location - *start_well).norm() <= (b.location - *start_well).norm();
  } else if (a.energy != b.energy) {
    a_is_m = a.energy < b.energy;  // deeper well has the larger barrier
  } else {
    a_is_m = lex_less(b.location, a.location);
  }
  rep.m = a_is_m ? a : b;
  rep.s = a_is_m ? b : a;
  rep.barrier_from_m = rep.saddle.energy - rep.m.energy;
  rep.barrier_from_s = rep.saddle.energy - rep.s.energy;
  rep.lambda_sigma = -rep.saddle.hessian_eigenvalues[0];
  if (!(rep.barrier_from_m > 0.0) || !(rep.barrier_from_s > 0.0)) rep.is_valid_double_well = false;
  return rep;
}

WellMembership well_membership(const PotentialModel& model, const LandscapeReport& report,
                               const PhaseState& x, const MembershipOptions& opt) {
  if (hamiltonian(model, x) >= report.saddle.energy) return WellMembership::outside;
  const auto flow = run_zero_noise_flow(model, opt.gamma, x, {report.m.location, report.s.location},
                                        opt.flow_ball, opt.max_flow_time, false);
  if (!flow.converged)
    throw ClassificationError("zero-noise flow did not settle near a minimum within max_flow_time");
  return flow.minimum_index == 0 ? WellMembership::W_m : WellMembership::W_s;
}

double minimax_path_energy(const PotentialModel& model, const LandscapeReport& report,
                           int grid_density, double padding) {
  const int d = model.dimension();
  if (d > 2) throw InputError("minimax path oracle supports d <= 2");
  if ((report.m.location - report.s.location).norm() == 0.0) return report.m.energy;
  if (grid_density < 3) throw ResolutionError("grid too coarse to connect the wells");

  // axes: d = 1 -> (q, p), d = 2 -> (q1, q2) at p = 0
  Eigen::Vector2d lo, hi;
  Vector all_lo = report.m.location.cwiseMin(report.s.location).cwiseMin(report.saddle.location);
  Vector all_hi = report.m.location.cwiseMax(report.s.location).cwiseMax(report.saddle.location);
  if (d == 1) {
    lo << all_lo[0] - padding, -(0.5 * (all_hi[0] - all_lo[0]) + padding);
    hi << all_hi[0] + padding, 0.5 * (all_hi[0] - all_lo[0]) + padding;
  } else {
    lo << all_lo[0] - padding, all_lo[1] - padding;
    hi << all_hi[0] + padding, all_hi[1] + padding;
  }
  const int n = grid_density;
  auto coord = [&](int axis, int i) { return lo[axis] + (hi[axis] - lo[axis]) * i / (n - 1); };
  std::vector<double> V(static_cast<std::size_t>(n) * n);
  Vector q(d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v;
      if (d == 1) {
        q[0] = coord(0, i);
        const double p = coord(1, j);
        v = model.energy(q) + 0.5 * p * p;
      } else {
        q << coord(0, i), coord(1, j);
        v = model.energy(q);
      }
      V[i * n + j] = v;
    }
  auto nearest = [&](const Vector& loc) {
    auto snap = [&](int axis, double x) {
      return std::clamp(static_cast<int>(std::lround((x - lo[axis]) / (hi[axis] - lo[axis]) * (n - 1))), 0, n - 1);
    };
    const int i = snap(0, loc[0]);
    const int j = d == 1 ? snap(1, 0.0) : snap(1, loc[1]);
    return i * n + j;
  };
  const int src = nearest(report.m.location), dst = nearest(report.s.location);
  if (src == dst) throw ResolutionError("grid too coarse to separate the wells");

  std::vector<double> best(V.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  best[src] = V[src];
  pq.push({V[src], src});
  while (!pq.empty()) {
    auto [b, u] = pq.top();
    pq.pop();
    if (b > best[u]) continue;
    if (u == dst) return b;
    const int i = u / n, j = u % n;
    const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int ii = i + di[k], jj = j + dj[k];
      if (ii < 0 || jj < 0 || ii >= n || jj >= n) continue;
      const int w = ii * n + jj;
      const double nb = std::max(b, V[w]);
      if (nb < best[w]) {
        best[w] = nb;
        pq.push({nb, w});
      }
    }
  }
  throw ResolutionError("grid does not connect the wells");
}

}  // namespace kramers
