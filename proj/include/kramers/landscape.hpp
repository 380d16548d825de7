#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kramers/potential.hpp"

namespace kramers {

enum class CriticalKind { minimum, index1_saddle, other };
std::string to_string(CriticalKind k);

struct CriticalPoint {
  Vector location;
  CriticalKind kind = CriticalKind::other;
  Vector hessian_eigenvalues;   // ascending
  Matrix hessian_eigenvectors;  // columns, orthonormal
  double energy = 0.0;
};

struct SearchBox {
  Vector lower;
  Vector upper;
  static SearchBox cube(int dimension, double half_width);
};

struct SearchOptions {
  double newton_tol = 1e-10;
  double dedup_tol = 1e-6;
  double degeneracy_tol = 1e-8;
  int max_iterations = 200;
};

struct LandscapeReport {
  CriticalPoint m;
  CriticalPoint s;
  CriticalPoint saddle;
  double barrier_from_m = 0.0;
  double barrier_from_s = 0.0;
  double lambda_sigma = 0.0;
  bool is_valid_double_well = false;
  int n_minima = 0;
  int n_saddles = 0;
  int n_other = 0;
};

std::vector<CriticalPoint> find_critical_points(const PotentialModel& model, const SearchBox& box,
                                                int grid_density, const SearchOptions& opt = {});

// start_well: if set, m is the minimum nearest to it. Otherwise m is the minimum with the larger
// barrier, ties broken by the lexicographically greater location.
LandscapeReport build_landscape(const PotentialModel& model,
                                const std::vector<CriticalPoint>& critical_points,
                                const std::optional<Vector>& start_well = std::nullopt);

CriticalPoint classify_point(const PotentialModel& model, const Vector& q,
                             double degeneracy_tol = 1e-8);

enum class WellMembership { W_m, W_s, outside };
std::string to_string(WellMembership w);

struct MembershipOptions {
  double gamma = 1.0;
  double flow_ball = 1e-3;
  double max_flow_time = 1e3;
};

WellMembership well_membership(const PotentialModel& model, const LandscapeReport& report,
                               const PhaseState& x, const MembershipOptions& opt = {});

// bottleneck search on a grid: (q, p) plane for d = 1, position plane at p = 0 for d = 2
double minimax_path_energy(const PotentialModel& model, const LandscapeReport& report,
                           int grid_density, double padding = 1.0);

}  // namespace kramers
