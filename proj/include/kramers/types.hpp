#pragma once

#include <Eigen/Dense>

namespace kramers {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// x = (q, p), both of length d
struct PhaseState {
  Vector q;
  Vector p;

  int dimension() const { return static_cast<int>(q.size()); }

  Vector stacked() const {
    Vector x(q.size() + p.size());
    x << q, p;
    return x;
  }

  static PhaseState from_stacked(const Vector& x) {
    const auto d = x.size() / 2;
    return {x.head(d), x.tail(d)};
  }

  static PhaseState at_rest(const Vector& q) { return {q, Vector::Zero(q.size())}; }
};

// ball in phase space, center stored as (q, p)
struct Ball {
  Vector center;
  double radius = 0.0;

  static Ball around(const Vector& q, double radius) {
    Vector c = Vector::Zero(2 * q.size());
    c.head(q.size()) = q;
    return {c, radius};
  }

  double distance(const PhaseState& x) const {
    const auto d = x.q.size();
    return std::sqrt((x.q - center.head(d)).squaredNorm() + (x.p - center.tail(d)).squaredNorm());
  }
  bool contains(const PhaseState& x) const { return distance(x) <= radius; }
};

}  // namespace kramers
