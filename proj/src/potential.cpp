#include "kramers/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "kramers/errors.hpp"

namespace kramers {

namespace {

constexpr int kBase = kMaxPolynomialDegree + 1;

int total_degree(const Monomial& m) {
  return m.exponents[0] + m.exponents[1] + m.exponents[2];
}

// merge equal exponents and drop zeros so derivative lists stay short
std::vector<Monomial> canonical(std::vector<Monomial> terms) {
  std::sort(terms.begin(), terms.end(),
            [](const Monomial& a, const Monomial& b) { return a.exponents < b.exponents; });
  std::vector<Monomial> out;
  for (const auto& t : terms) {
    if (!out.empty() && out.back().exponents == t.exponents)
      out.back().coefficient += t.coefficient;
    else
      out.push_back(t);
  }
  std::erase_if(out, [](const Monomial& m) { return m.coefficient == 0.0; });
  return out;
}

std::vector<Monomial> differentiate(const std::vector<Monomial>& terms, int axis) {
  std::vector<Monomial> out;
  for (const auto& t : terms) {
    const int e = t.exponents[axis];
    if (e == 0) continue;
    Monomial m = t;
    m.coefficient *= e;
    m.exponents[axis] = e - 1;
    out.push_back(m);
  }
  return canonical(std::move(out));
}

}  // namespace

std::string to_string(PotentialFamily f) {
  switch (f) {
    case PotentialFamily::quartic_double_well_1d: return "quartic-double-well-1d";
    case PotentialFamily::separable_double_well_nd: return "separable-double-well-nd";
    case PotentialFamily::polynomial_custom: return "polynomial-custom";
  }
  return "unknown";
}

PotentialFamily potential_family_from_string(const std::string& name) {
  if (name == "quartic-double-well-1d") return PotentialFamily::quartic_double_well_1d;
  if (name == "separable-double-well-nd") return PotentialFamily::separable_double_well_nd;
  if (name == "polynomial-custom") return PotentialFamily::polynomial_custom;
  throw InputError("unknown potential family '" + name + "'");
}

double PotentialModel::Poly::eval(const Eigen::Ref<const Vector>& q, int d) const {
  int top = 0;
  for (const auto& t : terms)
    for (int i = 0; i < d; ++i) top = std::max(top, t.exponents[i]);
  double pw[kMaxPolynomialDimension][kBase];
  for (int i = 0; i < d; ++i) {
    pw[i][0] = 1.0;
    for (int k = 1; k <= top; ++k) pw[i][k] = pw[i][k - 1] * q[i];
  }
  double s = 0.0;
  for (const auto& t : terms) {
    double m = t.coefficient;
    for (int i = 0; i < d; ++i) m *= pw[i][t.exponents[i]];
    s += m;
  }
  return s;
}

PotentialModel PotentialModel::quartic_double_well() {
  PotentialModel m = polynomial(1, {{0.25, {4, 0, 0}}, {-0.5, {2, 0, 0}}, {0.25, {0, 0, 0}}});
  m.family_ = PotentialFamily::quartic_double_well_1d;
  m.parameters_.clear();
  return m;
}

PotentialModel PotentialModel::separable_double_well(std::vector<double> transverse_stiffness) {
  const int d = 1 + static_cast<int>(transverse_stiffness.size());
  if (d > kMaxPolynomialDimension)
    throw InputError("separable-double-well-nd supports d <= 3, got " + std::to_string(d));
  std::vector<Monomial> terms{{0.25, {4, 0, 0}}, {-0.5, {2, 0, 0}}, {0.25, {0, 0, 0}}};
  for (int i = 1; i < d; ++i) {
    const double w = transverse_stiffness[i - 1];
    if (!(w > 0.0) || !std::isfinite(w))
      throw InputError("transverse stiffness must be positive and finite");
    Monomial t{0.5 * w, {0, 0, 0}};
    t.exponents[i] = 2;
    terms.push_back(t);
  }
  PotentialModel m = polynomial(d, terms);
  m.family_ = PotentialFamily::separable_double_well_nd;
  m.parameters_ = std::move(transverse_stiffness);
  return m;
}

PotentialModel PotentialModel::polynomial(int dimension, std::span<const double> dense) {
  if (dimension < 1 || dimension > kMaxPolynomialDimension)
    throw InputError("polynomial-custom supports 1 <= d <= 3, got " + std::to_string(dimension));
  std::size_t expected = 1;
  for (int i = 0; i < dimension; ++i) expected *= kBase;
  if (dense.size() != expected)
    throw InputError("polynomial-custom in d=" + std::to_string(dimension) + " expects " +
                     std::to_string(expected) + " dense coefficients, got " +
                     std::to_string(dense.size()));
  std::vector<Monomial> terms;
  for (std::size_t idx = 0; idx < dense.size(); ++idx) {
    if (dense[idx] == 0.0) continue;
    Monomial m{dense[idx], {0, 0, 0}};
    std::size_t r = idx;
    for (int i = 0; i < dimension; ++i) {
      m.exponents[i] = static_cast<int>(r % kBase);
      r /= kBase;
    }
    terms.push_back(m);
  }
  return polynomial(dimension, terms);
}

PotentialModel PotentialModel::polynomial(int dimension, const std::vector<Monomial>& terms) {
  if (dimension < 1 || dimension > kMaxPolynomialDimension)
    throw InputError("polynomial-custom supports 1 <= d <= 3, got " + std::to_string(dimension));
  for (const auto& t : terms) {
    if (!std::isfinite(t.coefficient)) throw InputError("non-finite polynomial coefficient");
    for (int i = 0; i < kMaxPolynomialDimension; ++i) {
      if (t.exponents[i] < 0) throw InputError("negative exponent");
      if (i >= dimension && t.exponents[i] != 0)
        throw InputError("exponent on axis beyond the model dimension");
    }
    if (total_degree(t) > kMaxPolynomialDegree)
      throw InputError("polynomial term of total degree " + std::to_string(total_degree(t)) +
                       " exceeds 6");
  }
  PotentialModel m;
  m.dimension_ = dimension;
  m.family_ = PotentialFamily::polynomial_custom;
  m.value_.terms = canonical(terms);
  std::size_t n = 1;
  for (int i = 0; i < dimension; ++i) n *= kBase;
  m.parameters_.assign(n, 0.0);
  for (const auto& t : m.value_.terms) {
    std::size_t idx = 0, stride = 1;
    for (int i = 0; i < dimension; ++i, stride *= kBase) idx += t.exponents[i] * stride;
    m.parameters_[idx] = t.coefficient;
  }
  m.build_derivatives();
  return m;
}

void PotentialModel::build_derivatives() {
  grad_.assign(dimension_, {});
  hess_.assign(dimension_ * dimension_, {});
  for (int i = 0; i < dimension_; ++i) grad_[i].terms = differentiate(value_.terms, i);
  for (int i = 0; i < dimension_; ++i)
    for (int j = 0; j < dimension_; ++j)
      hess_[i * dimension_ + j].terms = differentiate(grad_[i].terms, j);
}

PotentialModel PotentialModel::with_offset(double offset) const {
  PotentialModel m = *this;
  m.offset_ = offset;
  return m;
}

void PotentialModel::check(const Eigen::Ref<const Vector>& q) const {
  if (q.size() != dimension_)
    throw InputError("position has dimension " + std::to_string(q.size()) + ", model has " +
                     std::to_string(dimension_));
}

double PotentialModel::energy(const Eigen::Ref<const Vector>& q) const {
  check(q);
  return value_.eval(q, dimension_) + offset_;
}

void PotentialModel::gradient(const Eigen::Ref<const Vector>& q, Eigen::Ref<Vector> out) const {
  check(q);
  for (int i = 0; i < dimension_; ++i) out[i] = grad_[i].eval(q, dimension_);
}

void PotentialModel::hessian(const Eigen::Ref<const Vector>& q, Eigen::Ref<Matrix> out) const {
  check(q);
  for (int i = 0; i < dimension_; ++i)
    for (int j = 0; j < dimension_; ++j) out(i, j) = hess_[i * dimension_ + j].eval(q, dimension_);
}

double PotentialModel::laplacian(const Eigen::Ref<const Vector>& q) const {
  check(q);
  double s = 0.0;
  for (int i = 0; i < dimension_; ++i) s += hess_[i * dimension_ + i].eval(q, dimension_);
  return s;
}

double eval_energy(const PotentialModel& model, const Vector& q) { return model.energy(q); }

Vector eval_gradient(const PotentialModel& model, const Vector& q) {
  Vector g(model.dimension());
  model.gradient(q, g);
  return g;
}

Matrix eval_hessian(const PotentialModel& model, const Vector& q) {
  Matrix h(model.dimension(), model.dimension());
  model.hessian(q, h);
  return h;
}

double hamiltonian(const PotentialModel& model, const PhaseState& x) {
  if (x.p.size() != x.q.size()) throw InputError("q and p dimensions differ");
  return model.energy(x.q) + 0.5 * x.p.squaredNorm();
}

std::vector<Vector> shell_directions(int dimension, int count) {
  std::vector<Vector> dirs;
  if (dimension == 1) {
    dirs.push_back(Vector::Constant(1, 1.0));
    dirs.push_back(Vector::Constant(1, -1.0));
    return dirs;
  }
  if (dimension == 2) {
    for (int k = 0; k < count; ++k) {
      const double t = 2.0 * std::numbers::pi * k / count;
      Vector u(2);
      u << std::cos(t), std::sin(t);
      dirs.push_back(u);
    }
    return dirs;
  }
  // fibonacci sphere, d = 3
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < count; ++k) {
    const double z = 1.0 - 2.0 * (k + 0.5) / count;
    const double r = std::sqrt(1.0 - z * z);
    Vector u(3);
    u << r * std::cos(golden * k), r * std::sin(golden * k), z;
    dirs.push_back(u);
  }
  return dirs;
}

std::vector<double> default_growth_radii() {
  std::vector<double> r;
  for (int k = 1; k <= 8; ++k) r.push_back(1.25 * k);
  return r;
}

GrowthReport check_growth_conditions(const PotentialModel& model, double beta,
                                     const std::vector<double>& radius_grid,
                                     int samples_per_shell) {
  if (radius_grid.empty()) throw InputError("growth check needs a non-empty radius grid");
  if (!(beta > 0.0)) throw InputError("growth check needs beta > 0");
  if (samples_per_shell < 1) throw InputError("growth check needs samples_per_shell >= 1");
  for (std::size_t i = 0; i < radius_grid.size(); ++i) {
    if (!(radius_grid[i] > 0.0) || (i > 0 && !(radius_grid[i] > radius_grid[i - 1])))
      throw InputError("radius grid must be positive and increasing");
  }
  GrowthReport rep;
  rep.beta = beta;
  rep.radii = radius_grid;
  const auto dirs = shell_directions(model.dimension(), samples_per_shell);
  Vector g(model.dimension());
  for (double r : radius_grid) {
    double m1 = std::numeric_limits<double>::infinity();
    double m2 = std::numeric_limits<double>::infinity();
    for (const auto& u : dirs) {
      const Vector q = r * u;
      model.gradient(q, g);
      const double denom = q.squaredNorm() + model.energy(q);
      // a non-positive denominator means U is very negative there: the condition fails
      const double ratio1 = denom > 0.0 ? q.dot(g) / denom : -std::numeric_limits<double>::infinity();
      const double ratio2 = g.norm() - beta * model.laplacian(q);
      m1 = std::min(m1, ratio1);
      m2 = std::min(m2, ratio2);
    }
    rep.shell_min_ratio_1.push_back(m1);
    rep.shell_min_ratio_2.push_back(m2);
  }
  rep.min_ratio_1 = rep.shell_min_ratio_1.back();
  rep.min_ratio_2 = rep.shell_min_ratio_2.back();
  rep.pass = rep.min_ratio_1 > 0.0 && rep.min_ratio_2 > 0.0;
  return rep;
}

PotentialModel normalize_offset(const PotentialModel& model, double landscape_min_value) {
  return model.with_offset(model.offset() - landscape_min_value);
}

DerivativeCheck check_derivatives(const PotentialModel& model, int n_points, double box,
                                  std::uint64_t seed) {
  const int d = model.dimension();
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(-box, box);
  DerivativeCheck out;
  Vector q(d), g(d), gp(d), gm(d);
  Matrix h(d, d);
  for (int n = 0; n < n_points; ++n) {
    for (int i = 0; i < d; ++i) q[i] = unif(gen);
    model.gradient(q, g);
    model.hessian(q, h);
    const double hstep = 1e-5 * std::max(1.0, q.norm());
    const double gscale = std::max(1.0, g.norm());
    const double hscale = std::max(1.0, h.norm());
    out.hessian_asymmetry = std::max(out.hessian_asymmetry, (h - h.transpose()).norm());
    for (int i = 0; i < d; ++i) {
      Vector qp = q, qm = q;
      qp[i] += hstep;
      qm[i] -= hstep;
      const double fd = (model.energy(qp) - model.energy(qm)) / (2.0 * hstep);
      out.gradient_error = std::max(out.gradient_error, std::abs(fd - g[i]) / gscale);
      model.gradient(qp, gp);
      model.gradient(qm, gm);
      const Vector col = (gp - gm) / (2.0 * hstep);
      out.hessian_error = std::max(out.hessian_error, (col - h.col(i)).norm() / hscale);
    }
  }
  out.pass = out.gradient_error < 1e-6 && out.hessian_error < 1e-5 && out.hessian_asymmetry < 1e-12;
  return out;
}

}  // namespace kramers
