#include "kramers/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "kramers/errors.hpp"

namespace kramers {

const GaussLegendreRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussLegendreRule> cache;
  if (n < 1 || n > 1024) throw InputError("Gauss-Legendre order must be in [1, 1024]");
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  GaussLegendreRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  // Newton on P_n, roots are symmetric
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * x * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (x * p1 - p2) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return cache.emplace(n, std::move(r)).first->second;
}

namespace {

struct PanelSum {
  double value = 0.0;
  double abs_value = 0.0;
};

PanelSum panel(const std::function<double(double)>& f, double a, double b,
               const GaussLegendreRule& rule) {
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  PanelSum s;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double y = f(mid + half * rule.nodes[i]);
    s.value += rule.weights[i] * y;
    s.abs_value += rule.weights[i] * std::abs(y);
  }
  s.value *= half;
  s.abs_value *= half;
  return s;
}

double refine(const std::function<double(double)>& f, double a, double b, double whole,
              double tol, int depth, const GaussLegendreRule& rule) {
  const double mid = 0.5 * (a + b);
  const PanelSum left = panel(f, a, mid, rule), right = panel(f, mid, b, rule);
  const double both = left.value + right.value;
  const double floor = 1e-15 * (left.abs_value + right.abs_value);
  if (std::abs(both - whole) <= std::max(tol, floor) || depth <= 0) return both;
  // tol stays absolute per panel: only the few panels next to a kink or a square root edge
  // keep splitting, so halving it would chase those to max depth
  return refine(f, a, mid, left.value, tol, depth - 1, rule) +
         refine(f, mid, b, right.value, tol, depth - 1, rule);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const QuadratureOptions& opt) {
  if (!(b > a)) return 0.0;
  const auto& rule = gauss_legendre(opt.points);
  const int n = std::max(1, opt.initial_panels);
  std::vector<PanelSum> coarse(n);
  double scale = 0.0;
  for (int i = 0; i < n; ++i) {
    coarse[i] = panel(f, a + (b - a) * i / n, a + (b - a) * (i + 1) / n, rule);
    scale += coarse[i].abs_value;
  }
  if (scale == 0.0) return 0.0;
  const double tol = opt.rel_tol * scale / n;
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    total += refine(f, a + (b - a) * i / n, a + (b - a) * (i + 1) / n, coarse[i].value, tol,
                    opt.max_depth, rule);
  return total;
}

double integrate_nested(const std::function<double(std::span<const double>)>& f,
                        const std::vector<NestedBounds>& bounds, const QuadratureOptions& opt) {
  const std::size_t dims = bounds.size();
  if (dims == 0) throw InputError("nested integration needs at least one dimension");
  std::vector<double> x(dims, 0.0);
  // inner integrals are resolved 100x tighter than the level above, otherwise their noise
  // keeps the outer refinement from ever settling
  std::vector<QuadratureOptions> per_level(dims, opt);
  for (std::size_t k = 1; k < dims; ++k)
    per_level[k].rel_tol = std::max(1e-14, per_level[k - 1].rel_tol * 1e-2);
  std::function<double(std::size_t)> level = [&](std::size_t k) -> double {
    const auto [lo, hi] = bounds[k](std::span<const double>(x.data(), k));
    if (!(hi > lo)) return 0.0;
    return integrate_adaptive(
        [&, k](double t) {
          x[k] = t;
          return k + 1 == dims ? f(std::span<const double>(x.data(), dims)) : level(k + 1);
        },
        lo, hi, per_level[k]);
  };
  return level(0);
}

}  // namespace kramers
