#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace kramers {

struct QuadratureOptions {
  int points = 64;          // Gauss-Legendre nodes per panel
  int initial_panels = 8;
  double rel_tol = 1e-11;   // panel acceptance, relative to the integral of |f|
  int max_depth = 30;
};

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

const GaussLegendreRule& gauss_legendre(int n);

// adaptive composite Gauss-Legendre with panel bisection
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const QuadratureOptions& opt = {});

// Iterated integral. bounds[k] gives the range of coordinate k from the outer coordinates
// 0..k-1; an empty range contributes zero. f sees all coordinates.
using NestedBounds = std::function<std::pair<double, double>(std::span<const double> outer)>;
double integrate_nested(const std::function<double(std::span<const double>)>& f,
                        const std::vector<NestedBounds>& bounds, const QuadratureOptions& opt = {});

}  // namespace kramers
