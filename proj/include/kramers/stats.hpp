#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace kramers {

// one pass mean/variance with Chan's pairwise merge
struct RunningStats {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();

  void add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
    min = std::min(min, x);
    max = std::max(max, x);
  }

  static RunningStats merge(const RunningStats& a, const RunningStats& b) {
    if (a.n == 0) return b;
    if (b.n == 0) return a;
    RunningStats r;
    r.n = a.n + b.n;
    const double na = static_cast<double>(a.n), nb = static_cast<double>(b.n);
    const double delta = b.mean - a.mean;
    r.mean = a.mean + delta * nb / static_cast<double>(r.n);
    r.m2 = a.m2 + b.m2 + delta * delta * na * nb / static_cast<double>(r.n);
    r.min = std::min(a.min, b.min);
    r.max = std::max(a.max, b.max);
    return r;
  }

  // sample variance
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

// fixed balanced tree over the index order, so the result does not depend on how the
// leaves were produced
inline RunningStats tree_merge(const std::vector<RunningStats>& leaves, std::size_t lo,
                               std::size_t hi) {
  if (hi <= lo) return {};
  if (hi - lo == 1) return leaves[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return RunningStats::merge(tree_merge(leaves, lo, mid), tree_merge(leaves, mid, hi));
}

inline RunningStats tree_merge(const std::vector<RunningStats>& leaves) {
  return tree_merge(leaves, 0, leaves.size());
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double cxx = 0, cxy = 0, cyy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cxx += (x[i] - mx) * (x[i] - mx);
    cxy += (x[i] - mx) * (y[i] - my);
    cyy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = cxy / cxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = cyy > 0.0 ? cxy * cxy / (cxx * cyy) : 1.0;
  return f;
}

}  // namespace kramers
