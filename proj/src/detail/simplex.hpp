#pragma once

// Dense tableau simplex for  max c.y  s.t.  A y <= b, y >= 0  with b >= 0,
// so the slack basis is feasible from the start. Bland's rule avoids
// cycling on the degenerate rows that arise from homogeneous constraints.

#include <cmath>
#include <cstddef>
#include <vector>

namespace cptlab::detail {

struct SimplexResult {
  bool bounded = true;
  double objective = 0.0;
  std::vector<double> solution;
};

inline SimplexResult simplex_max(const std::vector<std::vector<double>>& a,
                                 const std::vector<double>& b, const std::vector<double>& c,
                                 double eps = 1e-12) {
  const std::size_t m = a.size();
  const std::size_t n = c.size();
  const std::size_t width = n + m + 1;
  // rows 0..m-1 constraints, row m objective (reduced costs, negated).
  std::vector<std::vector<double>> t(m + 1, std::vector<double>(width, 0.0));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t[i][j] = a[i][j];
    t[i][n + i] = 1.0;
    t[i][width - 1] = b[i];
    basis[i] = n + i;
  }
  for (std::size_t j = 0; j < n; ++j) t[m][j] = -c[j];

  for (std::size_t iter = 0; iter < 50 * (m + n) + 100; ++iter) {
    std::size_t enter = width;
    for (std::size_t j = 0; j + 1 < width; ++j) {
      if (t[m][j] < -eps) {
        enter = j;
        break;
      }
    }
    if (enter == width) break;

    std::size_t leave = m;
    double best = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (t[i][enter] > eps) {
        const double ratio = t[i][width - 1] / t[i][enter];
        if (leave == m || ratio < best - eps ||
            (std::abs(ratio - best) <= eps && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
    }
    if (leave == m) return {false, 0.0, {}};

    const double pivot = t[leave][enter];
    for (double& v : t[leave]) v /= pivot;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = t[i][enter];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width; ++j) t[i][j] -= f * t[leave][j];
    }
    basis[leave] = enter;
  }

  SimplexResult r;
  r.solution.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) r.solution[basis[i]] = t[i][width - 1];
  }
  r.objective = t[m][width - 1];
  return r;
}

}  // namespace cptlab::detail
