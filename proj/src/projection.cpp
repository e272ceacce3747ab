#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "xlayer/algorithms.hpp"

namespace xlayer {

namespace {

// Sum of max(0, y_j - theta/m_j) over the free coordinates.
double mass_at(std::span<const double> y, std::span<const double> m, const std::vector<std::size_t>& free,
               double theta) {
  double s = 0;
  for (std::size_t j : free) s += std::max(0.0, y[j] - theta / m[j]);
  return s;
}

}  // namespace

std::vector<double> weighted_simplex_project(std::span<const double> y, std::span<const double> m,
                                             std::span<const char> fixed_zero, double mass) {
  const std::size_t n = y.size();
  if (m.size() != n || (!fixed_zero.empty() && fixed_zero.size() != n))
    throw Error(ErrorKind::InvalidArgument, "projection inputs differ in length");
  if (mass < 0) throw Error(ErrorKind::InvalidArgument, "negative mass");
  std::vector<std::size_t> free;
  for (std::size_t j = 0; j < n; ++j)
    if (fixed_zero.empty() || !fixed_zero[j]) {
      if (!(m[j] > 0)) throw Error(ErrorKind::InvalidArgument, "projection weights must be > 0");
      free.push_back(j);
    }
  if (free.empty()) throw Error(ErrorKind::EmptyFreeSet, "every coordinate is fixed at zero");

  // mass_at is non-increasing in theta; it is >= mass at lo and 0 at hi.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t j : free) {
    lo = std::min(lo, m[j] * (y[j] - mass));
    hi = std::max(hi, m[j] * y[j]);
  }
  for (int it = 0; it < 200 && hi > lo; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (mass_at(y, m, free, mid) > mass ? lo : hi) = mid;
  }
  double theta = 0.5 * (lo + hi);

  // Close the gap exactly on the active set.
  for (int pass = 0; pass < 16; ++pass) {
    double sy = 0, sw = 0;
    for (std::size_t j : free)
      if (y[j] - theta / m[j] > 0) sy += y[j], sw += 1.0 / m[j];
    if (sw == 0) break;
    const double next = (sy - mass) / sw;
    if (next == theta) break;
    bool same = true;
    for (std::size_t j : free) same &= (y[j] - theta / m[j] > 0) == (y[j] - next / m[j] > 0);
    theta = next;
    if (same) break;
  }

  std::vector<double> x(n, 0.0);
  double sum = 0;
  std::size_t biggest = free.front();
  for (std::size_t j : free) {
    x[j] = std::max(0.0, y[j] - theta / m[j]);
    sum += x[j];
    if (x[j] > x[biggest]) biggest = j;
  }
  x[biggest] += mass - sum;
  if (x[biggest] < 0) x[biggest] = 0;
  return x;
}

std::vector<double> scaled_simplex_step(std::span<const double> x, std::span<const double> g,
                                        std::span<const double> m, std::span<const char> fixed_zero,
                                        double mass) {
  const std::size_t n = x.size();
  std::vector<std::size_t> weighted, linear;
  for (std::size_t j = 0; j < n; ++j) {
    if (!fixed_zero.empty() && fixed_zero[j]) continue;
    if (m[j] < 0) throw Error(ErrorKind::InvalidArgument, "scaling weights must be >= 0");
    (m[j] > 0 ? weighted : linear).push_back(j);
  }
  if (weighted.empty() && linear.empty()) throw Error(ErrorKind::EmptyFreeSet, "every coordinate is fixed at zero");

  std::vector<double> y(n, 0.0), w(n, 1.0);
  std::vector<char> fixed(n, 1);
  for (std::size_t j : weighted) y[j] = x[j] - g[j] / m[j], w[j] = m[j], fixed[j] = 0;
  if (linear.empty()) return weighted_simplex_project(y, w, fixed, mass);

  // With z_j = max(0, x_j + (tau - g_j)/m_j) on weighted coordinates, a linear coordinate
  // caps tau at its own gradient. Only when the weighted part cannot hold all the mass at
  // that cap does the first cheapest linear coordinate take the remainder.
  std::size_t cheapest = linear.front();
  for (std::size_t j : linear)
    if (g[j] < g[cheapest]) cheapest = j;
  const double tau = g[cheapest];
  std::vector<double> z(n, 0.0);
  double held = 0;
  for (std::size_t j : weighted) {
    z[j] = std::max(0.0, x[j] + (tau - g[j]) / m[j]);
    held += z[j];
  }
  if (held > mass && !weighted.empty()) return weighted_simplex_project(y, w, fixed, mass);
  z[cheapest] = mass - held;
  return z;
}

int steepest_coordinate(const SimplexBlock& b) {
  int best = -1;
  for (std::size_t j = 0; j < b.x.size(); ++j) {
    if (!b.fixed_zero.empty() && b.fixed_zero[j]) continue;
    if (best < 0 || b.grad[j] < b.grad[best]) best = static_cast<int>(j);
  }
  if (best < 0) throw Error(ErrorKind::EmptyAllowedSet, "no free coordinate");
  return best;
}

std::vector<double> basic_step(const SimplexBlock& b, double step) {
  std::vector<double> x = b.x;
  const int star = steepest_coordinate(b);
  double moved = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (static_cast<int>(j) == star) continue;
    double d = 0;
    if (!b.fixed_zero.empty() && b.fixed_zero[j]) {
      d = x[j];
    } else {
      const double a = b.grad[j] - b.grad[star];
      if (a > 0) d = std::min(x[j], step * a);
    }
    x[j] -= d;
    moved += d;
  }
  x[star] += moved;
  return x;
}

}  // namespace xlayer
