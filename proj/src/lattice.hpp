#pragma once

// Index bookkeeping shared by the product-grid modules.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "gplab/grid.hpp"

namespace gplab::detail {

// Per-axis node indices of every single-particle grid point.
struct Digits {
  int dim;
  int points;
  std::vector<int> table;

  explicit Digits(const GridSpec& g) : dim(g.dim), points(g.points), table(g.size() * g.dim) {
    for (std::size_t s = 0; s < g.size(); ++s) {
      std::size_t rest = s;
      for (int a = dim - 1; a >= 0; --a) {
        table[s * dim + a] = static_cast<int>(rest % points);
        rest /= points;
      }
    }
  }

  // Flat index of the periodic displacement x_s - x_t.
  std::size_t displacement(std::size_t s, std::size_t t) const {
    std::size_t out = 0;
    for (int a = 0; a < dim; ++a) {
      int m = table[s * dim + a] - table[t * dim + a];
      if (m < 0) m += points;
      out = out * points + static_cast<std::size_t>(m);
    }
    return out;
  }
};

// Values of fn(|r|) at every periodic displacement, minimum-image distance.
inline std::vector<double> displacement_table(const GridSpec& g, const std::function<double(double)>& fn) {
  std::vector<double> out(g.size());
  const double dx = g.spacing();
  for (std::size_t s = 0; s < g.size(); ++s) {
    std::size_t rest = s;
    double r2 = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      int m = static_cast<int>(rest % g.points);
      rest /= g.points;
      if (m > g.points / 2) m -= g.points;
      r2 += (m * dx) * (m * dx);
    }
    out[s] = fn(std::sqrt(r2));
  }
  return out;
}

// Calls fn(flat, s) for every configuration, s holding the particle indices.
template <class Fn>
void for_each_config(std::size_t single, int particles, Fn&& fn) {
  std::vector<std::size_t> s(static_cast<std::size_t>(particles), 0);
  std::size_t total = 1;
  for (int p = 0; p < particles; ++p) total *= single;
  for (std::size_t flat = 0; flat < total; ++flat) {
    fn(flat, s.data());
    for (int p = particles - 1; p >= 0; --p) {
      if (++s[static_cast<std::size_t>(p)] < single) break;
      s[static_cast<std::size_t>(p)] = 0;
    }
  }
}

}  // namespace gplab::detail
