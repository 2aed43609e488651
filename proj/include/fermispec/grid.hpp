#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace fermispec {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Integer lattice coordinates; unused axes stay 0 so the array compares cleanly.
using Coord = std::array<int, 3>;

inline Coord coord_add(const Coord& a, const Coord& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Coord coord_sub(const Coord& a, const Coord& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Coord coord_neg(const Coord& a) { return {-a[0], -a[1], -a[2]}; }

inline std::string coord_str(const Coord& c, int d) {
  std::string s = "(";
  for (int i = 0; i < d; ++i) s += (i ? "," : "") + std::to_string(c[i]);
  return s + ")";
}

// Momentum lattice (2pi/L)Z^d truncated to the closed cube [-cutoff, cutoff]^d.
// Points are stored as integer coordinates so that k1 + k2 is exact; physical
// momenta are coordinate * spacing.
struct MomentumGrid {
  int d = 1;
  double box_length = 0.0;
  double cutoff = 0.0;
  double spacing = 0.0;   // 2pi / L
  int n_axis = 0;         // max |coordinate| per axis
  std::vector<Coord> points;  // lexicographically sorted

  std::size_t size() const { return points.size(); }

  bool in_window(const Coord& c) const {
    for (int i = 0; i < d; ++i)
      if (c[i] < -n_axis || c[i] > n_axis) return false;
    return true;
  }

  // Dense cube indexing: lexicographic rank, or -1 when outside the window.
  long index_of(const Coord& c) const {
    if (!in_window(c)) return -1;
    long idx = 0;
    const long side = 2L * n_axis + 1;
    for (int i = 0; i < d; ++i) idx = idx * side + (c[i] + n_axis);
    return idx;
  }

  const Coord& point(std::size_t i) const { return points[i]; }

  std::array<double, 3> momentum(const Coord& c) const {
    return {c[0] * spacing, c[1] * spacing, c[2] * spacing};
  }
  double norm2(const Coord& c) const {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      const double ki = c[i] * spacing;
      s += ki * ki;
    }
    return s;
  }
  double norm(const Coord& c) const { return std::sqrt(norm2(c)); }

  bool same_lattice(const MomentumGrid& o) const {
    return d == o.d && box_length == o.box_length && n_axis == o.n_axis;
  }
};

inline MomentumGrid build_grid(int d, double box_length, double cutoff) {
  if (d < 1 || d > 3) throw std::invalid_argument("build_grid: d must be 1, 2 or 3");
  if (!(box_length > 0.0)) throw std::invalid_argument("build_grid: box length must be positive");
  const double spacing = 2.0 * std::numbers::pi / box_length;
  if (!(cutoff >= spacing))
    throw std::invalid_argument("build_grid: cutoff smaller than the lattice spacing 2pi/L");

  MomentumGrid g;
  g.d = d;
  g.box_length = box_length;
  g.cutoff = cutoff;
  g.spacing = spacing;
  g.n_axis = static_cast<int>(std::floor(cutoff / spacing + 1e-9));

  const int n = g.n_axis;
  const int lo1 = d >= 2 ? -n : 0, hi1 = d >= 2 ? n : 0;
  const int lo2 = d >= 3 ? -n : 0, hi2 = d >= 3 ? n : 0;
  for (int c0 = -n; c0 <= n; ++c0)
    for (int c1 = lo1; c1 <= hi1; ++c1)
      for (int c2 = lo2; c2 <= hi2; ++c2) g.points.push_back({c0, c1, c2});
  return g;
}

// Sub-window restriction used by the reporting hull mode and the figure pipeline.
inline MomentumGrid half_window_grid(const MomentumGrid& g) {
  const int n_half = g.n_axis / 2;
  if (n_half < 1) throw std::invalid_argument("half_window_grid: window too small to halve");
  return build_grid(g.d, g.box_length, (n_half + 0.5) * g.spacing);
}

}  // namespace fermispec
