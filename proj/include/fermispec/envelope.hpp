#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "dispersion.hpp"
#include "errors.hpp"
#include "grid.hpp"

namespace fermispec {

// Lower envelope of an excitation-spectrum sector, sampled on the grid.
// +inf marks momenta with no admissible decomposition.
struct SpectrumEnvelope {
  MomentumGrid grid;
  std::vector<double> values;
  std::string sector_tag;  // full | even | odd | essential_full | essential_even | essential_odd

  double value_at(const Coord& c) const {
    const long i = grid.index_of(c);
    if (i < 0) throw std::out_of_range("envelope value requested outside the window");
    return values[static_cast<std::size_t>(i)];
  }
};

struct SpectrumSummary {
  double gap = kInf;
  double critical_velocity = kInf;
  Coord argmin_gap{0, 0, 0};
  Coord argmin_cvel{0, 0, 0};
};

enum class Sector { full, odd, even };
enum class WindowMode { windowed, reporting };

inline std::string sector_name(Sector s) {
  switch (s) {
    case Sector::odd: return "odd";
    case Sector::even: return "even";
    default: return "full";
  }
}

inline SpectrumEnvelope envelope_from_dispersion(const DispersionRelation& w,
                                                 const std::string& tag = "full") {
  SpectrumEnvelope e;
  e.grid = w.grid;
  e.sector_tag = tag;
  e.values.resize(w.grid.size(), kInf);
  for (std::size_t i = 0; i < w.grid.size(); ++i)
    if (w.supported(i)) e.values[i] = w.values[i];
  return e;
}

inline SpectrumEnvelope restrict_to_half_window(const SpectrumEnvelope& e) {
  SpectrumEnvelope r;
  r.grid = half_window_grid(e.grid);
  r.sector_tag = e.sector_tag;
  r.values.resize(r.grid.size());
  for (std::size_t i = 0; i < r.grid.size(); ++i)
    r.values[i] = e.values[static_cast<std::size_t>(e.grid.index_of(r.grid.point(i)))];
  return r;
}

inline DispersionRelation species_min(const std::vector<DispersionRelation>& species) {
  if (species.empty()) throw std::invalid_argument("species_min: empty species list");
  const MomentumGrid& g = species.front().grid;
  for (const auto& s : species)
    if (!s.grid.same_lattice(g)) throw std::invalid_argument("species_min: grid mismatch");

  DispersionRelation m;
  m.grid = g;
  m.species_label = "min";
  m.values.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double best = kInf;
    for (const auto& s : species)
      if (s.supported(i)) best = std::min(best, s.values[i]);
    if (best == kInf)
      throw std::invalid_argument("species_min: grid point " + coord_str(g.point(i), g.d) +
                                  " covered by no species");
    m.values[i] = best;
  }
  return m;
}

static constexpr long kHullPointGuard = 100000;  // d=3 stays coarse-grid

inline void check_hull_guard(const MomentumGrid& g) {
  if (static_cast<long>(g.size()) > kHullPointGuard)
    throw guard_error("hull operations guarded to <= " + std::to_string(kHullPointGuard) +
                      " grid points, got " + std::to_string(g.size()));
}

// (f (+) g)(k) = min over exact coordinate pairs k1 + k2 = k inside the window.
// Window truncation makes the result an upper bound for the untruncated convolution.
inline SpectrumEnvelope minplus_convolve(const SpectrumEnvelope& f, const SpectrumEnvelope& g) {
  if (!f.grid.same_lattice(g.grid)) throw std::invalid_argument("minplus_convolve: grid mismatch");
  check_hull_guard(f.grid);
  const MomentumGrid& grid = f.grid;
  const std::size_t n = grid.size();

  SpectrumEnvelope out;
  out.grid = grid;
  out.sector_tag = f.sector_tag;
  out.values.assign(n, kInf);
  for (std::size_t i = 0; i < n; ++i) {
    if (f.values[i] == kInf) continue;
    const Coord& k1 = grid.point(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (g.values[j] == kInf) continue;
      const long t = grid.index_of(coord_add(k1, grid.point(j)));
      if (t < 0) continue;
      const double v = f.values[i] + g.values[j];
      if (v < out.values[static_cast<std::size_t>(t)]) out.values[static_cast<std::size_t>(t)] = v;
    }
  }
  return out;
}

namespace detail {

// Parity-tracked Bellman-Ford relaxation over (sector x grid). States are seeded
// with single quasiparticles (odd); each relaxation appends one constituent, so
// every partial sum is itself a reachable window state ("windowed" semantics).
// Values decrease strictly and are bounded by 0, so the worklist terminates.
struct ParityHull {
  std::vector<double> odd, even;
};

inline ParityHull parity_hull_dp(const DispersionRelation& omega) {
  const MomentumGrid& g = omega.grid;
  const std::size_t n = g.size();
  std::vector<std::size_t> constituents;
  for (std::size_t i = 0; i < n; ++i)
    if (omega.supported(i)) {
      if (omega.values[i] < 0.0)
        throw std::invalid_argument("subadditive_hull: negative dispersion value (hull diverges)");
      constituents.push_back(i);
    }

  ParityHull h;
  h.odd.assign(n, kInf);
  h.even.assign(n, kInf);
  std::deque<std::size_t> work;  // state = parity * n + index, parity 0=odd, 1=even
  std::vector<std::uint8_t> queued(2 * n, 0);
  auto push = [&](std::size_t s) {
    if (!queued[s]) {
      queued[s] = 1;
      work.push_back(s);
    }
  };
  for (std::size_t i : constituents) {
    if (omega.values[i] < h.odd[i]) {
      h.odd[i] = omega.values[i];
      push(i);
    }
  }
  while (!work.empty()) {
    const std::size_t s = work.front();
    work.pop_front();
    queued[s] = 0;
    const std::size_t p = s / n, i = s % n;
    const double base = (p == 0 ? h.odd : h.even)[i];
    if (base == kInf) continue;
    std::vector<double>& flip = p == 0 ? h.even : h.odd;
    for (std::size_t c : constituents) {
      const long t = g.index_of(coord_add(g.point(i), g.point(c)));
      if (t < 0) continue;
      const double v = base + omega.values[c];
      if (v < flip[static_cast<std::size_t>(t)]) {
        flip[static_cast<std::size_t>(t)] = v;
        push((1 - p) * n + static_cast<std::size_t>(t));
      }
    }
  }
  return h;
}

}  // namespace detail

// Strict-spectrum envelopes: odd = best odd quasiparticle count, even = best even
// count >= 2 (vacuum excluded at k = 0), full = min of the two.
inline SpectrumEnvelope subadditive_hull(const DispersionRelation& omega,
                                         Sector sector = Sector::full,
                                         WindowMode mode = WindowMode::windowed) {
  check_hull_guard(omega.grid);
  const detail::ParityHull h = detail::parity_hull_dp(omega);

  SpectrumEnvelope e;
  e.grid = omega.grid;
  e.sector_tag = sector_name(sector);
  const std::size_t n = omega.grid.size();
  e.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    switch (sector) {
      case Sector::odd: e.values[i] = h.odd[i]; break;
      case Sector::even: e.values[i] = h.even[i]; break;
      default: e.values[i] = std::min(h.odd[i], h.even[i]);
    }
  }
  return mode == WindowMode::reporting ? restrict_to_half_window(e) : e;
}

inline SpectrumEnvelope essential_hull(const SpectrumEnvelope& envelope_full) {
  if (envelope_full.sector_tag != "full")
    throw std::invalid_argument("essential_hull: expects a full-sector envelope");
  SpectrumEnvelope e = minplus_convolve(envelope_full, envelope_full);
  e.sector_tag = "essential_full";
  return e;
}

struct SectorEssPair {
  SpectrumEnvelope essential_even;
  SpectrumEnvelope essential_odd;
};

inline SectorEssPair combine_sector_ess(const SpectrumEnvelope& even,
                                        const SpectrumEnvelope& odd) {
  if (even.sector_tag != "even" || odd.sector_tag != "odd")
    throw std::invalid_argument("combine_sector_ess: expects (even, odd) envelopes");
  if (!even.grid.same_lattice(odd.grid))
    throw std::invalid_argument("combine_sector_ess: grid mismatch");

  SectorEssPair out;
  out.essential_odd = minplus_convolve(odd, even);
  out.essential_odd.sector_tag = "essential_odd";
  out.essential_even = minplus_convolve(even, even);
  const SpectrumEnvelope oo = minplus_convolve(odd, odd);
  for (std::size_t i = 0; i < oo.values.size(); ++i)
    out.essential_even.values[i] = std::min(out.essential_even.values[i], oo.values[i]);
  out.essential_even.sector_tag = "essential_even";
  return out;
}

inline SpectrumSummary gap_and_cvel(const SpectrumEnvelope& e) {
  SpectrumSummary s;
  const MomentumGrid& g = e.grid;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = e.values[i];
    if (v == kInf) continue;
    if (v < s.gap) {
      s.gap = v;
      s.argmin_gap = g.point(i);
    }
    const Coord& c = g.point(i);
    if (c != Coord{0, 0, 0}) {
      const double ratio = v / g.norm(c);
      if (ratio < s.critical_velocity) {
        s.critical_velocity = ratio;
        s.argmin_cvel = c;
      }
    }
  }
  if (s.gap == kInf) throw std::invalid_argument("gap_and_cvel: envelope is +inf everywhere");
  return s;
}

// Oracle window semantics: "free" lets intermediate sums leave the window
// (constituents only are window-restricted); "windowed" keeps every partial sum
// inside, matching the DP exactly.
enum class OracleWindow { free, windowed };

// Independent oracle: exact minimum over quasiparticle multisets of 1..n_max
// constituents, computed layer by layer (bounded compositions over fresh arrays,
// as opposed to the DP's in-place unbounded relaxation). In free mode the layers
// live on an extended cube so no intermediate sum is ever clipped.
inline SpectrumEnvelope brute_force_hull(const DispersionRelation& omega, int n_max,
                                         Sector sector = Sector::full,
                                         OracleWindow window = OracleWindow::free) {
  if (n_max < 1) throw std::invalid_argument("brute_force_hull: n_max must be >= 1");
  const MomentumGrid& g = omega.grid;
  const int ext_axis = window == OracleWindow::free ? n_max * g.n_axis : g.n_axis;
  double domain_points = 1.0;
  for (int i = 0; i < g.d; ++i) domain_points *= 2.0 * ext_axis + 1.0;
  const double combos = static_cast<double>(n_max) * domain_points * static_cast<double>(g.size());
  if (combos > 1e8)
    throw guard_error("brute_force_hull guard: ~" + std::to_string(static_cast<long long>(combos)) +
                      " combinations after symmetry pruning exceed 1e8; shrink the grid or n_max");

  // dense indexer on the (possibly extended) cube
  const long side = 2L * ext_axis + 1;
  long dsize = 1;
  for (int i = 0; i < g.d; ++i) dsize *= side;
  auto dindex = [&](const Coord& c) -> long {
    long idx = 0;
    for (int i = 0; i < g.d; ++i) {
      if (c[i] < -ext_axis || c[i] > ext_axis) return -1;
      idx = idx * side + (c[i] + ext_axis);
    }
    return idx;
  };
  auto dcoord = [&](long idx) -> Coord {
    Coord c{0, 0, 0};
    for (int i = g.d - 1; i >= 0; --i) {
      c[i] = static_cast<int>(idx % side) - ext_axis;
      idx /= side;
    }
    return c;
  };

  std::vector<std::size_t> constituents;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (omega.supported(i)) {
      if (omega.values[i] < 0.0)
        throw std::invalid_argument("brute_force_hull: negative dispersion value");
      constituents.push_back(i);
    }

  std::vector<double> layer(dsize, kInf), next(dsize, kInf);
  std::vector<double> best_odd(dsize, kInf), best_even(dsize, kInf);
  for (std::size_t c : constituents)
    layer[dindex(g.point(c))] = omega.values[c];
  for (long t = 0; t < dsize; ++t) best_odd[t] = layer[t];

  for (int n = 2; n <= n_max; ++n) {
    std::fill(next.begin(), next.end(), kInf);
    for (long t = 0; t < dsize; ++t) {
      if (layer[t] == kInf) continue;
      const Coord from = dcoord(t);
      for (std::size_t c : constituents) {
        const long u = dindex(coord_add(from, g.point(c)));
        if (u < 0) continue;
        const double v = layer[t] + omega.values[c];
        if (v < next[u]) next[u] = v;
      }
    }
    std::vector<double>& best = (n % 2 == 0) ? best_even : best_odd;
    for (long t = 0; t < dsize; ++t) best[t] = std::min(best[t], next[t]);
    layer.swap(next);
  }

  SpectrumEnvelope e;
  e.grid = g;
  e.sector_tag = sector_name(sector);
  e.values.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const long t = dindex(g.point(i));
    switch (sector) {
      case Sector::odd: e.values[i] = best_odd[t]; break;
      case Sector::even: e.values[i] = best_even[t]; break;
      default: e.values[i] = std::min(best_odd[t], best_even[t]);
    }
  }
  return e;
}

}  // namespace fermispec
