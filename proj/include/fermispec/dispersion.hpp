#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"

namespace fermispec {

// Grid-sampled single-species dispersion omega(k). support[i] == 0 marks points
// where the species does not exist (the I_i sets); values there are ignored.
struct DispersionRelation {
  MomentumGrid grid;
  std::vector<double> values;
  std::string species_label;
  std::vector<std::uint8_t> support;  // empty == supported everywhere

  bool supported(std::size_t i) const { return support.empty() || support[i] != 0; }
  double value_at(const Coord& c) const {
    const long i = grid.index_of(c);
    if (i < 0) throw std::out_of_range("dispersion value requested outside the window");
    return values[static_cast<std::size_t>(i)];
  }
};

inline DispersionRelation free_dispersion(const MomentumGrid& grid, double mu) {
  DispersionRelation w;
  w.grid = grid;
  w.species_label = "free";
  w.values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    w.values[i] = std::abs(grid.norm2(grid.point(i)) - mu);
  return w;
}

inline DispersionRelation model_dispersion(const MomentumGrid& grid, double mu, double gamma) {
  if (gamma < 0.0) throw std::invalid_argument("model_dispersion: gamma must be nonnegative");
  DispersionRelation w;
  w.grid = grid;
  w.species_label = "model";
  w.values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid.norm2(grid.point(i)) - mu;
    w.values[i] = std::sqrt(t * t + gamma * gamma);
  }
  return w;
}

// E^L and C^L of the filled Fermi sea, spinless convention: sums over |k|^2 <= mu.
struct FreeGasConstants {
  double ground_energy = 0.0;  // E^L
  long occupied_count = 0;     // C^L
};

inline FreeGasConstants free_gas_constants(const MomentumGrid& grid, double mu) {
  if (mu > grid.cutoff * grid.cutoff)
    throw std::invalid_argument("free_gas_constants: mu exceeds the window (occupied shell truncated)");
  FreeGasConstants c;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double k2 = grid.norm2(grid.point(i));
    if (k2 <= mu) {
      c.ground_energy += k2 - mu;
      c.occupied_count += 1;
    }
  }
  return c;
}

}  // namespace fermispec
