#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "envelope.hpp"
#include "grid.hpp"

namespace fermispec {

// Overlay curve for a spectrum diagram. in_spectrum curves (drawn solid) mark a
// singular discrete shell that belongs to the set; dotted curves are reference
// only (the even-sector convention).
struct RegionCurve {
  std::vector<double> values;
  bool in_spectrum = true;
  std::string label;
};

struct SpectrumRegion {
  MomentumGrid grid;
  std::vector<double> energy_axis;
  std::vector<std::uint8_t> membership;  // momentum-major: [k * steps + e]
  std::vector<RegionCurve> curves;

  bool member(std::size_t k, std::size_t e) const { return membership[k * energy_axis.size() + e] != 0; }
};

// membership(k, e) = (e >= eps_ess(k)) or within half a raster step of an
// in-spectrum shell curve; columns stay upward-closed above the essential envelope.
inline SpectrumRegion region_raster(const SpectrumEnvelope& essential,
                                    const std::vector<RegionCurve>& curves, double energy_max,
                                    int energy_steps) {
  if (!(energy_max > 0.0)) throw std::invalid_argument("region_raster: energy_max must be positive");
  if (energy_steps < 2) throw std::invalid_argument("region_raster: need at least 2 energy steps");
  for (const auto& c : curves)
    if (c.values.size() != essential.grid.size())
      throw std::invalid_argument("region_raster: curve length does not match the grid");

  SpectrumRegion r;
  r.grid = essential.grid;
  r.curves = curves;
  const double de = energy_max / (energy_steps - 1);
  r.energy_axis.resize(energy_steps);
  for (int j = 0; j < energy_steps; ++j) r.energy_axis[j] = j * de;

  const std::size_t n = essential.grid.size();
  r.membership.assign(n * energy_steps, 0);
  for (std::size_t k = 0; k < n; ++k) {
    for (int j = 0; j < energy_steps; ++j) {
      const double e = r.energy_axis[j];
      bool in = e >= essential.values[k];
      for (const auto& c : curves)
        if (c.in_spectrum && std::abs(e - c.values[k]) <= 0.5 * de) in = true;
      r.membership[k * energy_steps + j] = in ? 1 : 0;
    }
  }
  return r;
}

}  // namespace fermispec
