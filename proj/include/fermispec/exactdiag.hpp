#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "dispersion.hpp"
#include "errors.hpp"
#include "grid.hpp"

namespace fermispec {

// Spin-1/2 modes on a tiny momentum window; bit = 2*k_index + spin (up < down).
struct ModeSet {
  MomentumGrid grid;
  static constexpr int spin_dim = 2;

  int bit_count() const { return 2 * static_cast<int>(grid.size()); }
  int bit_of(std::size_t k_idx, int spin) const { return 2 * static_cast<int>(k_idx) + spin; }
  std::size_t k_of_bit(int bit) const { return static_cast<std::size_t>(bit / 2); }
  int spin_of_bit(int bit) const { return bit % 2; }
};

inline ModeSet make_mode_set(const MomentumGrid& grid) {
  const int bits = 2 * static_cast<int>(grid.size());
  if (bits > 16)
    throw guard_error("exactdiag: " + std::to_string(grid.size()) + " momentum modes need " +
                      std::to_string(bits) + " bits; the Fock guard is 16 (dimension 65536)");
  ModeSet m;
  m.grid = grid;
  return m;
}

// Interaction of Eq-(resa5) type: (1/2L^d) sum_{k1+k2=k3+k4} q Sum_{ss'} a*_{k1 s} a*_{k2 s'} a_{k3 s'} a_{k4 s},
// with q(k1,k2,k3,k4) = Vhat(k1-k4) for a local potential.
struct QuadrupleEntry {
  Coord k1{0, 0, 0}, k2{0, 0, 0}, k3{0, 0, 0}, k4{0, 0, 0};
  double value = 0.0;
};

struct Interaction {
  enum class Kind { none, local, general } kind = Kind::none;
  std::function<double(const Coord&)> vhat;
  std::map<std::array<Coord, 4>, double> q_table;

  static Interaction none() { return Interaction{}; }

  static Interaction local(std::function<double(const Coord&)> v) {
    Interaction i;
    i.kind = Kind::local;
    i.vhat = std::move(v);
    return i;
  }

  static Interaction general(const std::vector<QuadrupleEntry>& entries) {
    Interaction i;
    i.kind = Kind::general;
    for (const auto& e : entries) {
      if (coord_add(e.k1, e.k2) != coord_add(e.k3, e.k4))
        throw std::invalid_argument("exactdiag: momentum-nonconserving quadruple (" +
                                    coord_str(e.k1, 3) + "," + coord_str(e.k2, 3) + "|" +
                                    coord_str(e.k3, 3) + "," + coord_str(e.k4, 3) + ") rejected");
      i.q_table[{e.k1, e.k2, e.k3, e.k4}] = e.value;
    }
    return i;
  }

  double q(const Coord& k1, const Coord& k2, const Coord& k3, const Coord& k4) const {
    switch (kind) {
      case Kind::none:
        return 0.0;
      case Kind::local:
        return vhat(coord_sub(k1, k4));
      case Kind::general: {
        const auto it = q_table.find({k1, k2, k3, k4});
        return it == q_table.end() ? 0.0 : it->second;
      }
    }
    return 0.0;
  }
};

struct SectorBlock {
  Coord total_momentum{0, 0, 0};  // exact integer coordinates
  int parity = 1;                 // (-1)^N
  int particle_number = 0;
  std::vector<std::uint32_t> basis_states;
  Eigen::MatrixXd matrix;
  std::vector<double> eigenvalues;
};

namespace ed_detail {

inline int jw_sign(std::uint32_t mask, int bit) {
  return (std::popcount(mask & ((1u << bit) - 1u)) & 1) ? -1 : 1;
}

inline Coord mask_momentum(const ModeSet& modes, std::uint32_t mask) {
  Coord k{0, 0, 0};
  while (mask) {
    const int b = std::countr_zero(mask);
    k = coord_add(k, modes.grid.point(modes.k_of_bit(b)));
    mask &= mask - 1;
  }
  return k;
}

inline bool is_diagonal(const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) != 0.0) return false;
  return true;
}

}  // namespace ed_detail

inline std::vector<SectorBlock> build_blocks(const ModeSet& modes, const DispersionRelation& tau,
                                             const Interaction& inter, double coupling = 1.0) {
  if (!modes.grid.same_lattice(tau.grid))
    throw std::invalid_argument("build_blocks: tau grid does not match the mode set");
  const int nbits = modes.bit_count();
  if (nbits > 16) throw guard_error("build_blocks: mode-count guard exceeded");
  const std::uint32_t dim = 1u << nbits;
  const double pref = coupling * 0.5 / std::pow(modes.grid.box_length, modes.grid.d);

  // bucket the Fock basis by (total momentum, N)
  std::map<std::pair<Coord, int>, std::vector<std::uint32_t>> buckets;
  for (std::uint32_t m = 0; m < dim; ++m)
    buckets[{ed_detail::mask_momentum(modes, m), std::popcount(m)}].push_back(m);

  std::vector<SectorBlock> blocks;
  blocks.reserve(buckets.size());
  std::vector<std::uint32_t> block_of(dim), local_of(dim);
  for (auto& [key, states] : buckets) {
    SectorBlock b;
    b.total_momentum = key.first;
    b.particle_number = key.second;
    b.parity = (key.second & 1) ? -1 : 1;
    b.basis_states = std::move(states);
    for (std::size_t i = 0; i < b.basis_states.size(); ++i) {
      block_of[b.basis_states[i]] = static_cast<std::uint32_t>(blocks.size());
      local_of[b.basis_states[i]] = static_cast<std::uint32_t>(i);
    }
    blocks.push_back(std::move(b));
  }

  const std::size_t npts = modes.grid.size();
  for (auto& b : blocks) {
    const auto n = static_cast<Eigen::Index>(b.basis_states.size());
    b.matrix = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index col = 0; col < n; ++col) {
      const std::uint32_t m = b.basis_states[static_cast<std::size_t>(col)];
      double kin = 0.0;
      for (std::uint32_t rest = m; rest;) {
        const int bit = std::countr_zero(rest);
        rest &= rest - 1;
        kin += tau.values[modes.k_of_bit(bit)];
      }
      b.matrix(col, col) += kin;
      if (inter.kind == Interaction::Kind::none) continue;

      for (int b4 = 0; b4 < modes.bit_count(); ++b4) {
        if (!(m >> b4 & 1u)) continue;
        const int spin_s = modes.spin_of_bit(b4);
        const Coord k4 = modes.grid.point(modes.k_of_bit(b4));
        const std::uint32_t m1 = m ^ (1u << b4);
        const int sg1 = ed_detail::jw_sign(m, b4);
        for (int b3 = 0; b3 < modes.bit_count(); ++b3) {
          if (!(m1 >> b3 & 1u)) continue;
          const int spin_t = modes.spin_of_bit(b3);
          const Coord k3 = modes.grid.point(modes.k_of_bit(b3));
          const std::uint32_t m2 = m1 ^ (1u << b3);
          const int sg2 = sg1 * ed_detail::jw_sign(m1, b3);
          const Coord ksum = coord_add(k3, k4);
          for (std::size_t i1 = 0; i1 < npts; ++i1) {
            const Coord k1 = modes.grid.point(i1);
            const long i2 = modes.grid.index_of(coord_sub(ksum, k1));
            if (i2 < 0) continue;
            const int b2 = modes.bit_of(static_cast<std::size_t>(i2), spin_t);
            if (m2 >> b2 & 1u) continue;
            const std::uint32_t m3 = m2 | (1u << b2);
            const int sg3 = sg2 * ed_detail::jw_sign(m2, b2);
            const int b1 = modes.bit_of(i1, spin_s);
            if (m3 >> b1 & 1u) continue;
            const std::uint32_t m4 = m3 | (1u << b1);
            const int sg4 = sg3 * ed_detail::jw_sign(m3, b1);
            const double q = inter.q(k1, modes.grid.point(static_cast<std::size_t>(i2)), k3, k4);
            if (q == 0.0) continue;
            if (block_of[m4] != block_of[m])
              throw std::logic_error("build_blocks: interaction left its (K, N) block");
            b.matrix(static_cast<Eigen::Index>(local_of[m4]), col) += pref * sg4 * q;
          }
        }
      }
    }

    double asym = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j)
        asym = std::max(asym, std::abs(b.matrix(i, j) - b.matrix(j, i)));
    if (asym > 1e-12)
      throw std::invalid_argument("build_blocks: non-hermitian interaction, asymmetry " +
                                  std::to_string(asym));

    b.eigenvalues.resize(static_cast<std::size_t>(n));
    if (ed_detail::is_diagonal(b.matrix)) {
      for (Eigen::Index i = 0; i < n; ++i)
        b.eigenvalues[static_cast<std::size_t>(i)] = b.matrix(i, i);
      std::sort(b.eigenvalues.begin(), b.eigenvalues.end());
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.matrix, Eigen::EigenvaluesOnly);
      for (Eigen::Index i = 0; i < n; ++i)
        b.eigenvalues[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    }
  }
  return blocks;
}

struct GroundInfo {
  double energy = kInf;
  Coord momentum{0, 0, 0};
  int parity = 1;
  int particle_number = 0;
  std::size_t block_index = 0;
};

inline GroundInfo ground_energy(const std::vector<SectorBlock>& blocks) {
  // Exact energy ties (tau zeros spawn them) break toward the most central block:
  // smallest |K|_1, then K, then N.
  GroundInfo g;
  auto rank = [](const SectorBlock& b) {
    const Coord& k = b.total_momentum;
    return std::make_tuple(std::abs(k[0]) + std::abs(k[1]) + std::abs(k[2]), k,
                           b.particle_number);
  };
  bool have = false;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].eigenvalues.empty()) continue;
    const double e = blocks[i].eigenvalues.front();
    if (!have || e < g.energy ||
        (e == g.energy && rank(blocks[i]) < rank(blocks[g.block_index]))) {
      have = true;
      g.energy = e;
      g.momentum = blocks[i].total_momentum;
      g.parity = blocks[i].parity;
      g.particle_number = blocks[i].particle_number;
      g.block_index = i;
    }
  }
  return g;
}

// eps^{L,+-}(K) = bottom of the parity sector at K minus E, with the strict-spectrum
// convention at (K=0, even): one copy of the ground eigenvalue is excluded.
struct ExcitationBottoms {
  std::map<Coord, double> even, odd;
  bool ground_degenerate = false;
};

inline ExcitationBottoms excitation_bottoms(const std::vector<SectorBlock>& blocks, double E) {
  ExcitationBottoms out;
  std::map<Coord, std::vector<double>> even_all;
  for (const auto& b : blocks) {
    if (b.eigenvalues.empty()) continue;
    if (b.parity == -1) {
      auto [it, fresh] = out.odd.try_emplace(b.total_momentum, b.eigenvalues.front() - E);
      if (!fresh) it->second = std::min(it->second, b.eigenvalues.front() - E);
    } else {
      auto& bag = even_all[b.total_momentum];
      bag.insert(bag.end(), b.eigenvalues.begin(), b.eigenvalues.end());
    }
  }
  for (auto& [k, bag] : even_all) {
    std::sort(bag.begin(), bag.end());
    if (k == Coord{0, 0, 0}) {
      // bag.front() is the ground state (the vacuum lives here too); drop one copy
      if (bag.size() >= 2 && bag[1] - bag[0] <= 1e-10) out.ground_degenerate = true;
      if (bag.size() >= 2) out.even[k] = bag[1] - E;
    } else {
      out.even[k] = bag.front() - E;
    }
  }
  return out;
}

// nu_j^{L,n,+-}(k): j-th lowest eigenvalue of the (k, n) block minus E, counted with
// multiplicity; the (k=0, even) sector skips one eigenvalue (strict spectrum).
inline std::optional<double> shells(const std::vector<SectorBlock>& blocks, int j, int n,
                                    int parity, const Coord& k) {
  if (j < 1) return std::nullopt;
  if (((n & 1) ? -1 : 1) != parity) return std::nullopt;
  const double E = ground_energy(blocks).energy;
  std::vector<double> bag;
  for (const auto& b : blocks)
    if (b.total_momentum == k && b.particle_number == n)
      bag.insert(bag.end(), b.eigenvalues.begin(), b.eigenvalues.end());
  if (bag.empty()) return std::nullopt;
  std::sort(bag.begin(), bag.end());
  const std::size_t idx =
      static_cast<std::size_t>(j - 1) + ((k == Coord{0, 0, 0} && parity == 1) ? 1u : 0u);
  if (idx >= bag.size()) return std::nullopt;
  return bag[idx] - E;
}

struct FiniteVolumeSpectrum {
  GroundInfo ground;
  std::map<Coord, double> bottoms_even, bottoms_odd;
  bool ground_degenerate = false;
};

inline FiniteVolumeSpectrum finite_volume_spectrum(const std::vector<SectorBlock>& blocks) {
  FiniteVolumeSpectrum s;
  s.ground = ground_energy(blocks);
  ExcitationBottoms eb = excitation_bottoms(blocks, s.ground.energy);
  s.bottoms_even = std::move(eb.even);
  s.bottoms_odd = std::move(eb.odd);
  s.ground_degenerate = eb.ground_degenerate;
  return s;
}

// Structural sanity: blocks partition the Fock space and their spectra reassemble the
// trace of H, which is recomputed here from scratch in closed form (occupation counting),
// never touching the block matrices.
struct PartitionReport {
  std::size_t basis_total = 0;
  std::size_t fock_dimension = 0;
  double trace_blocks = 0.0;
  double trace_independent = 0.0;
  double rel_error = 0.0;
  bool partition_ok = false;
  bool trace_ok = false;
};

inline PartitionReport parity_momentum_check(const ModeSet& modes, const DispersionRelation& tau,
                                             const Interaction& inter, double coupling,
                                             const std::vector<SectorBlock>& blocks) {
  PartitionReport rep;
  rep.fock_dimension = 1u << modes.bit_count();
  for (const auto& b : blocks) {
    rep.basis_total += b.basis_states.size();
    for (double e : b.eigenvalues) rep.trace_blocks += e;
  }
  rep.partition_ok = rep.basis_total == rep.fock_dimension;

  // Each mode is occupied in half the masks; each distinct mode pair in a quarter.
  const int nbits = modes.bit_count();
  const double half = std::ldexp(1.0, nbits - 1);
  const double quarter = std::ldexp(1.0, nbits - 2);
  double kin = 0.0;
  for (std::size_t i = 0; i < modes.grid.size(); ++i) kin += 2.0 * tau.values[i];
  rep.trace_independent = half * kin;
  if (inter.kind != Interaction::Kind::none) {
    const double pref = coupling * 0.5 / std::pow(modes.grid.box_length, modes.grid.d);
    double diag_sum = 0.0;
    for (std::size_t a = 0; a < modes.grid.size(); ++a)
      for (std::size_t b = 0; b < modes.grid.size(); ++b) {
        const Coord &ka = modes.grid.point(a), &kb = modes.grid.point(b);
        const double direct = inter.q(ka, kb, kb, ka);
        const double exchange = inter.q(ka, kb, ka, kb);
        const int dir_pairs = a == b ? 2 : 4;   // spin combos minus same-mode
        const int exch_pairs = a == b ? 0 : 2;  // sigma == sigma' only
        diag_sum += direct * dir_pairs - exchange * exch_pairs;
      }
    rep.trace_independent += pref * quarter * diag_sum;
  }
  const double scale = std::max({std::abs(rep.trace_blocks), std::abs(rep.trace_independent), 1.0});
  rep.rel_error = std::abs(rep.trace_blocks - rep.trace_independent) / scale;
  rep.trace_ok = rep.rel_error <= 1e-8;
  return rep;
}

}  // namespace fermispec
