#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dispersion.hpp"
#include "errors.hpp"
#include "grid.hpp"

namespace fermispec {

// Dense kernels are P x P; keep them desk-sized.
static constexpr long kKernelPointGuard = 2048;

// Pairing and Hartree kernels of the spin-1/2 reduction:
//   alpha(k,k') = (1/2)(q(k,-k,-k',k') + q(-k,k,-k',k')),  beta(k,k') = 2q(k,k',k',k) - q(k',k,k',k)
// and for local potentials alpha = (1/2)(Vhat(k-k') + Vhat(k+k')), beta = 2Vhat(0) - Vhat(k-k').
struct InteractionKernel {
  MomentumGrid grid;
  Eigen::MatrixXd alpha;
  Eigen::MatrixXd beta;
  std::string coupling_descriptor;

  double volume() const { return std::pow(grid.box_length, grid.d); }
};

inline std::function<double(const Coord&)> vhat_contact(double g) {
  return [g](const Coord&) { return -g; };
}

// Vhat(q) = -g * exp(-width * |q|^2); width=1 gives alpha(k,k) = (1/2)(-g - g e^{-4k^2}).
inline std::function<double(const Coord&)> vhat_gaussian(double g, double width,
                                                         const MomentumGrid& grid) {
  const double h = grid.spacing;
  const int d = grid.d;
  return [g, width, h, d](const Coord& q) {
    double q2 = 0.0;
    for (int i = 0; i < d; ++i) q2 += (q[i] * h) * (q[i] * h);
    return -g * std::exp(-width * q2);
  };
}

inline InteractionKernel kernels_from_potential(const std::function<double(const Coord&)>& vhat,
                                                const MomentumGrid& grid) {
  if (static_cast<long>(grid.size()) > kKernelPointGuard)
    throw guard_error("kernels_from_potential: dense kernels guarded to <= " +
                      std::to_string(kKernelPointGuard) + " grid points");
  // Vhat sees arguments k +- k' from the doubled window; probe evenness there.
  const int m = 2 * grid.n_axis;
  const int lo1 = grid.d >= 2 ? -m : 0, hi1 = grid.d >= 2 ? m : 0;
  const int lo2 = grid.d >= 3 ? -m : 0, hi2 = grid.d >= 3 ? m : 0;
  for (int c0 = -m; c0 <= m; ++c0)
    for (int c1 = lo1; c1 <= hi1; ++c1)
      for (int c2 = lo2; c2 <= hi2; ++c2) {
        const Coord q{c0, c1, c2};
        if (vhat(q) != vhat(coord_neg(q)))
          throw std::invalid_argument("kernels_from_potential: Vhat is not even at q = " +
                                      coord_str(q, grid.d));
      }

  const auto n = static_cast<Eigen::Index>(grid.size());
  InteractionKernel k;
  k.grid = grid;
  k.coupling_descriptor = "potential";
  k.alpha.resize(n, n);
  k.beta.resize(n, n);
  const double v0 = vhat(Coord{0, 0, 0});
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const Coord &ki = grid.point(i), &kj = grid.point(j);
      const double vminus = vhat(coord_sub(ki, kj));
      k.alpha(i, j) = 0.5 * (vminus + vhat(coord_add(ki, kj)));
      k.beta(i, j) = 2.0 * v0 - vminus;
    }
  return k;
}

inline InteractionKernel direct_kernels(
    const std::function<double(const Coord&, const Coord&)>& alpha_fn,
    const std::function<double(const Coord&, const Coord&)>& beta_fn, const MomentumGrid& grid) {
  if (static_cast<long>(grid.size()) > kKernelPointGuard)
    throw guard_error("direct_kernels: dense kernels guarded to <= " +
                      std::to_string(kKernelPointGuard) + " grid points");
  const auto n = static_cast<Eigen::Index>(grid.size());
  InteractionKernel k;
  k.grid = grid;
  k.coupling_descriptor = "direct";
  k.alpha.resize(n, n);
  k.beta.resize(n, n);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const Coord &ki = grid.point(i), &kj = grid.point(j), nki = coord_neg(ki),
                  nkj = coord_neg(kj);
      // symmetrize over the group generated by k <-> k' and k -> -k
      const double a =
          (alpha_fn(ki, kj) + alpha_fn(kj, ki) + alpha_fn(nki, kj) + alpha_fn(kj, nki) +
           alpha_fn(ki, nkj) + alpha_fn(nkj, ki) + alpha_fn(nki, nkj) + alpha_fn(nkj, nki)) /
          8.0;
      const double b = 0.5 * (beta_fn(ki, kj) + beta_fn(kj, ki));
      worst = std::max({worst, std::abs(alpha_fn(ki, kj) - a), std::abs(beta_fn(ki, kj) - b)});
      k.alpha(i, j) = a;
      k.beta(i, j) = b;
    }
  if (worst > 1e-10)
    throw std::invalid_argument("direct_kernels: kernel asymmetry " + std::to_string(worst) +
                                " exceeds 1e-10");
  return k;
}

// sin/cos with the stored-angle convention that 0 and +-pi are exact half turns,
// so normal occupations have sin2theta == 0 identically.
inline void angle_sincos(double t, double& s, double& c) {
  if (t == 0.0) {
    s = 0.0;
    c = 1.0;
  } else if (t == std::numbers::pi || t == -std::numbers::pi) {
    s = 0.0;
    c = -1.0;
  } else {
    s = std::sin(t);
    c = std::cos(t);
  }
}

inline double wrap_angle(double t) {
  const double w = std::remainder(t, 2.0 * std::numbers::pi);
  return w;
}

// BCS-ansatz state: one angle 2theta per {k,-k} orbit, so evenness is exact by storage.
struct HFBState {
  MomentumGrid grid;
  std::vector<double> two_theta;           // per orbit, wrapped to [-pi, pi]
  std::vector<std::size_t> orbit_of;       // grid index -> orbit
  std::vector<std::size_t> orbit_rep;      // orbit -> representative grid index

  static HFBState zeros(const MomentumGrid& g) {
    HFBState s;
    s.grid = g;
    s.orbit_of.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Coord c = g.point(i);
      const Coord nc = coord_neg(c);
      if (!(nc < c)) {  // representative is the lexicographically smaller of {c, -c}
        s.orbit_of[i] = s.orbit_rep.size();
        s.orbit_rep.push_back(i);
      } else {
        s.orbit_of[i] = s.orbit_of[static_cast<std::size_t>(g.index_of(nc))];
      }
    }
    s.two_theta.assign(s.orbit_rep.size(), 0.0);
    return s;
  }

  std::size_t orbits() const { return orbit_rep.size(); }
  double theta2_at(std::size_t grid_idx) const { return two_theta[orbit_of[grid_idx]]; }
  void set_orbit(std::size_t orbit, double t) { two_theta[orbit] = wrap_angle(t); }

  std::vector<double> per_point() const {
    std::vector<double> t(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) t[i] = two_theta[orbit_of[i]];
    return t;
  }
};

struct HFBObservables {
  std::vector<double> delta, xi, O, D;
  double B = 0.0;
};

namespace hfb_detail {

inline void sincos_arrays(const std::vector<double>& t2, Eigen::VectorXd& s, Eigen::VectorXd& w,
                          Eigen::VectorXd& c) {
  const auto n = static_cast<Eigen::Index>(t2.size());
  s.resize(n);
  w.resize(n);
  c.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double si, ci;
    angle_sincos(t2[static_cast<std::size_t>(i)], si, ci);
    s(i) = si;
    c(i) = ci;
    w(i) = 1.0 - ci;
  }
}

}  // namespace hfb_detail

// delta(k) = (1/2L^d) sum alpha(k,k') sin2theta',  xi(k) = tau(k) + (1/2L^d) sum beta(k,k')(1-cos2theta').
struct DeltaXi {
  std::vector<double> delta, xi;
};

inline DeltaXi delta_xi_angles(const InteractionKernel& kernel, const DispersionRelation& tau,
                               const std::vector<double>& t2) {
  if (!kernel.grid.same_lattice(tau.grid))
    throw std::invalid_argument("delta_xi: kernel/tau grid mismatch");
  if (t2.size() != kernel.grid.size()) throw std::invalid_argument("delta_xi: angle count mismatch");
  Eigen::VectorXd s, w, c;
  hfb_detail::sincos_arrays(t2, s, w, c);
  const double pref = 0.5 / kernel.volume();
  const Eigen::VectorXd dv = pref * (kernel.alpha * s);
  Eigen::VectorXd xv = pref * (kernel.beta * w);
  DeltaXi r;
  r.delta.assign(dv.data(), dv.data() + dv.size());
  r.xi.resize(tau.values.size());
  for (std::size_t i = 0; i < r.xi.size(); ++i) r.xi[i] = tau.values[i] + xv(static_cast<Eigen::Index>(i));
  return r;
}

inline double energy_angles(const InteractionKernel& kernel, const DispersionRelation& tau,
                            const std::vector<double>& t2) {
  Eigen::VectorXd s, w, c;
  hfb_detail::sincos_arrays(t2, s, w, c);
  double b = 0.0;
  for (std::size_t i = 0; i < tau.values.size(); ++i)
    b += tau.values[i] * w(static_cast<Eigen::Index>(i));
  const double pref = 0.25 / kernel.volume();
  b += pref * s.dot(kernel.alpha * s);
  b += pref * w.dot(kernel.beta * w);
  return b;
}

// O(k) = delta cos2theta + xi sin2theta; the exact per-angle gradient of energy_angles.
inline std::vector<double> gradient_angles(const InteractionKernel& kernel,
                                           const DispersionRelation& tau,
                                           const std::vector<double>& t2) {
  const DeltaXi dx = delta_xi_angles(kernel, tau, t2);
  std::vector<double> g(t2.size());
  for (std::size_t i = 0; i < t2.size(); ++i) {
    double si, ci;
    angle_sincos(t2[i], si, ci);
    g[i] = dx.delta[i] * ci + dx.xi[i] * si;
  }
  return g;
}

inline DeltaXi compute_delta_xi(const HFBState& state, const InteractionKernel& kernel,
                                const DispersionRelation& tau) {
  return delta_xi_angles(kernel, tau, state.per_point());
}

inline double hfb_energy(const HFBState& state, const InteractionKernel& kernel,
                         const DispersionRelation& tau) {
  return energy_angles(kernel, tau, state.per_point());
}

inline std::vector<double> hfb_gradient(const HFBState& state, const InteractionKernel& kernel,
                                        const DispersionRelation& tau) {
  return gradient_angles(kernel, tau, state.per_point());
}

inline HFBObservables compute_observables(const HFBState& state, const InteractionKernel& kernel,
                                          const DispersionRelation& tau) {
  const std::vector<double> t2 = state.per_point();
  HFBObservables obs;
  DeltaXi dx = delta_xi_angles(kernel, tau, t2);
  obs.delta = std::move(dx.delta);
  obs.xi = std::move(dx.xi);
  obs.B = energy_angles(kernel, tau, t2);
  obs.O.resize(t2.size());
  obs.D.resize(t2.size());
  for (std::size_t i = 0; i < t2.size(); ++i) {
    double si, ci;
    angle_sincos(t2[i], si, ci);
    obs.O[i] = obs.delta[i] * ci + obs.xi[i] * si;
    obs.D[i] = obs.xi[i] * ci - obs.delta[i] * si;
  }
  return obs;
}

enum class HFBBranch { superconducting, normal };

struct HFBSolution {
  HFBState state;
  HFBObservables observables;
  HFBBranch branch = HFBBranch::normal;
  bool converged = false;
  bool cycled = false;
  double residual = kInf;  // max |O(k)|
  int iterations = 0;
  std::vector<double> b_history;
};

// Pairing-biased seed: sin2theta = -Delta0/sqrt(tau^2+Delta0^2) with Delta0 = 0.1 max|tau|.
inline HFBState default_init(const DispersionRelation& tau, double delta0 = 0.0) {
  HFBState s = HFBState::zeros(tau.grid);
  if (delta0 <= 0.0) {
    double scale = 0.0;
    for (double t : tau.values) scale = std::max(scale, std::abs(t));
    delta0 = scale > 0.0 ? 0.1 * scale : 0.1;
  }
  for (std::size_t o = 0; o < s.orbits(); ++o)
    s.set_orbit(o, std::atan2(-delta0, tau.values[s.orbit_rep[o]]));
  return s;
}

namespace hfb_detail {

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Collapse to an exact normal state: angles snapped to {0, pi} by the sign of cos,
// after which delta == 0 and O == 0 identically.
inline void project_normal(HFBState& state) {
  for (std::size_t o = 0; o < state.orbits(); ++o) {
    double si, ci;
    angle_sincos(state.two_theta[o], si, ci);
    state.two_theta[o] = ci >= 0.0 ? 0.0 : std::numbers::pi;
  }
}

}  // namespace hfb_detail

// Damped fixed-point iteration on Eq. (resa1): angles -> (delta, xi) -> target angle
// atan2(-delta, xi), mixed along the shortest angular path.
inline HFBSolution solve_gap_equation(const InteractionKernel& kernel,
                                      const DispersionRelation& tau, const HFBState& init,
                                      double tol = 1e-10, double damping = 0.5,
                                      int max_iter = 20000) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_gap_equation: tol must be positive");
  if (!(damping > 0.0) || damping > 1.0)
    throw std::invalid_argument("solve_gap_equation: damping must lie in (0, 1]");
  if (!init.grid.same_lattice(kernel.grid))
    throw std::invalid_argument("solve_gap_equation: init grid mismatch");

  HFBSolution sol;
  sol.state = init;
  for (int it = 0; it < max_iter; ++it) {
    const std::vector<double> t2 = sol.state.per_point();
    const DeltaXi dx = delta_xi_angles(kernel, tau, t2);
    std::vector<double> grad(t2.size());
    for (std::size_t i = 0; i < t2.size(); ++i) {
      double si, ci;
      angle_sincos(t2[i], si, ci);
      grad[i] = dx.delta[i] * ci + dx.xi[i] * si;
    }
    sol.residual = hfb_detail::max_abs(grad);
    sol.b_history.push_back(energy_angles(kernel, tau, t2));
    sol.iterations = it;
    if (sol.residual <= tol) {
      sol.converged = true;
      break;
    }
    for (std::size_t o = 0; o < sol.state.orbits(); ++o) {
      const std::size_t r = sol.state.orbit_rep[o];
      const double d = dx.delta[r], x = dx.xi[r];
      const double target = (d == 0.0 && x == 0.0) ? 0.0 : std::atan2(-d, x);
      const double step = std::remainder(target - sol.state.two_theta[o], 2.0 * std::numbers::pi);
      sol.state.set_orbit(o, sol.state.two_theta[o] + damping * step);
    }
  }

  sol.observables = compute_observables(sol.state, kernel, tau);
  double max_sin = 0.0;
  for (std::size_t i = 0; i < sol.state.grid.size(); ++i) {
    double si, ci;
    angle_sincos(sol.state.theta2_at(i), si, ci);
    max_sin = std::max(max_sin, std::abs(si));
  }
  if (max_sin > 10.0 * tol) {
    sol.branch = HFBBranch::superconducting;
  } else {
    sol.branch = HFBBranch::normal;
    hfb_detail::project_normal(sol.state);
    sol.observables = compute_observables(sol.state, kernel, tau);
    sol.residual = hfb_detail::max_abs(sol.observables.O);
    if (sol.residual <= tol) sol.converged = true;
  }
  return sol;
}

// Self-consistent occupation (Eq. (pqi1) family): cos2theta = -1 where xi < 0,
// recomputing the Hartree term until the occupied set is stable. Ties (xi == 0)
// go to unoccupied. Occupation cycles break at the smallest-B iterate, flagged.
inline HFBSolution normal_solution(const InteractionKernel& kernel, const DispersionRelation& tau,
                                   int max_iter = 1000) {
  HFBSolution sol;
  sol.state = HFBState::zeros(kernel.grid);
  const std::size_t n_orbit = sol.state.orbits();

  auto angles_of = [&](const std::vector<std::uint8_t>& occ) {
    HFBState s = sol.state;
    for (std::size_t o = 0; o < n_orbit; ++o) s.two_theta[o] = occ[o] ? std::numbers::pi : 0.0;
    return s;
  };

  std::vector<std::uint8_t> occ(n_orbit, 0);
  std::map<std::vector<std::uint8_t>, int> seen;
  double best_b = kInf;
  std::vector<std::uint8_t> best_occ = occ;
  for (int it = 0; it < max_iter; ++it) {
    sol.iterations = it;
    const HFBState s = angles_of(occ);
    const std::vector<double> t2 = s.per_point();
    const DeltaXi dx = delta_xi_angles(kernel, tau, t2);
    const double b = energy_angles(kernel, tau, t2);
    sol.b_history.push_back(b);
    if (b < best_b) {
      best_b = b;
      best_occ = occ;
    }
    std::vector<std::uint8_t> next(n_orbit);
    for (std::size_t o = 0; o < n_orbit; ++o)
      next[o] = dx.xi[sol.state.orbit_rep[o]] < 0.0 ? 1 : 0;
    if (next == occ) {
      sol.converged = true;
      break;
    }
    if (seen.count(next)) {
      sol.cycled = true;
      occ = best_occ;
      break;
    }
    seen[occ] = it;
    occ = next;
  }

  sol.state = angles_of(sol.converged ? occ : (sol.cycled ? best_occ : occ));
  sol.observables = compute_observables(sol.state, kernel, tau);
  sol.residual = hfb_detail::max_abs(sol.observables.O);
  sol.branch = HFBBranch::normal;
  return sol;
}

// D(k) as a single fermionic species for the quasispectrum module (spin degeneracy
// 2 recorded in the label).
inline DispersionRelation quasiparticle_dispersion(const HFBSolution& solution) {
  DispersionRelation d;
  d.grid = solution.state.grid;
  d.values = solution.observables.D;
  d.species_label = "hfb-quasiparticle(spin-degeneracy=2)";
  return d;
}

// Eq. (resa2): dd B = diag(-sin2theta delta + cos2theta xi)
//              + (1/2L^d) alpha cos cos + (1/2L^d) beta sin sin.
inline double hessian_smallest_eig(const HFBSolution& solution, const InteractionKernel& kernel) {
  const std::vector<double> t2 = solution.state.per_point();
  const auto n = static_cast<Eigen::Index>(t2.size());
  Eigen::VectorXd s(n), c(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double si, ci;
    angle_sincos(t2[static_cast<std::size_t>(i)], si, ci);
    s(i) = si;
    c(i) = ci;
  }
  const double pref = 0.5 / kernel.volume();
  Eigen::MatrixXd h = pref * (kernel.alpha.cwiseProduct(c * c.transpose()) +
                              kernel.beta.cwiseProduct(s * s.transpose()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    h(i, i) += -s(i) * solution.observables.delta[iu] + c(i) * solution.observables.xi[iu];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Eq. (resa9): sum sin^2 sqrt(delta^2+xi^2) = -(1/2L^d) sum sin alpha sin.
// The quadratic form on the right must come out nonpositive at superconducting points.
struct AttractivenessReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double quadratic_form = 0.0;  // (1/2L^d) s^T alpha s
};

inline AttractivenessReport attractiveness_identity_residual(const HFBSolution& solution,
                                                             const InteractionKernel& kernel) {
  const std::vector<double> t2 = solution.state.per_point();
  const auto n = static_cast<Eigen::Index>(t2.size());
  Eigen::VectorXd s(n);
  AttractivenessReport rep;
  for (Eigen::Index i = 0; i < n; ++i) {
    double si, ci;
    angle_sincos(t2[static_cast<std::size_t>(i)], si, ci);
    s(i) = si;
    const auto iu = static_cast<std::size_t>(i);
    rep.lhs += si * si *
               std::sqrt(solution.observables.delta[iu] * solution.observables.delta[iu] +
                         solution.observables.xi[iu] * solution.observables.xi[iu]);
  }
  rep.quadratic_form = 0.5 / kernel.volume() * s.dot(kernel.alpha * s);
  rep.rhs = -rep.quadratic_form;
  rep.residual = std::abs(rep.lhs - rep.rhs);
  return rep;
}

// Rigorous bounds (min1)/(min2): E <= B, and E + eps^-(k) <= B + D(k) per momentum.
struct BoundsReport {
  double B = 0.0;
  double exact_ground = 0.0;
  double margin_min1 = 0.0;  // B - E
  bool min1_ok = false;
  struct Entry {
    Coord k{0, 0, 0};
    double eps_minus_exact = 0.0;
    double D = 0.0;
    double margin = 0.0;  // B + D(k) - E - eps^-(k)
  };
  std::vector<Entry> min2;
  double worst_min2_margin = kInf;
  bool min2_ok = true;
  bool all_ok = false;
};

inline BoundsReport variational_bounds(
    const HFBSolution& solution, double exact_ground,
    const std::function<std::optional<double>(const Coord&)>& exact_odd_bottom,
    double min1_slack = 1e-12, double min2_slack = 1e-9) {
  BoundsReport rep;
  rep.B = solution.observables.B;
  rep.exact_ground = exact_ground;
  rep.margin_min1 = rep.B - exact_ground;
  rep.min1_ok = rep.margin_min1 >= -min1_slack;
  const MomentumGrid& g = solution.state.grid;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const std::optional<double> eb = exact_odd_bottom(g.point(i));
    if (!eb) continue;
    BoundsReport::Entry e;
    e.k = g.point(i);
    e.eps_minus_exact = *eb;
    e.D = solution.observables.D[i];
    e.margin = rep.B + e.D - exact_ground - *eb;
    rep.worst_min2_margin = std::min(rep.worst_min2_margin, e.margin);
    if (e.margin < -min2_slack) rep.min2_ok = false;
    rep.min2.push_back(e);
  }
  if (rep.min2.empty()) rep.worst_min2_margin = 0.0;
  rep.all_ok = rep.min1_ok && rep.min2_ok;
  return rep;
}

}  // namespace fermispec
