#ifndef SPHERE_RE_DYNAMICS_HPP
#define SPHERE_RE_DYNAMICS_HPP

#include "sphere_re/embedding.hpp"

// Independent dynamical verification. The equations of motion follow from
// the Lagrangian
//   L = sum_k m_k/2 (th_k'^2 + ph_k'^2 sin^2 th_k) + sum_{i<j} m_i m_j cot(s_ij)
// (R = 1, cotangent pair potential). Euler-Lagrange, with s_ij the mutual
// arc angle:
//   th_k'' = ph_k'^2 sin th_k cos th_k
//            - sum_j m_j (d s_kj / d th_k) / sin^2 s_kj
//   ph_k'' = -2 cot(th_k) th_k' ph_k'
//            - (1/sin^2 th_k) sum_j m_j (d s_kj / d ph_k) / sin^2 s_kj
// An embedded relative equilibrium has both accelerations zero.

namespace sphere_re {

struct PhaseState {
  Vec3 theta{}, phi{}, theta_dot{}, phi_dot{};
};

inline PhaseState state_from_configuration(const Configuration& cfg) {
  PhaseState st;
  st.theta = cfg.theta;
  st.phi = cfg.phi;
  st.theta_dot = {0, 0, 0};
  st.phi_dot = {cfg.omega, cfg.omega, cfg.omega};
  return st;
}

namespace detail {

struct PairGeometry {
  double cosS, sinS;        // mutual angle sigma_ij
  double dS_dthi, dS_dphi;  // partials w.r.t. body i's coordinates
};

inline PairGeometry pair_geometry(const PhaseState& st, int i, int j) {
  double ci = std::cos(st.theta[i]), si = std::sin(st.theta[i]);
  double cj = std::cos(st.theta[j]), sj = std::sin(st.theta[j]);
  double cd = std::cos(st.phi[i] - st.phi[j]),
         sd = std::sin(st.phi[i] - st.phi[j]);
  PairGeometry g;
  g.cosS = ci * cj + si * sj * cd;
  if (std::fabs(g.cosS) > 1 - 1e-10)
    throw CollisionProximity("bodies too close or antipodal");
  g.sinS = std::sqrt(1 - g.cosS * g.cosS);
  g.dS_dthi = (si * cj - ci * sj * cd) / g.sinS;
  g.dS_dphi = si * sj * sd / g.sinS;
  return g;
}

}  // namespace detail

/// Time derivative of the 12-component phase state.
inline PhaseState state_derivative(const PhaseState& st, const MassTriple& m) {
  PhaseState d;
  d.theta = st.theta_dot;
  d.phi = st.phi_dot;
  for (int k = 0; k < 3; ++k) {
    double fth = 0, fph = 0;
    for (int j = 0; j < 3; ++j) {
      if (j == k) continue;
      auto g = detail::pair_geometry(st, k, j);
      double pull = m.mass(j) / (g.sinS * g.sinS);
      fth -= pull * g.dS_dthi;
      fph -= pull * g.dS_dphi;
    }
    double sth = std::sin(st.theta[k]), cth = std::cos(st.theta[k]);
    d.theta_dot[k] =
        st.phi_dot[k] * st.phi_dot[k] * sth * cth + fth;
    d.phi_dot[k] =
        -2 * (cth / sth) * st.theta_dot[k] * st.phi_dot[k] + fph / (sth * sth);
  }
  return d;
}

inline PhaseState axpy(const PhaseState& a, double h, const PhaseState& b) {
  PhaseState r;
  for (int k = 0; k < 3; ++k) {
    r.theta[k] = a.theta[k] + h * b.theta[k];
    r.phi[k] = a.phi[k] + h * b.phi[k];
    r.theta_dot[k] = a.theta_dot[k] + h * b.theta_dot[k];
    r.phi_dot[k] = a.phi_dot[k] + h * b.phi_dot[k];
  }
  return r;
}

/// One classical fixed-step RK4 step.
inline PhaseState rk4_step(const PhaseState& st, double h,
                           const MassTriple& m) {
  PhaseState k1 = state_derivative(st, m);
  PhaseState k2 = state_derivative(axpy(st, h / 2, k1), m);
  PhaseState k3 = state_derivative(axpy(st, h / 2, k2), m);
  PhaseState k4 = state_derivative(axpy(st, h, k3), m);
  PhaseState r = st;
  for (int k = 0; k < 3; ++k) {
    r.theta[k] += h / 6 * (k1.theta[k] + 2 * k2.theta[k] + 2 * k3.theta[k] +
                           k4.theta[k]);
    r.phi[k] +=
        h / 6 * (k1.phi[k] + 2 * k2.phi[k] + 2 * k3.phi[k] + k4.phi[k]);
    r.theta_dot[k] += h / 6 * (k1.theta_dot[k] + 2 * k2.theta_dot[k] +
                               2 * k3.theta_dot[k] + k4.theta_dot[k]);
    r.phi_dot[k] += h / 6 * (k1.phi_dot[k] + 2 * k2.phi_dot[k] +
                             2 * k3.phi_dot[k] + k4.phi_dot[k]);
  }
  return r;
}

inline Shape shape_of_state(const PhaseState& st) {
  Vec3 sig{};
  for (int k = 0; k < 3; ++k) {
    int i = (k + 1) % 3, j = (k + 2) % 3;
    double c = std::cos(st.theta[i]) * std::cos(st.theta[j]) +
               std::sin(st.theta[i]) * std::sin(st.theta[j]) *
                   std::cos(st.phi[i] - st.phi[j]);
    sig[k] = std::acos(std::clamp(c, -1.0, 1.0));
  }
  return Shape(sig);
}

/// Total energy T + V with V = -sum m_i m_j cot s_ij.
inline double energy(const PhaseState& st, const MassTriple& m) {
  double T = 0;
  for (int k = 0; k < 3; ++k)
    T += 0.5 * m.mass(k) *
         (st.theta_dot[k] * st.theta_dot[k] +
          st.phi_dot[k] * st.phi_dot[k] * std::pow(std::sin(st.theta[k]), 2));
  double V = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      auto g = detail::pair_geometry(st, i, j);
      V -= m.mass(i) * m.mass(j) * g.cosS / g.sinS;
    }
  return T + V;
}

/// Angular momentum of a general phase state.
inline AngularMomentum state_angular_momentum(const PhaseState& st,
                                              const MassTriple& m) {
  AngularMomentum c;
  for (int k = 0; k < 3; ++k) {
    double sth = std::sin(st.theta[k]), cth = std::cos(st.theta[k]);
    double cph = std::cos(st.phi[k]), sph = std::sin(st.phi[k]);
    c.cx += m.mass(k) *
            (-sph * st.theta_dot[k] - sth * cth * cph * st.phi_dot[k]);
    c.cy += m.mass(k) *
            (cph * st.theta_dot[k] - sth * cth * sph * st.phi_dot[k]);
    c.cz += m.mass(k) * sth * sth * st.phi_dot[k];
  }
  return c;
}

struct IntegrationReport {
  double sigma_drift = 0;        // max over time of |sigma(t) - sigma(0)|_inf
  double energy_drift = 0;       // relative
  double cz_drift = 0;           // relative
  double cxy_max = 0;            // max |c_x|, |c_y| along the trajectory
  PhaseState final_state{};
};

/// Integrate for `periods` revolutions (period 2 pi / omega_ref) with
/// fixed-step RK4 and track the drift diagnostics.
inline IntegrationReport integrate_rigid(const PhaseState& st0,
                                         const MassTriple& m, double omega_ref,
                                         double periods = 1.0,
                                         int steps_per_period = 4096) {
  IntegrationReport rep;
  const Shape sig0 = shape_of_state(st0);
  const double T = periods * 2 * kPi / std::fabs(omega_ref);
  const int n = std::max(1, int(steps_per_period * periods + 0.5));
  const double h = T / n;
  const double e0 = energy(st0, m);
  const double cz0 = state_angular_momentum(st0, m).cz;
  PhaseState st = st0;
  for (int it = 0; it < n; ++it) {
    st = rk4_step(st, h, m);
    Shape sg = shape_of_state(st);
    rep.sigma_drift =
        std::max(rep.sigma_drift, norm_inf(sg.vec() - sig0.vec()));
    AngularMomentum c = state_angular_momentum(st, m);
    rep.cxy_max = std::max({rep.cxy_max, std::fabs(c.cx), std::fabs(c.cy)});
    rep.cz_drift = std::max(rep.cz_drift,
                            std::fabs(c.cz - cz0) / std::max(1.0, std::fabs(cz0)));
    rep.energy_drift = std::max(
        rep.energy_drift,
        std::fabs(energy(st, m) - e0) / std::max(1.0, std::fabs(e0)));
  }
  rep.final_state = st;
  return rep;
}

/// Shape drift of a configuration integrated as-is.
inline double sigma_drift(const Configuration& cfg, const MassTriple& m,
                          double periods = 1.0, int steps_per_period = 4096) {
  return integrate_rigid(state_from_configuration(cfg), m, cfg.omega, periods,
                         steps_per_period)
      .sigma_drift;
}

/// Embed a solved LRE shape and report its shape drift over `periods`
/// revolutions (Definition-of-RE check).
inline double rigidity_check(const Shape& s, const MassTriple& m,
                             double periods = 1.0,
                             int steps_per_period = 4096) {
  return sigma_drift(embed(s, m, +1), m, periods, steps_per_period);
}

}  // namespace sphere_re

#endif  // SPHERE_RE_DYNAMICS_HPP
