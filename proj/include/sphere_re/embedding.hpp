#ifndef SPHERE_RE_EMBEDDING_HPP
#define SPHERE_RE_EMBEDDING_HPP

#include <optional>

#include "sphere_re/shape_core.hpp"

// Realisation of solved shapes as rotating configurations on the sphere:
// colatitudes from the eigenvalue datum, azimuths from the mutual-angle
// relation, angular velocity, and the conserved angular momentum.

namespace sphere_re {

/// Rotating configuration at t = 0. Azimuths follow the convention phi_1 = 0
/// with positive orientation (counterclockwise seen from the north pole);
/// the mirrored triangle is obtained by negating the phi's.
struct Configuration {
  Vec3 theta{};   // colatitudes
  Vec3 phi{};     // azimuths
  double omega = 0;
  int s = +1;     // +1 northern, -1 southern hemisphere

  Vec3 position(int k) const {
    return {std::sin(theta[k]) * std::cos(phi[k]),
            std::sin(theta[k]) * std::sin(phi[k]), std::cos(theta[k])};
  }
};

struct AngularMomentum {
  double cx = 0, cy = 0, cz = 0;
};

enum class EmbedStatus { Ok, NotAnLre, Impossible };

struct EmbedResult {
  EmbedStatus status = EmbedStatus::Impossible;
  Configuration config{};
  std::string reason;
};

namespace detail {

// Pick phi's consistent with all three cos(phi_i - phi_j) constraints and
// positive orientation. cosd[k] is cos(phi_i - phi_j) for the pair opposite
// to body k.
inline bool assign_azimuths(const Vec3& cosd, Configuration& cfg) {
  // cosd[2] constrains (phi1, phi2), cosd[1] constrains (phi3, phi1),
  // cosd[0] constrains (phi2, phi3).
  cfg.phi[0] = 0.0;
  double a12 = std::acos(std::clamp(cosd[2], -1.0, 1.0));
  double a13 = std::acos(std::clamp(cosd[1], -1.0, 1.0));
  cfg.phi[1] = a12;
  double best = 1e300;
  for (double sgn : {+1.0, -1.0}) {
    double cand = sgn * a13;
    double err = std::fabs(std::cos(cfg.phi[1] - cand) - cosd[0]);
    if (err < best) {
      best = err;
      cfg.phi[2] = cand;
    }
  }
  if (best > 1e-6) return false;
  // orientation: positive triple product, unless degenerate (collinear)
  double trip = dot(cfg.position(0), cross(cfg.position(1), cfg.position(2)));
  if (trip < 0) {
    cfg.phi[1] = -cfg.phi[1];
    cfg.phi[2] = -cfg.phi[2];
  }
  return true;
}

}  // namespace detail

/// Angular velocity squared of an LRE shape.
inline double omega_squared(const Shape& s, const MassTriple& m) {
  double s6sum = 0;
  for (int k = 0; k < 3; ++k)
    s6sum += m.mass(k) * std::pow(std::sin(s.sigma(k)), 6);
  return s6sum / (std::pow(std::sin(s.sigma1), 3) *
                  std::pow(std::sin(s.sigma2), 3) *
                  std::pow(std::sin(s.sigma3), 3));
}

/// Embed a solved LRE shape (this includes equator ERE shapes, which have
/// M - lambda = 0 and land on theta = pi/2). Impossibility (M - lambda < 0
/// or an out-of-range cosine) is a first-class outcome so scans can filter
/// shape-space roots with no sphere realisation.
inline EmbedResult try_embed(const Shape& s, const MassTriple& m, int sign
                             = +1, double tol = 1e-9) {
  EmbedResult out;
  Vec2 r = lre_residual(s, m);
  if (std::max(std::fabs(r[0]), std::fabs(r[1])) > 1e-8) {
    out.status = EmbedStatus::NotAnLre;
    out.reason = "lambda residual too large";
    return out;
  }
  const double lam = lambda_triple(s, m).mean();
  const double M = m.total();
  double ml = M - lam;
  if (ml < -tol) {
    out.status = EmbedStatus::Impossible;
    out.reason = "M - lambda < 0";
    return out;
  }
  ml = std::max(ml, 0.0);
  double s6sum = 0;
  for (int k = 0; k < 3; ++k)
    s6sum += m.mass(k) * std::pow(std::sin(s.sigma(k)), 6);
  Configuration cfg;
  cfg.s = sign;
  for (int k = 0; k < 3; ++k) {
    double ct = sign * std::sqrt(ml) * std::pow(std::sin(s.sigma(k)), 3) /
                std::sqrt(s6sum);
    if (std::fabs(ct) > 1.0 + tol) {
      out.status = EmbedStatus::Impossible;
      out.reason = "cos(theta) out of range";
      return out;
    }
    cfg.theta[k] = std::acos(std::clamp(ct, -1.0, 1.0));
  }
  Vec3 cosd{};
  for (int k = 0; k < 3; ++k) {
    int i = (k + 1) % 3, j = (k + 2) % 3;
    double sij = std::sin(cfg.theta[i]) * std::sin(cfg.theta[j]);
    if (sij < 1e-14) {
      out.status = EmbedStatus::Impossible;
      out.reason = "body at a pole";
      return out;
    }
    cosd[k] = (std::cos(s.sigma(k)) -
               std::cos(cfg.theta[i]) * std::cos(cfg.theta[j])) /
              sij;
    if (std::fabs(cosd[k]) > 1.0 + tol) {
      out.status = EmbedStatus::Impossible;
      out.reason = "cos(phi difference) out of range";
      return out;
    }
    cosd[k] = std::clamp(cosd[k], -1.0, 1.0);
  }
  if (!detail::assign_azimuths(cosd, cfg)) {
    out.status = EmbedStatus::Impossible;
    out.reason = "inconsistent azimuth constraints";
    return out;
  }
  cfg.omega = std::sqrt(omega_squared(s, m));
  out.status = EmbedStatus::Ok;
  out.config = cfg;
  return out;
}

/// Throwing wrapper around try_embed.
inline Configuration embed(const Shape& s, const MassTriple& m, int sign = +1) {
  EmbedResult r = try_embed(s, m, sign);
  if (r.status == EmbedStatus::NotAnLre) throw NotAnLRE(r.reason);
  if (r.status == EmbedStatus::Impossible) throw EmbeddingImpossible(r.reason);
  return r.config;
}

/// Embed a collinear shape on the plane sigma_mid = sum of the others as an
/// ERE on a rotating meridian. Bodies are placed in the x-z plane at signed
/// polar angles psi (phi in {0, pi}); the placement and omega^2 are solved
/// from the tangential force balance of the two outer bodies, and the
/// balance of the middle body is the d = 0 consistency condition.
inline Configuration embed_meridian(const Shape& s, const MassTriple& m,
                                    int middle = 2, double tol = 1e-7) {
  const int i = (middle + 1) % 3, j = (middle + 2) % 3;
  if (std::fabs(s.sigma(middle) - s.sigma(i) - s.sigma(j)) > kTolPlane)
    throw DomainError("shape not on the collinear plane");
  if (std::fabs(ere_meridian_d(s, m, middle)) > tol)
    throw NotAnLRE("meridian ERE residual d too large");
  const double si = s.sigma(i), sj = s.sigma(j), sk = s.sigma(middle);
  // order along the circle: body i, then middle at arc sigma_j, then body j
  const double mi = m.mass(i), mj = m.mass(j), mk = m.mass(middle);
  const double s2i = std::sin(si) * std::sin(si),
               s2j = std::sin(sj) * std::sin(sj),
               s2k = std::sin(sk) * std::sin(sk);
  // omega^2 sin(2 psi_i) = -2 (m_mid / sin^2 sj + m_j / sin^2 sk) =: -2 A
  // omega^2 sin(2 psi_j) = +2 (m_mid / sin^2 si + m_i / sin^2 sk) =: +2 B
  const double A = mk / s2j + mj / s2k;
  const double B = mk / s2i + mi / s2k;
  const double K = B / A;
  // psi_j = psi_i + sk:  tan(2 psi_i) = -sin(2 sk) / (cos(2 sk) + K)
  double twopsi = std::atan2(-std::sin(2 * sk), std::cos(2 * sk) + K);
  double psi_i = 0.5 * twopsi;
  if (std::sin(2 * psi_i) > 0) psi_i -= 0.5 * kPi;  // need sin(2 psi_i) < 0
  double w2 = -2 * A / std::sin(2 * psi_i);
  if (!(w2 > 0)) throw EmbeddingImpossible("no positive omega^2");
  Vec3 psi{};
  psi[i] = psi_i;
  psi[middle] = psi_i + sj;
  psi[j] = psi_i + sk;
  // middle-body balance must close (equivalent to d = 0)
  double res = w2 * 0.5 * std::sin(2 * psi[middle]) -
               (mi / s2j - mj / s2i);
  if (std::fabs(res) > 1e-6 * std::max(1.0, w2))
    throw EmbeddingImpossible("meridian balance inconsistent");
  // prefer the mass-weighted northern representative
  double zsum = 0;
  for (int k = 0; k < 3; ++k) zsum += m.mass(k) * std::cos(psi[k]);
  if (zsum < 0)
    for (int k = 0; k < 3; ++k) psi[k] = psi[k] + kPi;
  Configuration cfg;
  cfg.s = +1;
  cfg.omega = std::sqrt(w2);
  for (int k = 0; k < 3; ++k) {
    double p = std::remainder(psi[k], 2 * kPi);
    cfg.theta[k] = std::fabs(p);
    cfg.phi[k] = p >= 0 ? 0.0 : kPi;
  }
  return cfg;
}

/// Recover the arc-angle shape from a configuration via the mutual-angle
/// relation cos sigma_ij = cos th_i cos th_j + sin th_i sin th_j cos dphi.
inline Shape recover_shape(const Configuration& cfg) {
  Vec3 sig{};
  for (int k = 0; k < 3; ++k) {
    int i = (k + 1) % 3, j = (k + 2) % 3;
    double c = std::cos(cfg.theta[i]) * std::cos(cfg.theta[j]) +
               std::sin(cfg.theta[i]) * std::sin(cfg.theta[j]) *
                   std::cos(cfg.phi[i] - cfg.phi[j]);
    sig[k] = std::acos(std::clamp(c, -1.0, 1.0));
  }
  return Shape(sig);
}

/// Angular momentum of a rigidly rotating configuration (theta_dot = 0,
/// phi_dot = omega), R = 1.
inline AngularMomentum angular_momentum(const Configuration& cfg,
                                        const MassTriple& m) {
  AngularMomentum c;
  for (int k = 0; k < 3; ++k) {
    double sc = std::sin(cfg.theta[k]) * std::cos(cfg.theta[k]);
    c.cx -= m.mass(k) * cfg.omega * sc * std::cos(cfg.phi[k]);
    c.cy -= m.mass(k) * cfg.omega * sc * std::sin(cfg.phi[k]);
    c.cz += m.mass(k) * cfg.omega * std::sin(cfg.theta[k]) *
            std::sin(cfg.theta[k]);
  }
  return c;
}

}  // namespace sphere_re

#endif  // SPHERE_RE_EMBEDDING_HPP
