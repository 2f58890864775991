#ifndef SPHERE_RE_SHAPE_CORE_HPP
#define SPHERE_RE_SHAPE_CORE_HPP

#include <optional>

#include "sphere_re/core.hpp"

// Algebraic conditions for Lagrange and Euler relative equilibria in shape
// space, with analytic Jacobians.
//
// The Lagrange conditions come from the common-eigenvalue requirement
//   lambda_k = m_i + m_j
//     - (m_i cos(s_j) sin^3(s_i) + m_j cos(s_i) sin^3(s_j)) / sin^3(s_k)
// for every cyclic (i,j,k); an LRE shape satisfies
// lambda_12 = lambda_23 = 0. For root finding and continuation the library
// also exposes the denominator-cleared forms
//   P12 = sin^3(s1) sin^3(s2) lambda_12,  P23 = sin^3(s2) sin^3(s3) lambda_23,
// which stay bounded near the boundary of U and share the same interior
// zero set.

namespace sphere_re {

struct LambdaTriple {
  double lambda1 = 0, lambda2 = 0, lambda3 = 0;
  double l12() const { return lambda1 - lambda2; }
  double l23() const { return lambda2 - lambda3; }
  double l31() const { return lambda3 - lambda1; }
  double lambda(int k) const {
    return k == 0 ? lambda1 : (k == 1 ? lambda2 : lambda3);
  }
  double mean() const { return (lambda1 + lambda2 + lambda3) / 3.0; }
};

namespace detail {

// Numerators N_k = sin^3(s_k) * lambda_k and their gradients.
inline Vec3 lambda_numerators(const Shape& s, const MassTriple& m) {
  const double s1 = std::sin(s.sigma1), s2 = std::sin(s.sigma2),
               s3 = std::sin(s.sigma3);
  const double c1 = std::cos(s.sigma1), c2 = std::cos(s.sigma2),
               c3 = std::cos(s.sigma3);
  return {(m.m2 + m.m3) * s1 * s1 * s1 - m.m2 * c3 * s2 * s2 * s2 -
              m.m3 * c2 * s3 * s3 * s3,
          (m.m3 + m.m1) * s2 * s2 * s2 - m.m3 * c1 * s3 * s3 * s3 -
              m.m1 * c3 * s1 * s1 * s1,
          (m.m1 + m.m2) * s3 * s3 * s3 - m.m1 * c2 * s1 * s1 * s1 -
              m.m2 * c1 * s2 * s2 * s2};
}

inline std::array<Vec3, 3> lambda_numerator_grads(const Shape& s,
                                                  const MassTriple& m) {
  const double s1 = std::sin(s.sigma1), s2 = std::sin(s.sigma2),
               s3 = std::sin(s.sigma3);
  const double c1 = std::cos(s.sigma1), c2 = std::cos(s.sigma2),
               c3 = std::cos(s.sigma3);
  std::array<Vec3, 3> g;
  g[0] = {3 * (m.m2 + m.m3) * s1 * s1 * c1,
          -3 * m.m2 * c3 * s2 * s2 * c2 + m.m3 * s2 * s3 * s3 * s3,
          m.m2 * s3 * s2 * s2 * s2 - 3 * m.m3 * c2 * s3 * s3 * c3};
  g[1] = {m.m3 * s1 * s3 * s3 * s3 - 3 * m.m1 * c3 * s1 * s1 * c1,
          3 * (m.m3 + m.m1) * s2 * s2 * c2,
          -3 * m.m3 * c1 * s3 * s3 * c3 + m.m1 * s3 * s1 * s1 * s1};
  g[2] = {-3 * m.m1 * c2 * s1 * s1 * c1 + m.m2 * s1 * s2 * s2 * s2,
          m.m1 * s2 * s1 * s1 * s1 - 3 * m.m2 * c1 * s2 * s2 * c2,
          3 * (m.m1 + m.m2) * s3 * s3 * c3};
  return g;
}

}  // namespace detail

/// The three lambda values of the LRE eigenvalue condition.
inline LambdaTriple lambda_triple(const Shape& s, const MassTriple& m) {
  require_in_u(s);
  const Vec3 n = detail::lambda_numerators(s, m);
  const double d1 = std::pow(std::sin(s.sigma1), 3),
               d2 = std::pow(std::sin(s.sigma2), 3),
               d3 = std::pow(std::sin(s.sigma3), 3);
  return {n[0] / d1, n[1] / d2, n[2] / d3};
}

/// (lambda_12, lambda_23); both vanish at an LRE shape.
inline Vec2 lre_residual(const Shape& s, const MassTriple& m) {
  LambdaTriple l = lambda_triple(s, m);
  return {l.l12(), l.l23()};
}

/// Denominator-cleared residuals (P12, P23); bounded on all of U.
inline Vec2 lre_residual_cleared(const Shape& s, const MassTriple& m) {
  const Vec3 n = detail::lambda_numerators(s, m);
  const double d1 = std::pow(std::sin(s.sigma1), 3),
               d2 = std::pow(std::sin(s.sigma2), 3),
               d3 = std::pow(std::sin(s.sigma3), 3);
  return {n[0] * d2 - n[1] * d1, n[1] * d3 - n[2] * d2};
}

/// Rows: analytic gradients of lambda_12 and lambda_23 w.r.t. sigma.
inline std::array<Vec3, 2> residual_jacobian(const Shape& s,
                                             const MassTriple& m) {
  require_in_u(s);
  const Vec3 n = detail::lambda_numerators(s, m);
  const auto gn = detail::lambda_numerator_grads(s, m);
  Vec3 sn = {std::sin(s.sigma1), std::sin(s.sigma2), std::sin(s.sigma3)};
  Vec3 cs = {std::cos(s.sigma1), std::cos(s.sigma2), std::cos(s.sigma3)};
  std::array<Vec3, 3> gl;  // gradients of lambda_k
  for (int k = 0; k < 3; ++k) {
    double d = sn[k] * sn[k] * sn[k];
    gl[k] = (1.0 / d) * gn[k];
    gl[k][k] -= 3 * cs[k] * n[k] / (d * sn[k]);
  }
  return {gl[0] - gl[1], gl[1] - gl[2]};
}

/// Gradients of the cleared residuals (P12, P23).
inline std::array<Vec3, 2> cleared_jacobian(const Shape& s,
                                            const MassTriple& m) {
  const Vec3 n = detail::lambda_numerators(s, m);
  const auto gn = detail::lambda_numerator_grads(s, m);
  Vec3 sn = {std::sin(s.sigma1), std::sin(s.sigma2), std::sin(s.sigma3)};
  Vec3 cs = {std::cos(s.sigma1), std::cos(s.sigma2), std::cos(s.sigma3)};
  Vec3 d = {sn[0] * sn[0] * sn[0], sn[1] * sn[1] * sn[1], sn[2] * sn[2] * sn[2]};
  Vec3 g0 = d[1] * gn[0] - d[0] * gn[1];
  g0[1] += 3 * sn[1] * sn[1] * cs[1] * n[0];
  g0[0] -= 3 * sn[0] * sn[0] * cs[0] * n[1];
  Vec3 g1 = d[2] * gn[1] - d[1] * gn[2];
  g1[2] += 3 * sn[2] * sn[2] * cs[2] * n[1];
  g1[1] -= 3 * sn[1] * sn[1] * cs[1] * n[2];
  return {g0, g1};
}

// ---------------------------------------------------------------------------
// Factorised antisymmetric part for an equal-mass pair.

/// tilde_lambda for the pair (i,j) with m_i = m_j:
///   lambda_ij = sin(s_i - s_j) / (sin^3 s_i sin^3 s_j) * tilde_lambda_ij.
/// Normalised so the identity holds for absolute masses (carries a factor
/// m_k relative to the ratio form).
inline double tilde_lambda(const Shape& s, int i, int j, const MassTriple& m) {
  if (!m.pair_equal(i, j, 1e-9))
    throw PreconditionError("tilde_lambda requires m_i = m_j");
  require_in_u(s);
  const int k = 3 - i - j;
  const double si = s.sigma(i), sj = s.sigma(j), sk = s.sigma(k);
  const double nu = m.mass(i) / m.mass(k);
  const double ssi = std::sin(si), ssj = std::sin(sj);
  const double q = ssi * ssi * ssi * ssi + ssi * ssi * ssj * ssj +
                   ssj * ssj * ssj * ssj;
  const double c = std::cos(3 * si + sj) + std::cos(si + 3 * sj) -
                   2 * std::cos(si + sj);
  const double s3k = std::pow(std::sin(sk), 3);
  return m.mass(k) *
         (nu * std::cos(sk) * std::sin(si + sj) * q - 0.25 * s3k * c);
}

/// Gradient of tilde_lambda w.r.t. (sigma1, sigma2, sigma3).
inline Vec3 tilde_lambda_gradient(const Shape& s, int i, int j,
                                  const MassTriple& m) {
  if (!m.pair_equal(i, j, 1e-9))
    throw PreconditionError("tilde_lambda requires m_i = m_j");
  const int k = 3 - i - j;
  const double si = s.sigma(i), sj = s.sigma(j), sk = s.sigma(k);
  const double nu = m.mass(i) / m.mass(k), mk = m.mass(k);
  const double ssi = std::sin(si), ssj = std::sin(sj), ssk = std::sin(sk);
  const double csk = std::cos(sk);
  const double q = ssi * ssi * ssi * ssi + ssi * ssi * ssj * ssj +
                   ssj * ssj * ssj * ssj;
  const double qi = std::sin(2 * si) * (2 * ssi * ssi + ssj * ssj);
  const double qj = std::sin(2 * sj) * (2 * ssj * ssj + ssi * ssi);
  const double c = std::cos(3 * si + sj) + std::cos(si + 3 * sj) -
                   2 * std::cos(si + sj);
  const double ci = -3 * std::sin(3 * si + sj) - std::sin(si + 3 * sj) +
                    2 * std::sin(si + sj);
  const double cj = -std::sin(3 * si + sj) - 3 * std::sin(si + 3 * sj) +
                    2 * std::sin(si + sj);
  const double s3k = ssk * ssk * ssk;
  Vec3 g{};
  g[i] = mk * (nu * csk * (std::cos(si + sj) * q + std::sin(si + sj) * qi) -
               0.25 * s3k * ci);
  g[j] = mk * (nu * csk * (std::cos(si + sj) * q + std::sin(si + sj) * qj) -
               0.25 * s3k * cj);
  g[k] = mk * (-nu * ssk * std::sin(si + sj) * q -
               0.75 * ssk * ssk * csk * c);
  return g;
}

// ---------------------------------------------------------------------------
// Euler conditions.

/// Collinearity residual d for an ERE on a rotating meridian, formulated on
/// the plane sigma_k = sigma_i + sigma_j (mass m_k between the other two).
/// The canonical labelling is k = 2 (sigma3 = sigma1 + sigma2); other planes
/// are handled by relabelling.
inline double ere_meridian_d(const Shape& s, const MassTriple& m,
                             int middle = 2, double tol = kTolPlane) {
  const int i = (middle + 1) % 3, j = (middle + 2) % 3;
  if (std::fabs(s.sigma(middle) - s.sigma(i) - s.sigma(j)) > tol)
    throw DomainError("shape not on the collinear plane");
  require_in_u(s);
  const double si = s.sigma(i), sj = s.sigma(j), sk = s.sigma(middle);
  const double mi = m.mass(i), mj = m.mass(j), mk = m.mass(middle);
  const double s2i = std::sin(si) * std::sin(si),
               s2j = std::sin(sj) * std::sin(sj),
               s2k = std::sin(sk) * std::sin(sk);
  return (mi * std::sin(2 * sj) - mj * std::sin(2 * si)) / s2k +
         (mj * std::sin(2 * sk) + mk * std::sin(2 * sj)) / s2i -
         (mk * std::sin(2 * si) + mi * std::sin(2 * sk)) / s2j;
}

// d with the plane constraint substituted, as a function of the two outer
// angles; used by the in-plane ERE tracer. Cleared of denominators.
inline double ere_d_cleared(double si, double sj, const MassTriple& m,
                            int middle) {
  const int i = (middle + 1) % 3, j = (middle + 2) % 3;
  const double sk = si + sj;
  const double mi = m.mass(i), mj = m.mass(j), mk = m.mass(middle);
  const double s2i = std::sin(si) * std::sin(si),
               s2j = std::sin(sj) * std::sin(sj),
               s2k = std::sin(sk) * std::sin(sk);
  return (mi * std::sin(2 * sj) - mj * std::sin(2 * si)) * s2i * s2j +
         (mj * std::sin(2 * sk) + mk * std::sin(2 * sj)) * s2j * s2k -
         (mk * std::sin(2 * si) + mi * std::sin(2 * sk)) * s2i * s2k;
}

inline Vec2 ere_d_cleared_gradient(double si, double sj, const MassTriple& m,
                                   int middle) {
  const double e = 1e-7;  // FD is adequate here: used only for tangents
  return {(ere_d_cleared(si + e, sj, m, middle) -
           ere_d_cleared(si - e, sj, m, middle)) /
              (2 * e),
          (ere_d_cleared(si, sj + e, m, middle) -
           ere_d_cleared(si, sj - e, m, middle)) /
              (2 * e)};
}

/// Shape of the ERE on the equator, if the mu-triangle condition
/// mu_k < mu_i + mu_j holds for mu_k = sqrt(m_i m_j); the returned angles
/// satisfy sum = 2 pi. nullopt when no equator ERE exists.
inline std::optional<Shape> ere_equator(const MassTriple& m) {
  Vec3 mu = {std::sqrt(m.m2 * m.m3), std::sqrt(m.m3 * m.m1),
             std::sqrt(m.m1 * m.m2)};
  for (int k = 0; k < 3; ++k)
    if (mu[k] >= mu[(k + 1) % 3] + mu[(k + 2) % 3]) return std::nullopt;
  Vec3 sig{};
  for (int k = 0; k < 3; ++k) {
    int i = (k + 1) % 3, j = (k + 2) % 3;
    sig[k] = std::acos((mu[k] * mu[k] - mu[i] * mu[i] - mu[j] * mu[j]) /
                       (2 * mu[i] * mu[j]));
  }
  return Shape(sig);
}

// ---------------------------------------------------------------------------
// Inertia tensor.

struct InertiaTensor {
  std::array<Vec3, 3> m{};  // symmetric 3x3
  const Vec3& row(int r) const { return m[r]; }
};

/// J per the reduced eigenvalue problem: diagonal m_i + m_j, off-diagonal
/// -sqrt(m_i m_j) cos(sigma_k).
inline InertiaTensor inertia_tensor(const Shape& s, const MassTriple& m) {
  require_in_u(s);
  InertiaTensor j;
  const Vec3 mm = {m.m1, m.m2, m.m3};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      if (a == b) {
        j.m[a][b] = mm[(a + 1) % 3] + mm[(a + 2) % 3];
      } else {
        int k = 3 - a - b;
        j.m[a][b] = -std::sqrt(mm[a] * mm[b]) * std::cos(s.sigma(k));
      }
    }
  return j;
}

}  // namespace sphere_re

#endif  // SPHERE_RE_SHAPE_CORE_HPP
