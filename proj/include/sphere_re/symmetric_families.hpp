#ifndef SPHERE_RE_SYMMETRIC_FAMILIES_HPP
#define SPHERE_RE_SYMMETRIC_FAMILIES_HPP

#include <optional>
#include <random>
#include <vector>

#include "sphere_re/roots.hpp"
#include "sphere_re/shape_core.hpp"

// Closed-form machinery for equal and partial equal masses: the isosceles
// scalar condition, its bifurcation constants, the mass-ratio map
// nu(sigma, sigma3), the isosceles/scalene bifurcation set j = 0, and the
// numerical certificate behind the equal-mass no-scalene theorem.

namespace sphere_re {

/// Point on the isosceles slice sigma1 = sigma2 = sigma.
struct IsoscelesPoint {
  double sigma = 0, sigma3 = 0;

  IsoscelesPoint() = default;
  IsoscelesPoint(double s, double s3) : sigma(s), sigma3(s3) {}
  Shape shape() const { return Shape(sigma, sigma, sigma3); }
  bool in_u() const {
    return sigma > 0 && sigma < kPi && sigma3 > 0 && sigma3 < kPi;
  }
  bool in_u_phys() const {
    return in_u() && sigma3 <= 2 * sigma && sigma3 <= 2 * (kPi - sigma);
  }
};

namespace equal_mass {

// Equal-mass antisymmetrised pair function: g(x, y, z) is the factorised
// lambda-difference for the pair with angles (x, y) and opposite angle z
// (unit masses). Symmetric in its first two arguments.
inline double g0(double x, double y, double z) {
  double sx = std::sin(x), sy = std::sin(y);
  double q = sx * sx * sx * sx + sx * sx * sy * sy + sy * sy * sy * sy;
  double c = std::cos(3 * x + y) + std::cos(x + 3 * y) - 2 * std::cos(x + y);
  return std::cos(z) * std::sin(x + y) * q -
         0.25 * std::pow(std::sin(z), 3) * c;
}

// Quotients of the antisymmetrised differences of g0, derived by exact
// trigonometric-polynomial division:
//   g0(x,y,z) - g0(x,z,y)   =  2 sin(y-z)        g1(x,y,z)
//   g1(x,y,z) - g1(y,x,z)   = -2 (cos x - cos y) g2(x,y,z)
//   g2(x,y,z) - g2(x,z,y)   = 16 (cos y - cos z) g3(x,y,z)
// Each is a short cosine series; coefficients are exact multiples of 1/32.
struct TrigTerm {
  int a, b, c;   // frequency of x, y, z
  double coeff;  // doubled coefficient of the +/- conjugate pair
};

inline double eval_series(const TrigTerm* t, int n, double x, double y,
                          double z) {
  double r = 0;
  for (int i = 0; i < n; ++i)
    r += t[i].coeff * std::cos(t[i].a * x + t[i].b * y + t[i].c * z);
  return r;
}

inline double g1(double x, double y, double z) {
  static const TrigTerm T[] = {
      {-5, 0, 0, 1.0 / 32},   {-3, -2, 0, 1.0 / 32},  {-3, 0, -2, 1.0 / 32},
      {-3, 0, 0, -3.0 / 32},  {-3, 0, 2, -1.0 / 32},  {-3, 2, 0, -1.0 / 32},
      {-1, -4, -2, 1.0 / 32}, {-1, -4, 0, 1.0 / 32},  {-1, -2, -4, 1.0 / 32},
      {-1, -2, -2, -3.0 / 16}, {-1, -2, 0, -3.0 / 32}, {-1, -2, 2, -1.0 / 32},
      {-1, 0, -4, 1.0 / 32},  {-1, 0, -2, -3.0 / 32}, {-1, 0, 0, 1.0 / 4},
      {-1, 0, 2, 1.0 / 16},   {-1, 2, -2, -1.0 / 32}, {-1, 2, 0, 1.0 / 16}};
  return eval_series(T, 18, x, y, z);
}

inline double g2(double x, double y, double z) {
  static const TrigTerm T[] = {
      {-4, 0, 0, -1.0 / 32},  {-3, -1, -2, 1.0 / 32}, {-3, 1, 0, -1.0 / 32},
      {-2, -2, -2, 1.0 / 32}, {-2, -2, 0, -1.0 / 32}, {-2, 0, 0, 3.0 / 32},
      {-2, 0, 2, 1.0 / 32},   {-1, -3, -2, 1.0 / 32}, {-1, -1, -4, 1.0 / 32},
      {-1, -1, -2, -3.0 / 16}, {-1, -1, 0, -1.0 / 32}, {-1, 1, 0, 3.0 / 16},
      {-1, 3, 0, -1.0 / 32},  {0, -4, 0, -1.0 / 32},  {0, -2, 0, 3.0 / 32},
      {0, -2, 2, 1.0 / 32},   {0, 0, -2, -3.0 / 32}};
  return eval_series(T, 17, x, y, z) - 3.0 / 32;
}

// Totally symmetric end of the chain (closed form).
inline double g3(double x, double y, double z) {
  return (3 - std::cos(2 * x) - std::cos(2 * y) - std::cos(2 * z)) *
         std::cos((x + y) / 2) * std::cos((y + z) / 2) *
         std::cos((z + x) / 2) / 16.0;
}

}  // namespace equal_mass

/// Isosceles condition for equal masses: zeros of g(sigma, sigma3) are the
/// equal-mass isosceles LRE on the slice sigma1 = sigma2.
inline double g_isosceles(const IsoscelesPoint& p) {
  return equal_mass::g0(p.sigma3, p.sigma, p.sigma);
}

struct EqualMassConstants {
  double sigma_c = 0;  // equilateral/isosceles bifurcation
  double sigma_e = 0;  // isosceles/meridian-ERE coupling
};

/// sigma_c as the root of 4 + 5 cos 2s and sigma_e as the root of
/// 2 + 4 cos 2s + cos 4s (equivalently 8 cos^4 s = 1), each located by
/// bracketed bisection and cross-checked against the closed forms.
inline EqualMassConstants equal_mass_constants() {
  EqualMassConstants c;
  c.sigma_c = bisect([](double s) { return 4 + 5 * std::cos(2 * s); }, 1.0,
                     1.5, 1e-15);
  c.sigma_e = bisect(
      [](double s) { return 2 + 4 * std::cos(2 * s) + std::cos(4 * s); }, 0.5,
      1.2, 1e-15);
  double cc = 0.5 * std::acos(-4.0 / 5.0);
  double ce = std::acos(std::pow(2.0, -0.75));
  if (std::fabs(c.sigma_c - cc) > 1e-12 || std::fabs(c.sigma_e - ce) > 1e-12)
    throw CertificateFailure("bisected constants disagree with closed forms");
  return c;
}

struct ScaleneCertificate {
  double max_chain_residual = 0;     // worst of the three chain identities
  double max_symmetry_residual = 0;  // g3 under all 6 permutations
  double min_restricted_abs = 0;     // min |g| on the x+y=pi slice samples
  double max_restricted_residual = 0;  // identity vs (cos 2x - 1) sin^3 z / 2
  int samples = 0;
};

/// Numerical certificate of the equal-mass no-scalene theorem: checks the
/// division chain, the total symmetry of its end, and the non-vanishing of
/// g on the x + y = pi slice, at `samples` random points.
inline ScaleneCertificate scalene_certificate(int samples = 1000,
                                              unsigned seed = 20240817,
                                              double tol = 1e-9) {
  using namespace equal_mass;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ang(0.1, kPi - 0.1);
  ScaleneCertificate rep;
  rep.samples = samples;
  rep.min_restricted_abs = 1e300;
  static const std::array<std::array<int, 3>, 6> perms = {
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  for (int it = 0; it < samples; ++it) {
    double x = ang(rng), y = ang(rng), z = ang(rng);
    double r1 = g0(x, y, z) - g0(x, z, y) - 2 * std::sin(y - z) * g1(x, y, z);
    double r2 = g1(x, y, z) - g1(y, x, z) +
                2 * (std::cos(x) - std::cos(y)) * g2(x, y, z);
    double r3 = g2(x, y, z) - g2(x, z, y) -
                16 * (std::cos(y) - std::cos(z)) * g3(x, y, z);
    rep.max_chain_residual = std::max(
        {rep.max_chain_residual, std::fabs(r1), std::fabs(r2), std::fabs(r3)});
    const Vec3 v = {x, y, z};
    double ref = g3(x, y, z);
    for (const auto& p : perms)
      rep.max_symmetry_residual =
          std::max(rep.max_symmetry_residual,
                   std::fabs(g3(v[p[0]], v[p[1]], v[p[2]]) - ref));
    // slice x + y = pi, sampled away from the cos(2x) = 1 zeros
    double xs = 0.3 + (kPi / 2 - 0.5) * (it % 97) / 96.0;
    double zs = 0.3 + (kPi - 0.6) * (it % 89) / 88.0;
    double gv = g0(xs, kPi - xs, zs);
    double closed = 0.5 * (std::cos(2 * xs) - 1) * std::pow(std::sin(zs), 3);
    rep.max_restricted_residual =
        std::max(rep.max_restricted_residual, std::fabs(gv - closed));
    rep.min_restricted_abs = std::min(rep.min_restricted_abs, std::fabs(gv));
  }
  if (rep.max_chain_residual > tol || rep.max_symmetry_residual > tol ||
      rep.max_restricted_residual > tol || rep.min_restricted_abs <= 0)
    throw CertificateFailure("no-scalene chain identities violated");
  return rep;
}

// ---------------------------------------------------------------------------
// Partial equal masses (m1 = m2 = nu * m3).

/// alpha(sigma, sigma3) and beta(sigma, sigma3): numerator pieces of the
/// isosceles condition lambda_23 = -nu alpha / sin^3 s3 + beta / sin^3 s.
inline Vec2 alpha_beta(const IsoscelesPoint& p) {
  double s3 = std::pow(std::sin(p.sigma3), 3), s = std::pow(std::sin(p.sigma), 3);
  return {(1 + std::cos(p.sigma3)) * s3 - 2 * std::cos(p.sigma) * s,
          s - std::cos(p.sigma) * s3};
}

/// Unique mass ratio nu = m1/m3 = m2/m3 making p an isosceles LRE, when one
/// exists (alpha beta > 0). nullopt when no positive ratio works. Throws
/// IndeterminateError at the alpha = beta = 0 point, where every nu works.
inline std::optional<double> nu_for_isosceles(const IsoscelesPoint& p,
                                              double tol = 1e-11) {
  Vec2 ab = alpha_beta(p);
  if (std::fabs(ab[0]) < tol && std::fabs(ab[1]) < tol)
    throw IndeterminateError("alpha = beta = 0: isosceles ERE for every nu");
  if (ab[0] * ab[1] <= 0) return std::nullopt;
  return std::pow(std::sin(p.sigma3), 3) * ab[1] /
         (std::pow(std::sin(p.sigma), 3) * ab[0]);
}

/// Residual whose zeros are candidate isosceles/scalene bifurcation points.
inline double j_residual(const IsoscelesPoint& p) {
  double s33 = std::pow(std::sin(p.sigma3), 3);
  double den = 1 + std::cos(p.sigma3) -
               2 * std::cos(p.sigma) * std::pow(std::sin(p.sigma), 3) / s33;
  if (std::fabs(den) < 1e-12)
    throw DenominatorZero("j denominator ~ 0 (alpha = 0 locus)");
  return (1 + 2 * std::cos(2 * p.sigma)) * s33 +
         6 * std::cos(p.sigma) * std::cos(p.sigma3) *
             (std::pow(std::sin(p.sigma), 3) -
              std::cos(p.sigma) * s33) /
             den;
}

struct RestrictedLimitBounds {
  double sigma_s = 0;  // local maximum of the nu -> infinity curve
  double sigma_l = 0;  // local minimum
};

/// Roots of (1 + cos s3) sin^3 s3 = (sqrt(3)/2)^3, bounding the sigma3 gap
/// of the restricted-problem isosceles family.
inline RestrictedLimitBounds restricted_limit_bounds() {
  const double rhs = std::pow(std::sqrt(3.0) / 2.0, 3);
  auto f = [rhs](double s3) {
    return (1 + std::cos(s3)) * std::pow(std::sin(s3), 3) - rhs;
  };
  auto roots = bracket_roots(f, 1e-6, kPi - 1e-6, 4096, 1e-14);
  if (roots.size() != 2)
    throw CertificateFailure("expected exactly two restricted-limit roots");
  return {roots[0], roots[1]};
}

// Cleared isosceles residual beta sin^3 s3 - nu alpha sin^3 s (proportional
// to lambda_23 on the slice) and its in-plane gradient; used by the 2-D
// continuation of isosceles families.
inline double iso_residual_cleared(double sigma, double sigma3, double nu) {
  double ss = std::sin(sigma), s3 = std::sin(sigma3);
  double cs = std::cos(sigma), c3 = std::cos(sigma3);
  double al = (1 + c3) * s3 * s3 * s3 - 2 * cs * ss * ss * ss;
  double be = ss * ss * ss - cs * s3 * s3 * s3;
  return be * s3 * s3 * s3 - nu * al * ss * ss * ss;
}

inline Vec2 iso_residual_cleared_gradient(double sigma, double sigma3,
                                          double nu) {
  double ss = std::sin(sigma), s3 = std::sin(sigma3);
  double cs = std::cos(sigma), c3 = std::cos(sigma3);
  double al = (1 + c3) * s3 * s3 * s3 - 2 * cs * ss * ss * ss;
  double be = ss * ss * ss - cs * s3 * s3 * s3;
  double dal_ds = 2 * ss * ss * ss * ss - 6 * cs * cs * ss * ss;
  double dal_d3 = -s3 * s3 * s3 * s3 + 3 * (1 + c3) * s3 * s3 * c3;
  double dbe_ds = 3 * ss * ss * cs + ss * s3 * s3 * s3;
  double dbe_d3 = -3 * cs * s3 * s3 * c3;
  return {dbe_ds * s3 * s3 * s3 - nu * (dal_ds * ss * ss * ss +
                                        3 * al * ss * ss * cs),
          dbe_d3 * s3 * s3 * s3 + 3 * be * s3 * s3 * c3 -
              nu * dal_d3 * ss * ss * ss};
}

struct TriplePoint {
  IsoscelesPoint point;
  double nu0 = 0;
};

/// The tangency point where the scalene loop collapses: solves
/// tilde_lambda_12 = lambda_23 = 0 together with parallel gradients in
/// (sigma, sigma3, nu). Newton with finite-difference Jacobian from a
/// caller-supplied start.
inline TriplePoint solve_loop_collapse(double sigma0 = 0.32 * kPi,
                                       double sigma30 = 0.54 * kPi,
                                       double nu_start = 0.6) {
  auto F = [](const Vec3& v) -> Vec3 {
    Shape s(v[0], v[0], v[1]);
    MassTriple m(v[2], v[2], 1.0);
    double t = tilde_lambda(s, 0, 1, m);
    double l23 = lre_residual(s, m)[1];
    Vec3 gt = tilde_lambda_gradient(s, 0, 1, m);
    Vec3 gl = residual_jacobian(s, m)[1];
    // at a symmetric point both gradients have equal first two components
    // once tilde vanishes; tangency reduces to one cross condition
    return {t, l23, gt[0] * gl[2] - gt[2] * gl[0]};
  };
  Vec3 v = {sigma0, sigma30, nu_start};
  for (int it = 0; it < 60; ++it) {
    Vec3 f = F(v);
    if (norm_inf(f) < 1e-13) break;
    std::array<Vec3, 3> J;
    for (int c = 0; c < 3; ++c) {
      Vec3 vp = v, vm = v;
      double h = 1e-7;
      vp[c] += h;
      vm[c] -= h;
      Vec3 fp = F(vp), fm = F(vm);
      for (int r = 0; r < 3; ++r) J[r][c] = (fp[r] - fm[r]) / (2 * h);
    }
    Vec3 dv = solve3(J, {-f[0], -f[1], -f[2]});
    double cap = 0.2;
    double n = norm_inf(dv);
    if (n > cap) dv = (cap / n) * dv;
    v = v + dv;
  }
  if (norm_inf(F(v)) > 1e-10)
    throw NewtonDivergence("loop-collapse solve did not converge");
  return {IsoscelesPoint(v[0], v[1]), v[2]};
}

}  // namespace sphere_re

#endif  // SPHERE_RE_SYMMETRIC_FAMILIES_HPP
