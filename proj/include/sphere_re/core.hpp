#ifndef SPHERE_RE_CORE_HPP
#define SPHERE_RE_CORE_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

// Shared value types for relative-equilibrium computations on the unit
// sphere: arc-angle shapes, mass triples, small fixed-size linear algebra,
// and the tolerance conventions used across the library.

namespace sphere_re {

inline constexpr double kPi = 3.14159265358979323846;

// Default tolerances. Plane/boundary membership is far looser than the
// Newton target because event localisation happens in well-conditioned
// coordinates, while residuals are driven to near machine precision.
inline constexpr double kTolPlane = 1e-9;
inline constexpr double kTolNewton = 1e-12;
inline constexpr double kMinSin = 1e-8;  // singularity guard on sin(sigma)

struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& w) : std::runtime_error(w) {}
};
struct PreconditionError : std::runtime_error {
  explicit PreconditionError(const std::string& w) : std::runtime_error(w) {}
};
struct IndeterminateError : std::runtime_error {
  explicit IndeterminateError(const std::string& w) : std::runtime_error(w) {}
};
struct DenominatorZero : std::runtime_error {
  explicit DenominatorZero(const std::string& w) : std::runtime_error(w) {}
};
struct NotAnLRE : std::runtime_error {
  explicit NotAnLRE(const std::string& w) : std::runtime_error(w) {}
};
struct EmbeddingImpossible : std::runtime_error {
  explicit EmbeddingImpossible(const std::string& w) : std::runtime_error(w) {}
};
struct CollisionProximity : std::runtime_error {
  explicit CollisionProximity(const std::string& w) : std::runtime_error(w) {}
};
struct CertificateFailure : std::runtime_error {
  explicit CertificateFailure(const std::string& w) : std::runtime_error(w) {}
};
struct NewtonDivergence : std::runtime_error {
  explicit NewtonDivergence(const std::string& w) : std::runtime_error(w) {}
};
struct SeedInvalid : std::runtime_error {
  explicit SeedInvalid(const std::string& w) : std::runtime_error(w) {}
};
struct OffCurveError : std::runtime_error {
  explicit OffCurveError(const std::string& w) : std::runtime_error(w) {}
};

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec3 operator-(const Vec3& a, const Vec3& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec3 operator*(double c, const Vec3& a) {
  return {c * a[0], c * a[1], c * a[2]};
}
inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1],
          a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline double norm_inf(const Vec3& a) {
  return std::max({std::fabs(a[0]), std::fabs(a[1]), std::fabs(a[2])});
}
inline Vec3 normalized(const Vec3& a) {
  double n = norm(a);
  return {a[0] / n, a[1] / n, a[2] / n};
}

// Solve a 3x3 linear system by partial-pivot elimination. Throws on a
// numerically singular matrix.
inline Vec3 solve3(std::array<Vec3, 3> A, Vec3 b) {
  for (int c = 0; c < 3; ++c) {
    int p = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::fabs(A[r][c]) > std::fabs(A[p][c])) p = r;
    if (std::fabs(A[p][c]) < 1e-300) throw DomainError("singular 3x3 system");
    std::swap(A[p], A[c]);
    std::swap(b[p], b[c]);
    for (int r = c + 1; r < 3; ++r) {
      double f = A[r][c] / A[c][c];
      for (int k = c; k < 3; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  Vec3 x{};
  for (int r = 2; r >= 0; --r) {
    double s = b[r];
    for (int k = r + 1; k < 3; ++k) s -= A[r][k] * x[k];
    x[r] = s / A[r][r];
  }
  return x;
}

inline Vec2 solve2(double a, double b, double c, double d, double r1, double r2) {
  double det = a * d - b * c;
  if (std::fabs(det) < 1e-300) throw DomainError("singular 2x2 system");
  return {(d * r1 - b * r2) / det, (a * r2 - c * r1) / det};
}

/// Arc-angle shape of a spherical triangle: sigma_k is the minor-arc angle
/// between the two bodies other than k (unit sphere, R = 1).
struct Shape {
  double sigma1 = 0, sigma2 = 0, sigma3 = 0;

  Shape() = default;
  Shape(double s1, double s2, double s3) : sigma1(s1), sigma2(s2), sigma3(s3) {}
  explicit Shape(const Vec3& v) : sigma1(v[0]), sigma2(v[1]), sigma3(v[2]) {}

  double sigma(int k) const {  // k in {0,1,2}
    return k == 0 ? sigma1 : (k == 1 ? sigma2 : sigma3);
  }
  Vec3 vec() const { return {sigma1, sigma2, sigma3}; }
  double min_sin() const {
    return std::min({std::sin(sigma1), std::sin(sigma2), std::sin(sigma3)});
  }
  bool in_u() const {
    return sigma1 > 0 && sigma1 < kPi && sigma2 > 0 && sigma2 < kPi &&
           sigma3 > 0 && sigma3 < kPi;
  }
};

/// Positive masses. Ratios follow the m3-normalised convention
/// nu1 = m1/m3, nu2 = m2/m3; (nu, dnu) is the mean/half-difference
/// parametrisation of (nu1, nu2).
struct MassTriple {
  double m1 = 1, m2 = 1, m3 = 1;

  MassTriple() = default;
  MassTriple(double a, double b, double c) : m1(a), m2(b), m3(c) {
    if (!(m1 > 0 && m2 > 0 && m3 > 0))
      throw DomainError("masses must be positive");
  }
  static MassTriple from_nu_dnu(double nu, double dnu) {
    return MassTriple(nu - dnu, nu + dnu, 1.0);
  }

  double mass(int k) const { return k == 0 ? m1 : (k == 1 ? m2 : m3); }
  double total() const { return m1 + m2 + m3; }
  double nu1() const { return m1 / m3; }
  double nu2() const { return m2 / m3; }
  double nu() const { return 0.5 * (nu1() + nu2()); }
  double dnu() const { return 0.5 * (nu2() - nu1()); }

  bool pair_equal(int i, int j, double rtol = 1e-12) const {
    double a = mass(i), b = mass(j);
    return std::fabs(a - b) <= rtol * std::max(a, b);
  }
  bool all_equal(double rtol = 1e-12) const {
    return pair_equal(0, 1, rtol) && pair_equal(1, 2, rtol);
  }
  // Index pair (i,j) with m_i == m_j, or -1 if all masses are distinct.
  // With all three equal, returns (0,1).
  int equal_pair_index(double rtol = 1e-12) const {
    if (pair_equal(0, 1, rtol)) return 0;  // pair (1,2) of the paper -> k=3
    if (pair_equal(1, 2, rtol)) return 1;
    if (pair_equal(0, 2, rtol)) return 2;
    return -1;
  }
};

enum class Region {
  Outside,          // not in the open cube U
  InU,              // in U but violating a triangle condition
  InUPhys,          // strict interior of U_phys
  OnMeridianPlane,  // |sigma_k - sigma_i - sigma_j| <= tol
  OnEquatorPlane,   // |sum - 2 pi| <= tol
};

struct RegionInfo {
  Region region = Region::Outside;
  int plane_index = -1;  // which k for OnMeridianPlane (0-based)
};

/// Classify a shape against U and U_phys. Plane membership wins over the
/// interior labels; both boundary labels imply U_phys membership.
inline RegionInfo region_membership(const Shape& s, double tol = kTolPlane) {
  if (!s.in_u()) return {Region::Outside, -1};
  const Vec3 v = s.vec();
  double sum = v[0] + v[1] + v[2];
  for (int k = 0; k < 3; ++k) {
    double excess = v[k] - v[(k + 1) % 3] - v[(k + 2) % 3];
    if (std::fabs(excess) <= tol && sum <= 2 * kPi + tol)
      return {Region::OnMeridianPlane, k};
    if (excess > tol) return {Region::InU, -1};
  }
  if (std::fabs(sum - 2 * kPi) <= tol) return {Region::OnEquatorPlane, -1};
  if (sum > 2 * kPi + tol) return {Region::InU, -1};
  return {Region::InUPhys, -1};
}

inline bool in_u_phys(const Shape& s, double tol = kTolPlane) {
  Region r = region_membership(s, tol).region;
  return r == Region::InUPhys || r == Region::OnMeridianPlane ||
         r == Region::OnEquatorPlane;
}

// Apply a permutation p of body labels: result k gets the old p[k].
inline Shape permuted(const Shape& s, const std::array<int, 3>& p) {
  return Shape(s.sigma(p[0]), s.sigma(p[1]), s.sigma(p[2]));
}
inline MassTriple permuted(const MassTriple& m, const std::array<int, 3>& p) {
  return MassTriple(m.mass(p[0]), m.mass(p[1]), m.mass(p[2]));
}

inline void require_in_u(const Shape& s) {
  if (!s.in_u()) throw DomainError("shape outside U");
  if (s.min_sin() < kMinSin)
    throw DomainError("sin(sigma) below singularity guard");
}

}  // namespace sphere_re

#endif  // SPHERE_RE_CORE_HPP
