#ifndef SPHERE_RE_INVERSE_MASS_HPP
#define SPHERE_RE_INVERSE_MASS_HPP

#include <optional>
#include <vector>

#include "sphere_re/roots.hpp"
#include "sphere_re/shape_core.hpp"

// Inverse problem for general masses: which ratios (nu1, nu2) = (m1/m3,
// m2/m3) make a given shape an LRE, the rank-drop curve h = 0 on the
// collinear planes, and the count/location of LRE-ERE bifurcation points
// for given mass ratios.

namespace sphere_re {

/// 2x3 matrix S with (lambda_12, lambda_23) = S (nu1, nu2, 1)^t.
struct SMatrix {
  std::array<Vec3, 2> row{};

  Vec2 apply(double nu1, double nu2) const {
    return {row[0][0] * nu1 + row[0][1] * nu2 + row[0][2],
            row[1][0] * nu1 + row[1][1] * nu2 + row[1][2]};
  }
  double det_tilde() const {
    return row[0][0] * row[1][1] - row[0][1] * row[1][0];
  }
  Vec3 row_cross() const { return cross(row[0], row[1]); }
  // singular values of the 2x3 matrix via the 2x2 Gram matrix
  Vec2 singular_values() const {
    double a = dot(row[0], row[0]), b = dot(row[0], row[1]),
           c = dot(row[1], row[1]);
    double tr = a + c, disc = std::sqrt((a - c) * (a - c) + 4 * b * b);
    return {std::sqrt(std::max(0.0, 0.5 * (tr + disc))),
            std::sqrt(std::max(0.0, 0.5 * (tr - disc)))};
  }
};

inline SMatrix s_matrix(const Shape& s) {
  require_in_u(s);
  const double s1 = std::sin(s.sigma1), s2 = std::sin(s.sigma2),
               s3 = std::sin(s.sigma3);
  const double c1 = std::cos(s.sigma1), c2 = std::cos(s.sigma2),
               c3 = std::cos(s.sigma3);
  const double t1 = s1 * s1 * s1, t2 = s2 * s2 * s2, t3 = s3 * s3 * s3;
  SMatrix S;
  S.row[0] = {c3 * t1 / t2 - 1, 1 - c3 * t2 / t1, t3 * (c1 / t2 - c2 / t1)};
  S.row[1] = {t1 * (c2 / t3 - c3 / t2), c1 * t2 / t3 - 1, 1 - c1 * t3 / t2};
  return S;
}

enum class MassSolutionKind {
  UniquePositive,
  UniqueNonpositive,
  OneParameterFamily,
  NoSolution,
};

struct MassSolution {
  MassSolutionKind kind = MassSolutionKind::NoSolution;
  double nu1 = 0, nu2 = 0;          // when unique
  double family_slope = 0;          // nu2 = slope * nu1 + intercept, rank 1
  double family_intercept = 0;
  double det_stilde = 0;
};

/// Classify the mass ratios solving lambda_12 = lambda_23 = 0 at a shape.
/// Rank decisions use a singular-value gap test at 1e-9 relative.
inline MassSolution mass_ratios_for_shape(const Shape& s,
                                          double rank_tol = 1e-9) {
  SMatrix S = s_matrix(s);
  MassSolution out;
  out.det_stilde = S.det_tilde();
  Vec2 sv = S.singular_values();
  bool rank_s_2 = sv[1] > rank_tol * sv[0];
  double tilde_scale = std::max(
      {std::fabs(S.row[0][0]), std::fabs(S.row[0][1]), std::fabs(S.row[1][0]),
       std::fabs(S.row[1][1])});
  bool rank_st_2 = std::fabs(out.det_stilde) >
                   rank_tol * tilde_scale * tilde_scale;
  if (rank_st_2) {
    Vec2 nu = solve2(S.row[0][0], S.row[0][1], S.row[1][0], S.row[1][1],
                     -S.row[0][2], -S.row[1][2]);
    out.nu1 = nu[0];
    out.nu2 = nu[1];
    out.kind = (nu[0] > 0 && nu[1] > 0) ? MassSolutionKind::UniquePositive
                                        : MassSolutionKind::UniqueNonpositive;
    return out;
  }
  if (rank_s_2) {
    out.kind = MassSolutionKind::NoSolution;
    return out;
  }
  // rank S = 1: affine family from the row with the larger norm
  const Vec3& r = dot(S.row[0], S.row[0]) >= dot(S.row[1], S.row[1])
                      ? S.row[0]
                      : S.row[1];
  if (std::fabs(r[1]) < 1e-14) {
    out.kind = MassSolutionKind::NoSolution;
    return out;
  }
  out.kind = MassSolutionKind::OneParameterFamily;
  out.family_slope = -r[0] / r[1];
  out.family_intercept = -r[2] / r[1];
  return out;
}

// ---------------------------------------------------------------------------
// The h = 0 bifurcation curve on a collinear plane.

/// h on the plane sigma3 = sigma1 + sigma2 (canonical labelling).
inline double h_residual(double sigma1, double sigma2) {
  double s3 = sigma1 + sigma2;
  return std::cos(3 * s3) - 3 * std::cos(s3) +
         2 * std::cos(2 * s3) * std::cos(sigma1 - sigma2);
}

/// h for the plane sigma_k = sigma_i + sigma_j of a (nearly) collinear shape.
inline double h_residual(const Shape& s, int middle = 2) {
  int i = (middle + 1) % 3, j = (middle + 2) % 3;
  double sk = s.sigma(middle);
  return std::cos(3 * sk) - 3 * std::cos(sk) +
         2 * std::cos(2 * sk) * std::cos(s.sigma(i) - s.sigma(j));
}

/// Range of sigma3 on the h = 0 curve: (pi/2, 2 sigma_e].
inline double h_curve_sigma3_max() {
  return std::acos(-1 + 1 / std::sqrt(2.0));
}

/// cos(sigma1 - sigma2) on h = 0 as a function of sigma3 (strictly
/// increasing on the curve's range).
inline double h_curve_cos_delta(double sigma3) {
  return (3 * std::cos(sigma3) - std::cos(3 * sigma3)) /
         (2 * std::cos(2 * sigma3));
}

/// Point on h = 0 at given sigma3; sign picks which of sigma1, sigma2 is
/// larger. Returns (sigma1, sigma2).
inline Vec2 h_curve_point(double sigma3, int sign = +1) {
  double cd = std::clamp(h_curve_cos_delta(sigma3), -1.0, 1.0);
  double delta = sign * std::acos(cd);  // sigma2 - sigma1
  return {(sigma3 - delta) / 2, (sigma3 + delta) / 2};
}

/// On h = 0 the mass solutions form an affine family nu2(nu1); evaluates it
/// at nu1 > 0. Throws OffCurveError when |h| exceeds tol.
inline double mass_family_on_h(double sigma1, double sigma2, double nu1,
                               double tol = 1e-6) {
  if (std::fabs(h_residual(sigma1, sigma2)) > tol)
    throw OffCurveError("point not on the h = 0 curve");
  double s3 = sigma1 + sigma2;
  double t1 = std::pow(std::sin(sigma1), 3), t2 = std::pow(std::sin(sigma2), 3);
  double c3 = std::cos(s3);
  double den = 1 - c3 * t2 / t1;
  double slope = (1 - c3 * t1 / t2) / den;
  double intercept = (std::cos(sigma2) / t1 - std::cos(sigma1) / t2) *
                     std::pow(std::sin(s3), 3) / den;
  return slope * nu1 + intercept;
}

/// r factor of the identity d = sin(sigma1 - sigma2) h r on the plane.
inline double h_curve_r_factor(double sigma1, double sigma2, double nu1) {
  double s3 = sigma1 + sigma2;
  double num = std::cos(s3) *
               ((1 - std::cos(2 * s3)) + nu1 * (1 - std::cos(2 * sigma1))) *
               (std::cos(s3) -
                std::cos(2 * s3) * std::cos(sigma1 - sigma2));
  double den = 4 * (1 - std::cos(s3) * std::pow(std::sin(sigma2), 3) /
                            std::pow(std::sin(sigma1), 3)) *
               std::pow(std::sin(sigma1), 4) * std::pow(std::sin(sigma2), 2) *
               std::pow(std::sin(s3), 2);
  return num / den;
}

/// det M of the ERE-continuation nondegeneracy lemma (closed form, valid on
/// h = 0).
inline double h_curve_det_m(double sigma1, double sigma2) {
  double s3 = sigma1 + sigma2;
  return 8 * std::sin(sigma1 - sigma2) * std::pow(std::sin(s3), 5) *
         (3 + 3 * std::cos(2 * s3) + std::cos(4 * s3)) /
         (std::pow(std::cos(2 * s3), 2) * std::pow(std::sin(sigma1), 4) *
          std::pow(std::sin(sigma2), 4) *
          (1 - std::cos(s3) * std::pow(std::sin(sigma2), 3) /
                   std::pow(std::sin(sigma1), 3)));
}

/// n of the LRE-continuation nondegeneracy lemma (trig polynomial in
/// sigma3).
inline double h_curve_n_factor(double sigma3) {
  return -710 - 1108 * std::cos(2 * sigma3) - 449 * std::cos(4 * sigma3) -
         100 * std::cos(6 * sigma3) + 6 * std::cos(8 * sigma3) +
         8 * std::cos(10 * sigma3) + std::cos(12 * sigma3);
}

// ---------------------------------------------------------------------------
// Counting bifurcation points for given (nu, dnu).

struct MeridianRoot {
  double sigma3 = 0, sigma1 = 0, sigma2 = 0;
  bool tangent = false;  // double root (the loop touches the plane)
};

namespace detail {

inline double sin_delta_on_h(double s3, double nu, double dnu) {
  double num = -dnu * (16 + 11 * std::cos(2 * s3) + std::cos(6 * s3)) *
               std::sin(s3);
  double den = 2 * std::cos(2 * s3) *
               ((1 + std::cos(4 * s3)) -
                nu * (5 + 4 * std::cos(2 * s3) + std::cos(4 * s3)));
  if (den == 0) return std::numeric_limits<double>::infinity();
  return num / den;
}

// F(sigma3) = (1 - cos^2 Delta) - sin^2 Delta; its zeros in
// (pi/2, 2 sigma_e] are the bifurcation points.
inline double meridian_count_f(double s3, double nu, double dnu) {
  double cd = h_curve_cos_delta(s3);
  double sd = sin_delta_on_h(s3, nu, dnu);
  if (!std::isfinite(sd)) return -std::numeric_limits<double>::infinity();
  return (1 - cd * cd) - sd * sd;
}

}  // namespace detail

/// Bifurcation points of LRE and meridian ERE on the canonical plane for
/// masses (nu - dnu, nu + dnu, 1). Sign-change roots of F plus a probe for
/// tangential double roots at interior maxima of F.
inline std::vector<MeridianRoot> meridian_bifurcation_roots(
    double nu, double dnu, int grid = 4096, double tangent_tol = 1e-9) {
  if (!(nu > 0) || std::fabs(dnu) >= nu)
    throw DomainError("need positive masses: nu > 0, |dnu| < nu");
  const double lo = kPi / 2 + 1e-9, hi = h_curve_sigma3_max();
  auto F = [&](double s3) { return detail::meridian_count_f(s3, nu, dnu); };
  std::vector<MeridianRoot> out;
  std::vector<double> roots = bracket_roots(F, lo, hi, grid, 1e-14);
  auto push = [&](double s3, bool tang) {
    double cd = std::clamp(h_curve_cos_delta(s3), -1.0, 1.0);
    double sd = detail::sin_delta_on_h(s3, nu, dnu);
    double delta = std::atan2(sd, cd);
    MeridianRoot r;
    r.sigma3 = s3;
    r.sigma1 = (s3 - delta) / 2;
    r.sigma2 = (s3 + delta) / 2;
    r.tangent = tang;
    if (r.sigma1 > 1e-9 && r.sigma2 > 1e-9) out.push_back(r);
  };
  for (double r : roots) push(r, false);
  // probe interior maxima of F that graze zero without a sign change
  double prev = F(lo), cur = F(lo + (hi - lo) / grid);
  for (int i = 2; i <= grid; ++i) {
    double x = lo + (hi - lo) * i / grid;
    double nxt = F(x);
    if (std::isfinite(prev) && std::isfinite(cur) && std::isfinite(nxt) &&
        cur > prev && cur > nxt && cur < 0) {
      double xm = golden_min(
          [&](double q) { return -F(q); }, x - 2 * (hi - lo) / grid, x, 1e-13);
      double fm = F(xm);
      if (fm < 0 && fm > -tangent_tol) {
        bool dup = false;
        for (const auto& r : out)
          if (std::fabs(r.sigma3 - xm) < 1e-6) dup = true;
        if (!dup) push(xm, true);
      }
    }
    prev = cur;
    cur = nxt;
  }
  return out;
}

/// Boundary values of sin^2(Delta) used by the counting lemma.
inline double sin2_delta_at_pi_half(double nu, double dnu) {
  return dnu * dnu / ((1 - nu) * (1 - nu));
}
inline double sin2_delta_at_upper(double nu, double dnu) {
  return (13 + 16 * std::sqrt(2.0)) * dnu * dnu / ((2 - 3 * nu) * (2 - 3 * nu));
}

}  // namespace sphere_re

#endif  // SPHERE_RE_INVERSE_MASS_HPP
