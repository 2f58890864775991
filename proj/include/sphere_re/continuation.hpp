#ifndef SPHERE_RE_CONTINUATION_HPP
#define SPHERE_RE_CONTINUATION_HPP

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "sphere_re/inverse_mass.hpp"
#include "sphere_re/symmetric_families.hpp"

// Pseudo-arclength continuation of LRE and ERE families in shape space for
// fixed masses, with event detection, and the branch atlas for a mass
// triple. Tracing always runs on denominator-cleared residuals; tangents of
// the cleared and plain systems agree on the solution set up to positive
// scale.

namespace sphere_re {

enum class FamilyKind {
  LreGeneric,      // lambda_12 = lambda_23 = 0, three free angles
  LreTilde,        // factored pair: tilde_{ij} = 0 plus the remaining lambda
  LreIsosceles,    // in-plane sigma_i = sigma_j family
  LreEquilateral,  // equal masses, the diagonal
  EreMeridian,     // d = 0 on a collinear plane
  EreEquatorPoint, // the isolated equator shape
};

inline std::string family_name(FamilyKind f, int index) {
  switch (f) {
    case FamilyKind::LreGeneric: return "LRE-generic";
    case FamilyKind::LreTilde: return "LRE-scalene";
    case FamilyKind::LreIsosceles: {
      int i = (index + 1) % 3 + 1, j = (index + 2) % 3 + 1;
      return "LRE-isosceles(" + std::to_string(std::min(i, j)) + "=" +
             std::to_string(std::max(i, j)) + ")";
    }
    case FamilyKind::LreEquilateral: return "LRE-equilateral";
    case FamilyKind::EreMeridian:
      return "ERE-meridian(" + std::to_string(index + 1) + ")";
    case FamilyKind::EreEquatorPoint: return "ERE-equator-point";
  }
  return "?";
}

struct Family {
  FamilyKind kind = FamilyKind::LreGeneric;
  // LreTilde: the equal-mass pair is (index+1, index+2) mod 3 ... use pair
  // convention: `index` is the body with the distinct mass (the k of the
  // pair (i,j)); same convention for LreIsosceles. EreMeridian: index is the
  // middle body / plane label.
  int index = -1;
};

enum class EventKind {
  MeridianPlaneCrossing = 1,
  EquatorCoupling = 2,
  IsoscelesScaleneBifurcation = 3,
  EquilateralIsoscelesBifurcation = 4,
  BoundaryExit = 5,
  LoopClosure = 6,
  TangentDegenerate = 7,
};

inline const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::MeridianPlaneCrossing: return "meridian-plane-crossing";
    case EventKind::EquatorCoupling: return "equator-coupling";
    case EventKind::IsoscelesScaleneBifurcation:
      return "isosceles-scalene-bifurcation";
    case EventKind::EquilateralIsoscelesBifurcation:
      return "equilateral-isosceles-bifurcation";
    case EventKind::BoundaryExit: return "boundary-exit";
    case EventKind::LoopClosure: return "loop-closure";
    case EventKind::TangentDegenerate: return "tangent-degenerate";
  }
  return "?";
}

struct Event {
  EventKind kind;
  Shape location;
  int index = -1;    // plane k or distinct-mass body of the pair
  double value = 0;  // kind-specific: h at plane crossings, etc.
};

struct BranchPoint {
  Shape shape;
  double arclength = 0;
  Vec3 tangent{};   // unit tangent of the trace direction
  double residual = 0;  // norm of the cleared defining equations
};

struct Branch {
  Family family;
  std::vector<BranchPoint> points;
  std::vector<Event> events;
  bool closed = false;
};

struct TraceOptions {
  double max_step = 2.5e-3;
  double initial_step = 1e-3;
  double min_step = 1e-9;
  double margin = 0.03;        // stop this close to the boundary of U
  double loop_tol = 1e-6;
  double tangent_align = 0.99;
  int max_points = 120000;
  int max_newton = 12;
};

namespace detail {

// ----- defining systems -----------------------------------------------

struct System3D {
  MassTriple m;
  bool use_tilde = false;
  int ti = 0, tj = 1;  // tilde pair when use_tilde
  int other_row = 1;   // which cleared lambda row complements the tilde

  Vec2 value(const Shape& s) const {
    Vec2 p = lre_residual_cleared(s, m);
    if (!use_tilde) return p;
    return {tilde_lambda(s, ti, tj, m), p[other_row]};
  }
  std::array<Vec3, 2> jac(const Shape& s) const {
    auto jp = cleared_jacobian(s, m);
    if (!use_tilde) return jp;
    return {tilde_lambda_gradient(s, ti, tj, m), jp[other_row]};
  }
};

inline System3D make_generic(const MassTriple& m) { return {m, false, 0, 1, 1}; }

inline System3D make_tilde(const MassTriple& m, int distinct) {
  int i = (distinct + 1) % 3, j = (distinct + 2) % 3;
  // complement: any remaining lambda difference independent of the pair's
  // antisymmetric factor; P23 works for pair (1,2), P12 otherwise
  int other = (i == 0 && j == 1) ? 1 : 0;
  return {m, true, i, j, other};
}

inline bool inside_margin(const Shape& s, double margin) {
  return s.sigma1 > margin && s.sigma1 < kPi - margin && s.sigma2 > margin &&
         s.sigma2 < kPi - margin && s.sigma3 > margin &&
         s.sigma3 < kPi - margin;
}

inline Vec3 plane_values(const Shape& s) {
  const Vec3 v = s.vec();
  return {v[0] - v[1] - v[2], v[1] - v[2] - v[0], v[2] - v[0] - v[1]};
}
inline double equator_value(const Shape& s) {
  return s.sigma1 + s.sigma2 + s.sigma3 - 2 * kPi;
}

// relative tangent: cross of the two gradient rows, degeneracy measured
// relative to the product of row norms
inline bool tangent_of(const System3D& sys, const Shape& s, Vec3& t) {
  auto J = sys.jac(s);
  Vec3 c = cross(J[0], J[1]);
  double rel = norm(c) / std::max(norm(J[0]) * norm(J[1]), 1e-300);
  if (rel < 1e-9) return false;
  t = normalized(c);
  return true;
}

// one pseudo-arclength corrector solve: F = 0 and t.(s - ref) = 0
inline bool correct(const System3D& sys, Shape& s, const Vec3& t,
                    const Vec3& ref, int maxit) {
  for (int it = 0; it < maxit; ++it) {
    Vec2 f = sys.value(s);
    auto J = sys.jac(s);
    double c = dot(t, s.vec() - ref);
    double n0 = std::max(norm(J[0]), 1e-300), n1 = std::max(norm(J[1]), 1e-300);
    std::array<Vec3, 3> A = {(1.0 / n0) * J[0], (1.0 / n1) * J[1], t};
    Vec3 rhs = {-f[0] / n0, -f[1] / n1, -c};
    Vec3 ds;
    try {
      ds = solve3(A, rhs);
    } catch (const DomainError&) {
      return false;
    }
    if (norm_inf(ds) > 0.5) return false;
    s = Shape(s.vec() + ds);
    if (norm_inf(ds) < 1e-13) return true;
  }
  return false;
}

// Newton onto an event manifold: F = 0 plus scalar constraint with fixed
// gradient row.
inline bool polish_on_manifold(const System3D& sys, Shape& s, const Vec3& row,
                               double target_offset,
                               const std::function<double(const Shape&)>& cval,
                               int maxit = 12) {
  (void)target_offset;
  for (int it = 0; it < maxit; ++it) {
    Vec2 f = sys.value(s);
    double c = cval(s);
    double n0 = std::max(norm(sys.jac(s)[0]), 1e-300);
    auto J = sys.jac(s);
    double n1 = std::max(norm(J[1]), 1e-300);
    std::array<Vec3, 3> A = {(1.0 / n0) * J[0], (1.0 / n1) * J[1], row};
    Vec3 rhs = {-f[0] / n0, -f[1] / n1, -c};
    Vec3 ds;
    try {
      ds = solve3(A, rhs);
    } catch (const DomainError&) {
      return false;
    }
    s = Shape(s.vec() + ds);
    if (norm_inf(ds) < 1e-13) return true;
  }
  return false;
}

}  // namespace detail

/// Almost-equilateral seed of the 0-LRE continuation: the epsilon-expansion
/// sigma_l = eps + (m_l/M - 1/3) eps^3/6, Newton-polished at fixed
/// sum(sigma) = 3 eps. Ordering follows the masses.
inline Shape seed_zero_lre(const MassTriple& m, double epsilon = 0.05) {
  if (!(epsilon > 0 && epsilon <= 0.1))
    throw SeedInvalid("epsilon outside (0, 0.1]");
  const double M = m.total();
  Vec3 v{};
  for (int k = 0; k < 3; ++k)
    v[k] = epsilon + (m.mass(k) / M - 1.0 / 3.0) * epsilon * epsilon *
                         epsilon / 6.0;
  Shape s(v);
  auto sys = detail::make_generic(m);
  for (int it = 0; it < 40; ++it) {
    Vec2 f = sys.value(s);
    double c = s.sigma1 + s.sigma2 + s.sigma3 - 3 * epsilon;
    auto J = sys.jac(s);
    double n0 = std::max(norm(J[0]), 1e-300), n1 = std::max(norm(J[1]), 1e-300);
    std::array<Vec3, 3> A = {(1.0 / n0) * J[0], (1.0 / n1) * J[1], {1, 1, 1}};
    Vec3 ds = solve3(A, {-f[0] / n0, -f[1] / n1, -c});
    s = Shape(s.vec() + ds);
    if (norm_inf(ds) < 1e-14) break;
  }
  Vec2 r = lre_residual(s, m);
  if (std::max(std::fabs(r[0]), std::fabs(r[1])) > kTolNewton)
    throw NewtonDivergence("0-LRE seed polish failed");
  return s;
}

struct EquatorSeed {
  Shape shape;
  Vec3 tangent;           // normalised grad cross product
  double triple_product;  // (1,1,1) . (grad l12 x grad l23), certificate
};

/// Equator ERE together with its certified transversal tangent; nullopt when
/// the mu-triangle condition fails.
inline std::optional<EquatorSeed> seed_from_equator(const MassTriple& m) {
  auto sh = ere_equator(m);
  if (!sh) return std::nullopt;
  auto J = residual_jacobian(*sh, m);
  Vec3 c = cross(J[0], J[1]);
  EquatorSeed seed{*sh, normalized(c), c[0] + c[1] + c[2]};
  return seed;
}

/// Closed form of the equator triple product (nondegeneracy certificate).
inline double equator_triple_product_closed_form(const MassTriple& m) {
  Vec3 mu = {std::sqrt(m.m2 * m.m3), std::sqrt(m.m3 * m.m1),
             std::sqrt(m.m1 * m.m2)};
  double m2sum = m.m1 * m.m1 + m.m2 * m.m2 + m.m3 * m.m3;
  double denom = m.m1 * m.m1 * m.m2 * m.m2 * m.m3 * m.m3;
  return -(m2sum) * (mu[0] + mu[1] + mu[2]) * (mu[0] + mu[1] - mu[2]) *
         (mu[1] + mu[2] - mu[0]) * (mu[2] + mu[0] - mu[1]) / denom;
}

namespace detail {

// 3-D trace of one direction. Returns points (seed first), events, and sets
// `closed` on loop closure.
struct TraceResult {
  std::vector<BranchPoint> points;
  std::vector<Event> events;
  bool closed = false;
};

inline TraceResult trace3d(const System3D& sys, const Shape& seed,
                           int direction, const TraceOptions& opt,
                           bool record_iso_events) {
  TraceResult out;
  Shape s = seed;
  Vec3 t;
  if (!tangent_of(sys, s, t)) {
    out.points.push_back({s, 0, {0, 0, 0}, norm(Vec3{sys.value(s)[0], sys.value(s)[1], 0})});
    out.events.push_back({EventKind::TangentDegenerate, s, -1, 0});
    return out;
  }
  t = double(direction) * t;
  double h = opt.initial_step;
  double arclen = 0;
  const Shape start = seed;
  const Vec3 t0 = t;
  Vec3 pv = plane_values(s);
  double ev = equator_value(s);
  auto push = [&](const Shape& q, const Vec3& tq) {
    Vec2 f = sys.value(q);
    out.points.push_back({q, arclen, tq, std::hypot(f[0], f[1])});
  };
  push(s, t);
  auto terminal = [&](EventKind kind, const Shape& loc, int idx, double val) {
    out.events.push_back({kind, loc, idx, val});
  };
  while ((int)out.points.size() < opt.max_points) {
    Vec3 pred = s.vec() + h * t;
    Shape snew(pred);
    if (!correct(sys, snew, t, pred, opt.max_newton)) {
      h *= 0.5;
      if (h < opt.min_step) {
        terminal(EventKind::BoundaryExit, s, -1, 0);
        return out;
      }
      continue;
    }
    if (!inside_margin(snew, opt.margin)) {
      terminal(EventKind::BoundaryExit, snew, -1, 0);
      push(snew, t);
      return out;
    }
    Vec3 pvn = plane_values(snew);
    double evn = equator_value(snew);
    int hit_plane = -1;
    bool hit_equator = false;
    for (int k = 0; k < 3; ++k)
      if (pv[k] < 0 && pvn[k] >= 0) hit_plane = k;
    if (ev < 0 && evn >= 0) hit_equator = true;
    // started on (or past) the U_phys boundary and moving outward
    if (hit_plane < 0 && !hit_equator &&
        (std::max({pvn[0], pvn[1], pvn[2]}) > 1e-7 || evn > 1e-7)) {
      terminal(EventKind::BoundaryExit, s, -1, 0);
      return out;
    }
    if (hit_plane >= 0 || hit_equator) {
      // bisect the segment for the boundary point, then polish on manifold
      Vec3 a = s.vec(), b = snew.vec();
      auto cval = [&](const Shape& q) {
        return hit_equator ? equator_value(q) : plane_values(q)[hit_plane];
      };
      double lo = 0, hi = 1;
      for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        Shape q(a + mid * (b - a));
        (cval(q) < 0 ? lo : hi) = mid;
      }
      Shape qev(a + 0.5 * (lo + hi) * (b - a));
      Vec3 row;
      if (hit_equator) {
        row = {1, 1, 1};
      } else {
        row = {-1, -1, -1};
        row[hit_plane] = 1;
      }
      polish_on_manifold(sys, qev, row, 0, cval);
      arclen += norm(qev.vec() - s.vec());
      push(qev, t);
      if (hit_equator) {
        terminal(EventKind::EquatorCoupling, qev, -1, 0);
      } else {
        terminal(EventKind::MeridianPlaneCrossing, qev, hit_plane,
                 h_residual(qev, hit_plane));
      }
      return out;
    }
    if (record_iso_events) {
      for (int k = 0; k < 3; ++k) {
        int i = (k + 1) % 3, j = (k + 2) % 3;
        if (!sys.m.pair_equal(i, j, 1e-9)) continue;
        double da = s.sigma(i) - s.sigma(j);
        double db = snew.sigma(i) - snew.sigma(j);
        if (da * db < 0) {
          Vec3 a = s.vec(), b = snew.vec();
          double lo = 0, hi = 1;
          bool aneg = da < 0;
          for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo + hi);
            Shape q(a + mid * (b - a));
            (((q.sigma(i) - q.sigma(j)) < 0) == aneg ? lo : hi) = mid;
          }
          Shape qev(a + 0.5 * (lo + hi) * (b - a));
          Vec3 row{};
          row[i] = 1;
          row[j] = -1;
          polish_on_manifold(sys, qev, row, 0, [&](const Shape& q) {
            return q.sigma(i) - q.sigma(j);
          });
          out.events.push_back(
              {EventKind::IsoscelesScaleneBifurcation, qev, k, 0});
        }
      }
    }
    arclen += norm(snew.vec() - s.vec());
    s = snew;
    pv = pvn;
    ev = evn;
    Vec3 tn;
    if (!tangent_of(sys, s, tn)) {
      push(s, t);
      terminal(EventKind::TangentDegenerate, s, -1, 0);
      return out;
    }
    if (dot(tn, t) < 0) tn = -1.0 * tn;
    t = tn;
    push(s, t);
    h = std::min(h * 1.3, opt.max_step);
    if (arclen > 20 * opt.max_step &&
        norm(s.vec() - start.vec()) < std::max(opt.loop_tol, 1.5 * h)) {
      Shape scl = s;
      if (correct(sys, scl, t0, start.vec(), opt.max_newton) &&
          norm(scl.vec() - start.vec()) < opt.loop_tol &&
          std::fabs(dot(t, t0)) > opt.tangent_align) {
        out.points.push_back({start, arclen + norm(scl.vec() - s.vec()), t,
                              out.points.front().residual});
        out.events.push_back({EventKind::LoopClosure, start, -1, 0});
        out.closed = true;
        return out;
      }
    }
  }
  terminal(EventKind::BoundaryExit, s, -1, 0);
  return out;
}

// ----- 2-D in-plane tracing (isosceles families and meridian ERE) ------

struct System2D {
  // residual f(u, v) and gradient; coordinates map to shapes via embed_coords
  std::function<double(double, double)> f;
  std::function<Vec2(double, double)> grad;
  std::function<Shape(double, double)> to_shape;
  // in-plane boundary functions (terminate when any becomes >= 0), paired
  // with the terminal event kind and index
  struct Boundary {
    std::function<double(double, double)> val;
    EventKind kind;
    int index;
  };
  std::vector<Boundary> boundaries;
  // scalar event functions (recorded, non-terminal)
  struct Marker {
    std::function<double(double, double)> val;
    EventKind kind;
    int index;
  };
  std::vector<Marker> markers;
};

inline TraceResult trace2d(const System2D& sys, Vec2 seed, int direction,
                           const TraceOptions& opt) {
  TraceResult out;
  Vec2 p = seed;
  auto tangent2 = [&](const Vec2& q, Vec2& t) {
    Vec2 g = sys.grad(q[0], q[1]);
    double n = std::hypot(g[0], g[1]);
    if (!(n > 1e-300)) return false;
    t = {-g[1] / n, g[0] / n};
    return true;
  };
  auto correct2 = [&](Vec2& q, const Vec2& t, const Vec2& ref) {
    for (int it = 0; it < opt.max_newton; ++it) {
      double f = sys.f(q[0], q[1]);
      Vec2 g = sys.grad(q[0], q[1]);
      double gn = std::max(std::hypot(g[0], g[1]), 1e-300);
      double c = t[0] * (q[0] - ref[0]) + t[1] * (q[1] - ref[1]);
      Vec2 ds;
      try {
        ds = solve2(g[0] / gn, g[1] / gn, t[0], t[1], -f / gn, -c);
      } catch (const DomainError&) {
        return false;
      }
      if (std::max(std::fabs(ds[0]), std::fabs(ds[1])) > 0.5) return false;
      q = {q[0] + ds[0], q[1] + ds[1]};
      if (std::max(std::fabs(ds[0]), std::fabs(ds[1])) < 1e-13) return true;
    }
    return false;
  };
  Vec2 t;
  if (!tangent2(p, t)) {
    out.events.push_back(
        {EventKind::TangentDegenerate, sys.to_shape(p[0], p[1]), -1, 0});
    return out;
  }
  t = {direction * t[0], direction * t[1]};
  double h = opt.initial_step;
  double arclen = 0;
  const Vec2 start = p;
  const Vec2 tstart = t;
  std::vector<double> bv(sys.boundaries.size()), mv(sys.markers.size());
  for (size_t b = 0; b < sys.boundaries.size(); ++b)
    bv[b] = sys.boundaries[b].val(p[0], p[1]);
  for (size_t q = 0; q < sys.markers.size(); ++q)
    mv[q] = sys.markers[q].val(p[0], p[1]);
  auto push = [&](const Vec2& q, const Vec2& tq) {
    out.points.push_back({sys.to_shape(q[0], q[1]), arclen,
                          {tq[0], tq[1], 0},
                          std::fabs(sys.f(q[0], q[1]))});
  };
  push(p, t);
  while ((int)out.points.size() < opt.max_points) {
    Vec2 pred = {p[0] + h * t[0], p[1] + h * t[1]};
    Vec2 pn = pred;
    if (!correct2(pn, t, pred)) {
      h *= 0.5;
      if (h < opt.min_step) {
        out.events.push_back(
            {EventKind::BoundaryExit, sys.to_shape(p[0], p[1]), -1, 0});
        return out;
      }
      continue;
    }
    // terminal boundaries
    bool stop = false;
    for (size_t b = 0; b < sys.boundaries.size(); ++b) {
      double nb = sys.boundaries[b].val(pn[0], pn[1]);
      if (bv[b] < 0 && nb >= 0) {
        double lo = 0, hi = 1;
        for (int it = 0; it < 60; ++it) {
          double mid = 0.5 * (lo + hi);
          Vec2 q = {p[0] + mid * (pn[0] - p[0]), p[1] + mid * (pn[1] - p[1])};
          (sys.boundaries[b].val(q[0], q[1]) < 0 ? lo : hi) = mid;
        }
        double mid = 0.5 * (lo + hi);
        Vec2 q = {p[0] + mid * (pn[0] - p[0]), p[1] + mid * (pn[1] - p[1])};
        arclen += std::hypot(q[0] - p[0], q[1] - p[1]);
        push(q, t);
        out.events.push_back({sys.boundaries[b].kind,
                              sys.to_shape(q[0], q[1]),
                              sys.boundaries[b].index, 0});
        stop = true;
        break;
      }
      bv[b] = nb;
    }
    if (stop) return out;
    // markers
    for (size_t q = 0; q < sys.markers.size(); ++q) {
      double nm = sys.markers[q].val(pn[0], pn[1]);
      if (mv[q] * nm < 0) {
        double lo = 0, hi = 1;
        bool aneg = mv[q] < 0;
        for (int it = 0; it < 60; ++it) {
          double mid = 0.5 * (lo + hi);
          Vec2 w = {p[0] + mid * (pn[0] - p[0]), p[1] + mid * (pn[1] - p[1])};
          ((sys.markers[q].val(w[0], w[1]) < 0) == aneg ? lo : hi) = mid;
        }
        double mid = 0.5 * (lo + hi);
        Vec2 w = {p[0] + mid * (pn[0] - p[0]), p[1] + mid * (pn[1] - p[1])};
        out.events.push_back({sys.markers[q].kind, sys.to_shape(w[0], w[1]),
                              sys.markers[q].index, 0});
      }
      mv[q] = nm;
    }
    arclen += std::hypot(pn[0] - p[0], pn[1] - p[1]);
    p = pn;
    Vec2 tn;
    if (!tangent2(p, tn)) {
      out.events.push_back(
          {EventKind::TangentDegenerate, sys.to_shape(p[0], p[1]), -1, 0});
      return out;
    }
    if (tn[0] * t[0] + tn[1] * t[1] < 0) tn = {-tn[0], -tn[1]};
    t = tn;
    push(p, t);
    h = std::min(h * 1.3, opt.max_step);
    if (arclen > 20 * opt.max_step &&
        std::hypot(p[0] - start[0], p[1] - start[1]) <
            std::max(opt.loop_tol, 1.5 * h)) {
      Vec2 scl = p;
      if (correct2(scl, tstart, start) &&
          std::hypot(scl[0] - start[0], scl[1] - start[1]) < opt.loop_tol &&
          std::fabs(t[0] * tstart[0] + t[1] * tstart[1]) > opt.tangent_align) {
        out.points.push_back({sys.to_shape(start[0], start[1]), arclen,
                              {t[0], t[1], 0}, out.points.front().residual});
        out.events.push_back({EventKind::LoopClosure,
                              sys.to_shape(start[0], start[1]), -1, 0});
        out.closed = true;
        return out;
      }
    }
  }
  out.events.push_back(
      {EventKind::BoundaryExit, sys.to_shape(p[0], p[1]), -1, 0});
  return out;
}

// isosceles slice system for pair (i,j) equal, distinct body = k; coords
// (sigma, sigma_k)
inline System2D make_iso_system(const MassTriple& m, int distinct,
                                const TraceOptions& opt) {
  int k = distinct;
  double nu = m.mass((k + 1) % 3) / m.mass(k);
  bool all_equal = m.all_equal();
  System2D sys;
  sys.f = [nu](double s, double s3) { return iso_residual_cleared(s, s3, nu); };
  sys.grad = [nu](double s, double s3) {
    return iso_residual_cleared_gradient(s, s3, nu);
  };
  sys.to_shape = [k](double s, double s3) {
    Vec3 v{};
    v[(k + 1) % 3] = s;
    v[(k + 2) % 3] = s;
    v[k] = s3;
    return Shape(v);
  };
  double mg = opt.margin;
  sys.boundaries.push_back(
      {[](double s, double s3) { return s3 - 2 * s; },
       EventKind::MeridianPlaneCrossing, k});
  sys.boundaries.push_back(
      {[](double s, double s3) { return 2 * s + s3 - 2 * kPi; },
       EventKind::EquatorCoupling, -1});
  sys.boundaries.push_back(
      {[mg](double s, double s3) {
         return -std::min({s - mg, kPi - mg - s, s3 - mg, kPi - mg - s3});
       },
       EventKind::BoundaryExit, -1});
  // scalene bifurcations: zeros of the factored pair condition
  sys.markers.push_back({[nu](double s, double s3) {
                           double ss = std::sin(s);
                           return ss * ss *
                                  (6 * nu * ss * ss * ss * std::cos(s) *
                                       std::cos(s3) +
                                   (1 + 2 * std::cos(2 * s)) *
                                       std::pow(std::sin(s3), 3));
                         },
                         EventKind::IsoscelesScaleneBifurcation, k});
  if (all_equal)
    sys.markers.push_back({[](double s, double s3) { return s3 - s; },
                           EventKind::EquilateralIsoscelesBifurcation, -1});
  return sys;
}

inline System2D make_ere_system(const MassTriple& m, int middle,
                                const TraceOptions& opt) {
  System2D sys;
  int i = (middle + 1) % 3, j = (middle + 2) % 3;
  sys.f = [m, middle](double a, double b) {
    return ere_d_cleared(a, b, m, middle);
  };
  sys.grad = [m, middle](double a, double b) {
    return ere_d_cleared_gradient(a, b, m, middle);
  };
  sys.to_shape = [i, j, middle](double a, double b) {
    Vec3 v{};
    v[i] = a;
    v[j] = b;
    v[middle] = a + b;
    return Shape(v);
  };
  double mg = opt.margin;
  sys.boundaries.push_back(
      {[mg](double a, double b) {
         return -std::min({a - mg, b - mg, kPi - mg - (a + b)});
       },
       EventKind::BoundaryExit, -1});
  sys.markers.push_back({[](double a, double b) { return h_residual(a, b); },
                         EventKind::MeridianPlaneCrossing, middle});
  return sys;
}

}  // namespace detail

/// Trace one branch from a seed. `direction` traces a single side; 0 traces
/// both sides and stitches them. The seed must satisfy the family's defining
/// equations to Newton tolerance.
inline Branch trace_branch(const Shape& seed, const MassTriple& m,
                           Family family, int direction = 0,
                           const TraceOptions& opt = {}) {
  Branch br;
  br.family = family;
  auto stitch = [&](detail::TraceResult&& neg, detail::TraceResult&& pos) {
    br.closed = pos.closed || neg.closed;
    // negative side reversed, then positive side (skipping duplicate seed)
    std::reverse(neg.points.begin(), neg.points.end());
    br.points = std::move(neg.points);
    for (size_t q = 1; q < pos.points.size(); ++q)
      br.points.push_back(pos.points[q]);
    // rebuild arclength monotonically
    double acc = 0;
    for (size_t q = 0; q < br.points.size(); ++q) {
      if (q)
        acc += norm(br.points[q].shape.vec() - br.points[q - 1].shape.vec());
      br.points[q].arclength = acc;
    }
    br.events = std::move(neg.events);
    for (auto& e : pos.events) br.events.push_back(e);
  };

  switch (family.kind) {
    case FamilyKind::LreGeneric:
    case FamilyKind::LreTilde: {
      detail::System3D sys = family.kind == FamilyKind::LreGeneric
                                 ? detail::make_generic(m)
                                 : detail::make_tilde(m, family.index);
      Vec2 f = sys.value(seed);
      if (std::hypot(f[0], f[1]) > 1e-8) throw SeedInvalid("seed residual too large");
      bool iso_ev = family.kind == FamilyKind::LreTilde ||
                    m.equal_pair_index() >= 0;
      if (direction != 0) {
        auto r = detail::trace3d(sys, seed, direction, opt, iso_ev);
        br.closed = r.closed;
        br.points = std::move(r.points);
        br.events = std::move(r.events);
      } else {
        auto rp = detail::trace3d(sys, seed, +1, opt, iso_ev);
        if (rp.closed) {
          br.closed = true;
          br.points = std::move(rp.points);
          br.events = std::move(rp.events);
        } else {
          auto rn = detail::trace3d(sys, seed, -1, opt, iso_ev);
          stitch(std::move(rn), std::move(rp));
        }
      }
      break;
    }
    case FamilyKind::LreIsosceles:
    case FamilyKind::EreMeridian: {
      detail::System2D sys =
          family.kind == FamilyKind::LreIsosceles
              ? detail::make_iso_system(m, family.index, opt)
              : detail::make_ere_system(m, family.index, opt);
      // recover 2-D coordinates from the seed shape
      Vec2 p0;
      if (family.kind == FamilyKind::LreIsosceles) {
        int k = family.index;
        p0 = {seed.sigma((k + 1) % 3), seed.sigma(k)};
      } else {
        int k = family.index;
        p0 = {seed.sigma((k + 1) % 3), seed.sigma((k + 2) % 3)};
      }
      if (std::fabs(sys.f(p0[0], p0[1])) > 1e-8)
        throw SeedInvalid("seed residual too large");
      if (direction != 0) {
        auto r = detail::trace2d(sys, p0, direction, opt);
        br.closed = r.closed;
        br.points = std::move(r.points);
        br.events = std::move(r.events);
      } else {
        auto rp = detail::trace2d(sys, p0, +1, opt);
        if (rp.closed) {
          br.closed = true;
          br.points = std::move(rp.points);
          br.events = std::move(rp.events);
        } else {
          auto rn = detail::trace2d(sys, p0, -1, opt);
          stitch(std::move(rn), std::move(rp));
        }
      }
      break;
    }
    case FamilyKind::LreEquilateral: {
      if (!m.all_equal()) throw SeedInvalid("equilateral family needs equal masses");
      // analytic diagonal from the margin to the equator coupling
      double lo = opt.margin, hi = 2 * kPi / 3;
      int n = std::max(16, int((hi - lo) / opt.max_step));
      auto c = equal_mass_constants();
      double acc = 0;
      Shape prev(lo, lo, lo);
      for (int q = 0; q <= n; ++q) {
        double a = lo + (hi - lo) * q / n;
        Shape sh(a, a, a);
        if (q) acc += norm(sh.vec() - prev.vec());
        double r = std::hypot(lre_residual_cleared(sh, m)[0],
                              lre_residual_cleared(sh, m)[1]);
        br.points.push_back(
            {sh, acc, {1 / std::sqrt(3.0), 1 / std::sqrt(3.0), 1 / std::sqrt(3.0)}, r});
        prev = sh;
      }
      br.events.push_back({EventKind::EquilateralIsoscelesBifurcation,
                           Shape(c.sigma_c, c.sigma_c, c.sigma_c), -1, 0});
      if (kPi - c.sigma_c < hi)
        br.events.push_back(
            {EventKind::EquilateralIsoscelesBifurcation,
             Shape(kPi - c.sigma_c, kPi - c.sigma_c, kPi - c.sigma_c), -1, 0});
      br.events.push_back({EventKind::EquatorCoupling,
                           Shape(2 * kPi / 3, 2 * kPi / 3, 2 * kPi / 3), -1, 0});
      break;
    }
    case FamilyKind::EreEquatorPoint: {
      br.points.push_back({seed, 0, {0, 0, 0}, 0});
      break;
    }
  }
  return br;
}

// ---------------------------------------------------------------------------
// Branch atlas.

namespace detail {

// point-to-polyline distance, localised around the nearest sample
inline double curve_distance(const Vec3& p, const std::vector<BranchPoint>& pts) {
  if (pts.empty()) return 1e300;
  size_t best_i = 0;
  double best = 1e300;
  for (size_t q = 0; q < pts.size(); ++q) {
    double d = norm(pts[q].shape.vec() - p);
    if (d < best) {
      best = d;
      best_i = q;
    }
  }
  size_t lo = best_i > 2 ? best_i - 2 : 0;
  size_t hi = std::min(pts.size() - 1, best_i + 2);
  for (size_t q = lo; q < hi; ++q) {
    Vec3 a = pts[q].shape.vec(), b = pts[q + 1].shape.vec();
    Vec3 ab = b - a;
    double denom = std::max(dot(ab, ab), 1e-300);
    double tt = std::clamp(dot(p - a, ab) / denom, 0.0, 1.0);
    best = std::min(best, norm(p - (a + tt * ab)));
  }
  return best;
}

// directed: max over subsamples of A of the distance to polyline B
inline double directed_hausdorff(const Branch& A, const Branch& B,
                                 double early_exit) {
  double worst = 0;
  size_t n = A.points.size();
  size_t step = std::max<size_t>(1, n / 200);
  for (size_t q = 0; q < n; q += step) {
    worst = std::max(worst, curve_distance(A.points[q].shape.vec(), B.points));
    if (worst > early_exit) return worst;
  }
  worst = std::max(worst, curve_distance(A.points.back().shape.vec(), B.points));
  return worst;
}

inline bool same_branch(const Branch& a, const Branch& b, double tol) {
  if (a.points.empty() || b.points.empty()) return false;
  return directed_hausdorff(a, b, tol) < tol &&
         directed_hausdorff(b, a, tol) < tol;
}

}  // namespace detail

struct AtlasOptions {
  TraceOptions trace{};
  int grid = 24;           // 3-D sign-change scan resolution
  int iso_grid = 160;      // 2-D scan resolution on isosceles slices
  double dedup_tol = 1e-4; // Hausdorff identity threshold
  double epsilon = 0.05;   // 0-LRE seed size
};

/// All LRE continuation branches for a mass triple: seeded from the
/// almost-equilateral limit, the equator ERE, every LRE/ERE bifurcation
/// point on the three collinear planes, and a coarse sign-change scan;
/// deduplicated by polyline Hausdorff distance. Enumeration is heuristic:
/// counts are verified against the known cases, not guaranteed.
inline std::vector<Branch> enumerate_branches(const MassTriple& m,
                                              const AtlasOptions& aopt = {}) {
  std::vector<Branch> out;
  const TraceOptions& opt = aopt.trace;
  auto add = [&](Branch&& br) {
    if (br.points.size() < 5) return;
    for (const auto& b : out)
      if (detail::same_branch(br, b, aopt.dedup_tol)) return;
    out.push_back(std::move(br));
  };
  auto near_existing = [&](const Shape& s) {
    for (const auto& b : out)
      if (detail::curve_distance(s.vec(), b.points) < 1e-6) return true;
    return false;
  };
  const int pair_k = m.equal_pair_index();
  const bool all_eq = m.all_equal();

  if (all_eq) {
    add(trace_branch(Shape(1, 1, 1), m, {FamilyKind::LreEquilateral, -1}, 0,
                     opt));
  }

  // --- isosceles slices (equal-mass pairs only) ---
  auto scan_iso = [&](int k) {
    auto sys = detail::make_iso_system(m, k, opt);
    int n = aopt.iso_grid;
    std::vector<double> fu(n * n);
    std::vector<double> us(n), vs(n);
    for (int q = 0; q < n; ++q) {
      us[q] = opt.margin + (kPi - 2 * opt.margin) * q / (n - 1);
      vs[q] = us[q];
    }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) fu[a * n + b] = sys.f(us[a], vs[b]);
    for (int a = 0; a + 1 < n; ++a)
      for (int b = 0; b + 1 < n; ++b) {
        double f00 = fu[a * n + b], f10 = fu[(a + 1) * n + b],
               f01 = fu[a * n + b + 1], f11 = fu[(a + 1) * n + b + 1];
        double mn = std::min({f00, f10, f01, f11}),
               mx = std::max({f00, f10, f01, f11});
        if (!(mn < 0 && mx > 0)) continue;
        // mid-cell seed, least-norm Newton onto the curve
        Vec2 p = {0.5 * (us[a] + us[a + 1]), 0.5 * (vs[b] + vs[b + 1])};
        bool ok = false;
        for (int it = 0; it < 40; ++it) {
          double f = sys.f(p[0], p[1]);
          Vec2 g = sys.grad(p[0], p[1]);
          double g2 = g[0] * g[0] + g[1] * g[1];
          if (g2 < 1e-300) break;
          Vec2 ds = {-f * g[0] / g2, -f * g[1] / g2};
          double cap = 0.2;
          double dn = std::max(std::fabs(ds[0]), std::fabs(ds[1]));
          if (dn > cap) ds = {ds[0] * cap / dn, ds[1] * cap / dn};
          p = {p[0] + ds[0], p[1] + ds[1]};
          if (dn < 1e-13) {
            ok = true;
            break;
          }
        }
        if (!ok) continue;
        Shape sh = sys.to_shape(p[0], p[1]);
        // only physical seeds
        if (!sh.in_u() || detail::plane_values(sh)[k] > 0 ||
            detail::equator_value(sh) > 0)
          continue;
        if (p[0] < opt.margin || p[1] < opt.margin) continue;
        if (near_existing(sh)) continue;
        add(trace_branch(sh, m, {FamilyKind::LreIsosceles, k}, 0, opt));
      }
  };

  if (all_eq) {
    for (int k = 0; k < 3; ++k) scan_iso(k);
  } else if (pair_k >= 0) {
    // 0-LRE and equator seeds are isosceles here; the slice scan finds
    // their curves, and explicit seeds keep them first in the output
    try {
      Shape s0 = seed_zero_lre(m, aopt.epsilon);
      add(trace_branch(s0, m, {FamilyKind::LreIsosceles, pair_k}, 0, opt));
    } catch (const NewtonDivergence&) {
    }
    if (auto eq = seed_from_equator(m))
      if (!near_existing(eq->shape))
        add(trace_branch(eq->shape, m, {FamilyKind::LreIsosceles, pair_k}, 0,
                         opt));
    scan_iso(pair_k);
  }

  // --- generic / scalene 3-D branches ---
  Family fam3d = pair_k >= 0 ? Family{FamilyKind::LreTilde, pair_k}
                             : Family{FamilyKind::LreGeneric, -1};
  detail::System3D sys3 = pair_k >= 0 ? detail::make_tilde(m, pair_k)
                                      : detail::make_generic(m);

  auto add_3d_seed = [&](const Shape& sh) {
    if (near_existing(sh)) return;
    try {
      add(trace_branch(sh, m, fam3d, 0, opt));
    } catch (const SeedInvalid&) {
    }
  };

  if (pair_k < 0) {
    try {
      add_3d_seed(seed_zero_lre(m, aopt.epsilon));
    } catch (const NewtonDivergence&) {
    }
    if (auto eq = seed_from_equator(m)) add_3d_seed(eq->shape);
  }

  // LRE/ERE bifurcation points on the three collinear planes
  for (int k = 0; k < 3; ++k) {
    if (all_eq) break;  // only the coupling point p_E, handled by the slices
    int i = (k + 1) % 3, j = (k + 2) % 3;
    double nu1 = m.mass(i) / m.mass(k), nu2 = m.mass(j) / m.mass(k);
    double nu = 0.5 * (nu1 + nu2), dnu = 0.5 * (nu2 - nu1);
    if (std::fabs(dnu) < 1e-12) continue;  // handled as isosceles coupling
    for (const auto& root : meridian_bifurcation_roots(nu, dnu)) {
      Vec3 v{};
      v[i] = root.sigma1;
      v[j] = root.sigma2;
      v[k] = root.sigma3;
      Shape sh(v);
      if (near_existing(sh)) continue;
      // trace inward only (the plane is the physical boundary)
      Vec3 nrm = {-1, -1, -1};
      nrm[k] = 1;
      detail::System3D s3 = sys3;
      Vec3 t;
      if (!detail::tangent_of(s3, sh, t)) continue;
      int dir = dot(t, nrm) < 0 ? +1 : -1;
      try {
        add(trace_branch(sh, m, fam3d, dir, opt));
      } catch (const SeedInvalid&) {
      }
    }
  }

  // scalene bifurcation points recorded on isosceles branches
  if (pair_k >= 0 && !all_eq) {
    std::vector<Shape> seeds;
    for (const auto& b : out)
      for (const auto& e : b.events)
        if (e.kind == EventKind::IsoscelesScaleneBifurcation)
          seeds.push_back(e.location);
    for (const auto& sh : seeds) add_3d_seed(sh);
  }

  // coarse sign-change scan of the 3-D system over U_phys
  if (!all_eq) {
    const int n = aopt.grid;
    std::vector<Vec2> fv(size_t(n) * n * n);
    std::vector<double> gv(n);
    for (int q = 0; q < n; ++q)
      gv[q] = opt.margin + (kPi - 2 * opt.margin) * q / (n - 1);
    auto idx = [n](int a, int b, int c) {
      return (size_t(a) * n + b) * n + c;
    };
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          fv[idx(a, b, c)] = sys3.value(Shape(gv[a], gv[b], gv[c]));
    for (int a = 0; a + 1 < n; ++a)
      for (int b = 0; b + 1 < n; ++b)
        for (int c = 0; c + 1 < n; ++c) {
          double mn0 = 1e300, mx0 = -1e300, mn1 = 1e300, mx1 = -1e300;
          for (int da = 0; da < 2; ++da)
            for (int db = 0; db < 2; ++db)
              for (int dc = 0; dc < 2; ++dc) {
                const Vec2& f = fv[idx(a + da, b + db, c + dc)];
                mn0 = std::min(mn0, f[0]);
                mx0 = std::max(mx0, f[0]);
                mn1 = std::min(mn1, f[1]);
                mx1 = std::max(mx1, f[1]);
              }
          if (!(mn0 < 0 && mx0 > 0 && mn1 < 0 && mx1 > 0)) continue;
          Shape mid(gv[a] + 0.5 * (gv[1] - gv[0]),
                    gv[b] + 0.5 * (gv[1] - gv[0]),
                    gv[c] + 0.5 * (gv[1] - gv[0]));
          if (detail::plane_values(mid)[0] > 0.2 ||
              detail::plane_values(mid)[1] > 0.2 ||
              detail::plane_values(mid)[2] > 0.2 ||
              detail::equator_value(mid) > 0.2)
            continue;
          // least-norm Newton onto the curve
          Shape s = mid;
          bool ok = false;
          for (int it = 0; it < 40; ++it) {
            Vec2 f = sys3.value(s);
            auto J = sys3.jac(s);
            // ds = J^T (J J^T)^-1 (-f)
            double a11 = dot(J[0], J[0]), a12 = dot(J[0], J[1]),
                   a22 = dot(J[1], J[1]);
            double det = a11 * a22 - a12 * a12;
            if (std::fabs(det) < 1e-300) break;
            double w0 = (-f[0] * a22 + f[1] * a12) / det;
            double w1 = (-f[1] * a11 + f[0] * a12) / det;
            Vec3 ds = w0 * J[0] + w1 * J[1];
            double dn = norm_inf(ds);
            double cap = 0.2;
            if (dn > cap) ds = (cap / dn) * ds;
            s = Shape(s.vec() + ds);
            if (!s.in_u()) break;
            if (dn < 1e-13) {
              ok = true;
              break;
            }
          }
          if (!ok) continue;
          if (detail::plane_values(s)[0] > 1e-9 ||
              detail::plane_values(s)[1] > 1e-9 ||
              detail::plane_values(s)[2] > 1e-9 ||
              detail::equator_value(s) > 1e-9)
            continue;
          if (!detail::inside_margin(s, opt.margin)) continue;
          add_3d_seed(s);
        }
  }
  return out;
}

}  // namespace sphere_re

#endif  // SPHERE_RE_CONTINUATION_HPP
