#pragma once
// Independent reference computations for the test suite. Nothing here calls
// into the library algorithms under test; only plain value types are shared.
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <vector>

#include "bperc/lattice.hpp"

namespace oracle {

using bperc::Point;

// A rectangle [xmin, xmax] x [ymin, ymax], optionally wrapped as a torus
// (then xmin = ymin = 0 and width = height).
struct Grid {
  bool torus{false};
  std::int64_t xmin{0}, xmax{0}, ymin{0}, ymax{0};

  std::int64_t w() const { return xmax - xmin + 1; }
  std::int64_t h() const { return ymax - ymin + 1; }
  std::size_t cells() const { return static_cast<std::size_t>(w() * h()); }
  std::optional<std::size_t> at(std::int64_t x, std::int64_t y) const {
    if (torus) {
      x = ((x - xmin) % w() + w()) % w() + xmin;
      y = ((y - ymin) % h() + h()) % h() + ymin;
    }
    if (x < xmin || x > xmax || y < ymin || y > ymax) return std::nullopt;
    return static_cast<std::size_t>((y - ymin) * w() + (x - xmin));
  }
};

// Synchronous iteration A_{t+1} = A_t ∪ {x : |(x + K) ∩ A_t| >= r}, with the
// round in which each site joined (-1 healthy).
inline std::vector<std::int32_t> naive_closure(const Grid& g, const std::vector<Point>& offsets, int r,
                                               const std::vector<Point>& initial) {
  std::vector<std::int32_t> t(g.cells(), -1);
  for (Point p : initial) t[*g.at(p.x, p.y)] = 0;
  for (std::int32_t round = 1;; ++round) {
    std::vector<std::size_t> born;
    for (std::int64_t y = g.ymin; y <= g.ymax; ++y) {
      for (std::int64_t x = g.xmin; x <= g.xmax; ++x) {
        const std::size_t i = *g.at(x, y);
        if (t[i] >= 0) continue;
        int c = 0;
        for (Point k : offsets) {
          const auto j = g.at(x + k.x, y + k.y);
          if (j && t[*j] >= 0) ++c;
        }
        if (c >= r) born.push_back(i);
      }
    }
    if (born.empty()) return t;
    for (auto i : born) t[i] = round;
  }
}

inline std::int64_t negative_count(const std::vector<Point>& offsets, double ux, double uy) {
  std::int64_t c = 0;
  for (Point k : offsets) {
    if (static_cast<double>(k.x) * ux + static_cast<double>(k.y) * uy < 0) ++c;
  }
  return c;
}

inline std::int64_t negative_count(const std::vector<Point>& offsets, Point u) {
  std::int64_t c = 0;
  for (Point k : offsets) {
    if (k.x * u.x + k.y * u.y < 0) ++c;
  }
  return c;
}

// Every direction at which the count can change: normals of offsets.
inline std::vector<Point> breakpoints(const std::vector<Point>& offsets) {
  std::vector<Point> out;
  for (Point k : offsets) {
    if (k.x == 0 && k.y == 0) continue;
    const std::int64_t g = std::gcd(k.x, k.y);
    out.push_back({-k.y / g, k.x / g});
    out.push_back({k.y / g, -k.x / g});
  }
  return out;
}

// 1 + min over a dense angular grid plus all exact breakpoints.
inline int grid_threshold(const std::vector<Point>& offsets) {
  const std::size_t samples = std::max<std::size_t>(8 * offsets.size() * offsets.size(), 4096);
  std::int64_t best = static_cast<std::int64_t>(offsets.size());
  for (std::size_t j = 0; j < samples; ++j) {
    const double a = (static_cast<double>(j) + 0.5) * 2 * M_PI / static_cast<double>(samples);
    best = std::min(best, negative_count(offsets, std::cos(a), std::sin(a)));
  }
  for (Point u : breakpoints(offsets)) best = std::min(best, negative_count(offsets, u));
  return static_cast<int>(best + 1);
}

// Rational stable directions with coordinates up to `bound`, and whether any
// sample of the dense grid between breakpoints is stable (a stable arc).
struct StableScan {
  std::set<Point> directions;
  bool arc{false};
};

inline StableScan scan_stable(const std::vector<Point>& offsets, int r, std::int64_t bound) {
  StableScan out;
  for (std::int64_t x = -bound; x <= bound; ++x) {
    for (std::int64_t y = -bound; y <= bound; ++y) {
      if (std::gcd(x, y) != 1) continue;
      if (negative_count(offsets, Point{x, y}) < r) out.directions.insert({x, y});
    }
  }
  const std::size_t samples = std::max<std::size_t>(8 * offsets.size() * offsets.size(), 4096);
  for (std::size_t j = 0; j < samples && !out.arc; ++j) {
    const double a = (static_cast<double>(j) + 0.5) * 2 * M_PI / static_cast<double>(samples);
    const double ux = std::cos(a), uy = std::sin(a);
    // skip samples too close to a breakpoint to be decided in floating point
    bool near = false;
    for (Point k : offsets) {
      if (std::abs(static_cast<double>(k.x) * ux + static_cast<double>(k.y) * uy) < 1e-9) near = true;
    }
    if (!near && negative_count(offsets, ux, uy) < r) out.arc = true;
  }
  return out;
}

// ---- droplets -------------------------------------------------------------

// Normals in radii order: right, up, left, down, up-right, down-left.
inline const Point kNormals[6] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {1, 1}, {-1, -1}};

inline std::set<Point> droplet_points(int dirs, const std::array<std::int64_t, 6>& l, std::int64_t box) {
  std::set<Point> out;
  for (std::int64_t x = -box; x <= box; ++x) {
    for (std::int64_t y = -box; y <= box; ++y) {
      bool in = true;
      for (int i = 0; i < dirs && in; ++i) in = x * kNormals[i].x + y * kNormals[i].y <= l[static_cast<std::size_t>(i)];
      if (in) out.insert({x, y});
    }
  }
  return out;
}

// Lowers each radius one step at a time while the point set stays the same.
inline std::array<std::int64_t, 6> minimise_radii(int dirs, std::array<std::int64_t, 6> l, std::int64_t box) {
  const auto target = droplet_points(dirs, l, box);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < dirs; ++i) {
      auto trial = l;
      --trial[static_cast<std::size_t>(i)];
      if (droplet_points(dirs, trial, box) == target) {
        l = trial;
        changed = true;
      }
    }
  }
  return l;
}

// Inclusion-minimal droplet holding `base` and x: among radii raised by at
// most `max_step` per direction, the one with the fewest points.
inline std::set<Point> smallest_droplet_search(int dirs, const std::array<std::int64_t, 6>& base, Point x,
                                               std::int64_t max_step, std::int64_t box) {
  const auto base_pts = droplet_points(dirs, base, box);
  std::optional<std::set<Point>> best;
  std::array<std::int64_t, 6> inc{};
  while (true) {
    std::array<std::int64_t, 6> l = base;
    for (int i = 0; i < dirs; ++i) l[static_cast<std::size_t>(i)] += inc[static_cast<std::size_t>(i)];
    auto pts = droplet_points(dirs, l, box);
    if (pts.count(x) && std::includes(pts.begin(), pts.end(), base_pts.begin(), base_pts.end())) {
      if (!best || pts.size() < best->size()) best = std::move(pts);
    }
    int i = 0;
    while (i < dirs && inc[static_cast<std::size_t>(i)] == max_step) inc[static_cast<std::size_t>(i++)] = 0;
    if (i == dirs) break;
    ++inc[static_cast<std::size_t>(i)];
  }
  return best.value_or(std::set<Point>{});
}

// ---- polygons -------------------------------------------------------------

struct HalfPlane {
  Point u;
  std::int64_t m;  // <x, u> <= m
};

struct Vec2 {
  double x, y;
};

// Vertices of the intersection of half-planes: pairwise line intersections
// that satisfy every constraint, deduplicated, in convex-hull order.
inline std::vector<Vec2> polygon_vertices(const std::vector<HalfPlane>& hs) {
  std::vector<Vec2> pts;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    for (std::size_t j = i + 1; j < hs.size(); ++j) {
      const double a1 = static_cast<double>(hs[i].u.x), b1 = static_cast<double>(hs[i].u.y);
      const double a2 = static_cast<double>(hs[j].u.x), b2 = static_cast<double>(hs[j].u.y);
      const double det = a1 * b2 - a2 * b1;
      if (det == 0) continue;
      const double c1 = static_cast<double>(hs[i].m), c2 = static_cast<double>(hs[j].m);
      const Vec2 p{(c1 * b2 - c2 * b1) / det, (a1 * c2 - a2 * c1) / det};
      bool ok = true;
      for (const auto& h : hs) {
        if (p.x * static_cast<double>(h.u.x) + p.y * static_cast<double>(h.u.y) > static_cast<double>(h.m) + 1e-9) {
          ok = false;
          break;
        }
      }
      if (ok) pts.push_back(p);
    }
  }
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](Vec2 a, Vec2 b) { return std::abs(a.x - b.x) < 1e-9 && std::abs(a.y - b.y) < 1e-9; }),
            pts.end());
  if (pts.size() < 3) return pts;
  // Andrew's monotone chain
  auto turn = [](Vec2 o, Vec2 a, Vec2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); };
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && turn(hull[k - 2], hull[k - 1], pts[i]) <= 1e-12) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && turn(hull[k - 2], hull[k - 1], pts[i - 1]) <= 1e-12) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

// Length of the face of the polygon on the line <x, u> = m: distance between
// the extreme hull vertices lying on that line, 0 if fewer than two do.
inline double face_length(const std::vector<HalfPlane>& hs, Point u) {
  const auto verts = polygon_vertices(hs);
  std::int64_t m = 0;
  for (const auto& h : hs) {
    if (h.u == u) m = h.m;
  }
  std::vector<Vec2> on;
  const double nu = std::sqrt(static_cast<double>(u.x * u.x + u.y * u.y));
  for (Vec2 v : verts) {
    if (std::abs(v.x * static_cast<double>(u.x) + v.y * static_cast<double>(u.y) - static_cast<double>(m)) / nu < 1e-7) {
      on.push_back(v);
    }
  }
  double best = 0;
  for (Vec2 a : on) {
    for (Vec2 b : on) best = std::max(best, std::hypot(a.x - b.x, a.y - b.y));
  }
  return best;
}

inline bool satisfies(const std::vector<HalfPlane>& hs, Point p) {
  for (const auto& h : hs) {
    if (p.x * h.u.x + p.y * h.u.y > h.m) return false;
  }
  return true;
}

inline std::size_t lattice_count(const std::vector<HalfPlane>& hs, std::int64_t box) {
  std::size_t c = 0;
  for (std::int64_t x = -box; x <= box; ++x) {
    for (std::int64_t y = -box; y <= box; ++y) c += satisfies(hs, {x, y}) ? 1 : 0;
  }
  return c;
}

// Smallest level above the current offset of v at which a lattice point of
// [-box, box]^2 satisfies every other constraint.
inline std::optional<std::int64_t> slab_scan(const std::vector<HalfPlane>& hs, Point v, std::int64_t box) {
  std::int64_t current = 0;
  std::vector<HalfPlane> others;
  for (const auto& h : hs) {
    if (h.u == v) {
      current = h.m;
    } else {
      others.push_back(h);
    }
  }
  std::optional<std::int64_t> best;
  for (std::int64_t x = -box; x <= box; ++x) {
    for (std::int64_t y = -box; y <= box; ++y) {
      const std::int64_t level = x * v.x + y * v.y;
      if (level <= current || !satisfies(others, {x, y})) continue;
      if (!best || level < *best) best = level;
    }
  }
  return best;
}

}  // namespace oracle
