#pragma once

// Droplets bounded by quasi-stable directions: half-plane intersections
// {x : <x, u> <= m_u} with primitive integer normals u and integer offsets,
// their sides, u-extensions and the extension algorithm.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "bperc/dynamics.hpp"
#include "bperc/geometry.hpp"
#include "bperc/lattice.hpp"
#include "bperc/rational.hpp"

namespace bperc {

namespace detail {

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}
inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

// Returns (g, s, t) with a s + b t = g = gcd(a, b).
inline std::array<std::int64_t, 3> ext_gcd(std::int64_t a, std::int64_t b) {
  std::int64_t old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
  while (r != 0) {
    const std::int64_t q = old_r / r;
    std::tie(old_r, r) = std::make_pair(r, old_r - q * r);
    std::tie(old_s, s) = std::make_pair(s, old_s - q * s);
    std::tie(old_t, t) = std::make_pair(t, old_t - q * t);
  }
  if (old_r < 0) return {-old_r, -old_s, -old_t};
  return {old_r, old_s, old_t};
}

}  // namespace detail

// A rational point of the plane.
struct RationalPoint {
  Rational x;
  Rational y;
  friend bool operator==(const RationalPoint&, const RationalPoint&) = default;
};

class QuasiDroplet {
 public:
  using Constraints = std::map<Direction, std::int64_t, AngleLess>;

  QuasiDroplet() = default;
  explicit QuasiDroplet(Constraints c) : constraints_(std::move(c)) { refresh(); }

  // Convex polygon with outward normals q (angular order) and integer edge
  // vectors k_u * rotate90(u), starting at `start`. Opposite directions must
  // carry equal multiples so that the boundary closes.
  static QuasiDroplet from_edge_multiples(std::span<const Direction> q, std::span<const std::int64_t> multiples,
                                          Point start = {0, 0}) {
    if (q.size() != multiples.size()) throw std::invalid_argument("one multiple per direction");
    std::vector<std::size_t> order(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return angle_less(q[a].vec(), q[b].vec()); });
    Constraints c;
    Point p = start;
    for (auto i : order) {
      c.emplace(q[i], dot(p, q[i].vec()));
      p = p + rotate90(q[i].vec()) * multiples[i];
    }
    if (p != start) throw std::invalid_argument("edge multiples do not close the polygon");
    return QuasiDroplet(std::move(c));
  }

  const Constraints& constraints() const { return constraints_; }
  std::optional<std::int64_t> offset(const Direction& u) const {
    const auto it = constraints_.find(u);
    if (it == constraints_.end()) return std::nullopt;
    return it->second;
  }
  QuasiDroplet with_offset(const Direction& u, std::int64_t m) const {
    QuasiDroplet out = *this;
    out.constraints_[u] = m;
    out.refresh();
    return out;
  }
  QuasiDroplet without(const Direction& u) const {
    QuasiDroplet out = *this;
    out.constraints_.erase(u);
    out.refresh();
    return out;
  }

  bool contains(Point x) const {
    return std::all_of(constraints_.begin(), constraints_.end(),
                       [&](const auto& c) { return dot(x, c.first.vec()) <= c.second; });
  }

  // t-range of the line {<x, u> = level} (parametrised as level*u/|u|^2 +
  // t*rotate90(u)) inside every constraint except u's own. Empty optional:
  // the line misses the polygon. Missing bounds mean unbounded.
  struct LineRange {
    std::optional<Rational> lo;
    std::optional<Rational> hi;
  };
  std::optional<LineRange> line_range(const Direction& u, const Rational& level) const {
    // Bounds are kept as unreduced fractions num/den (den > 0) and compared
    // by cross-multiplication; only the two survivors are reduced.
    struct Frac {
      std::int64_t num, den;
      bool operator<(const Frac& o) const {
        return static_cast<__int128>(num) * o.den < static_cast<__int128>(o.num) * den;
      }
    };
    constexpr __int128 kMax = INT64_MAX;
    const Point uv = u.vec();
    const std::int64_t n2 = norm2(uv);
    std::optional<Frac> lo, hi;
    for (const auto& [v, mv] : constraints_) {
      if (v == u) continue;
      const Point vv = v.vec();
      const std::int64_t c = cross(uv, vv);
      // <p0, v> = level <u, v> / |u|^2 ; t c <= m_v - <p0, v>
      __int128 num = static_cast<__int128>(mv) * n2 * level.den() - static_cast<__int128>(level.num()) * dot(uv, vv);
      if (c == 0) {
        if (num < 0) return std::nullopt;
        continue;
      }
      __int128 den = static_cast<__int128>(n2) * level.den() * c;
      if (den < 0) {
        num = -num;
        den = -den;
      }
      if (num > kMax || num < -kMax || den > kMax) throw std::overflow_error("line range overflow");
      const Frac bound{static_cast<std::int64_t>(num), static_cast<std::int64_t>(den)};
      if (c > 0) {
        if (!hi || bound < *hi) hi = bound;
      } else {
        if (!lo || *lo < bound) lo = bound;
      }
    }
    if (lo && hi && *hi < *lo) return std::nullopt;
    LineRange out;
    if (lo) out.lo = Rational(lo->num, lo->den);
    if (hi) out.hi = Rational(hi->num, hi->den);
    return out;
  }

  static RationalPoint point_on_line(const Direction& u, const Rational& level, const Rational& t) {
    const Point uv = u.vec();
    const Rational base = level / Rational(norm2(uv));
    const Point d = rotate90(uv);
    return {base * Rational(uv.x) + t * Rational(d.x), base * Rational(uv.y) + t * Rational(d.y)};
  }

  // Vertices of the continuum polygon (bounded case). Throws when some
  // touching face is unbounded.
  const std::vector<RationalPoint>& vertices() const {
    if (!bounded_) throw std::domain_error("quasi-droplet is unbounded");
    return vertices_;
  }

  bool continuum_empty() const { return vertices().empty(); }

  // sup <x, u> over the continuum polygon.
  Rational support(const Direction& u) const {
    const auto& vs = vertices();
    if (vs.empty()) throw std::domain_error("support of an empty quasi-droplet");
    Rational best = vs.front().x * Rational(u.x()) + vs.front().y * Rational(u.y());
    for (const auto& p : vs) best = std::max(best, p.x * Rational(u.x()) + p.y * Rational(u.y()));
    return best;
  }

  // The u-side: the face of the polygon on its supporting line with normal u.
  // Returns the squared Euclidean length, exactly. A slack constraint (its
  // line misses the polygon) has a one-point side.
  Rational side_length_squared(const Direction& u) const {
    std::optional<LineRange> range;
    if (const auto m = offset(u)) {
      range = line_range(u, Rational(*m));
      if (!range) {
        if (continuum_empty()) throw std::domain_error("side of an empty quasi-droplet");
        return Rational(0);
      }
    } else {
      range = line_range(u, support(u));
    }
    if (!range || !range->lo || !range->hi) throw std::domain_error("u-side undefined");
    const Rational span = *range->hi - *range->lo;
    return span * span * Rational(norm2(u.vec()));
  }
  double side_length(const Direction& u) const { return std::sqrt(side_length_squared(u).to_double()); }
  bool side_at_least(const Direction& u, std::int64_t length) const {
    return side_length_squared(u) >= Rational(length) * Rational(length);
  }

  // Integer bounding box [xmin, xmax] x [ymin, ymax] of the polygon.
  std::array<std::int64_t, 4> bounding_box() const {
    const auto& vs = vertices();
    if (vs.empty()) throw std::domain_error("bounding box of an empty quasi-droplet");
    return box_of(vs);
  }
  static std::array<std::int64_t, 4> box_of(const std::vector<RationalPoint>& vs) {
    Rational x0 = vs[0].x, x1 = vs[0].x, y0 = vs[0].y, y1 = vs[0].y;
    for (const auto& p : vs) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
    return {x0.ceil(), x1.floor(), y0.ceil(), y1.floor()};
  }

  // Euclidean diameter of the continuum polygon.
  double diameter() const {
    const auto& vs = vertices();
    double best = 0;
    for (const auto& a : vs)
      for (const auto& b : vs) best = std::max(best, std::hypot((a.x - b.x).to_double(), (a.y - b.y).to_double()));
    return best;
  }

  // Lattice points of row y satisfying every constraint, as [lo, hi]
  // (empty when lo > hi).
  std::pair<std::int64_t, std::int64_t> row_range(std::int64_t y, std::int64_t lo, std::int64_t hi) const {
    for (const auto& [u, m] : constraints_) {
      const std::int64_t rhs = m - u.y() * y;
      if (u.x() > 0) {
        hi = std::min(hi, detail::floor_div(rhs, u.x()));
      } else if (u.x() < 0) {
        lo = std::max(lo, detail::ceil_div(rhs, u.x()));
      } else if (rhs < 0) {
        lo = hi + 1;
      }
    }
    return {lo, hi};
  }

  // Calls f(y, lo, hi) for each row of the bounding box holding lattice
  // points, bottom to top.
  template <typename F>
  void for_each_row(F&& f) const {
    const auto& vs = vertices();
    if (vs.empty()) return;
    const auto box = box_of(vs);
    for (std::int64_t y = box[2]; y <= box[3]; ++y) {
      const auto [lo, hi] = row_range(y, box[0], box[1]);
      if (lo <= hi) f(y, lo, hi);
    }
  }

  std::vector<Point> lattice_points() const {
    std::vector<Point> out;
    for_each_row([&](std::int64_t y, std::int64_t lo, std::int64_t hi) {
      for (std::int64_t x = lo; x <= hi; ++x) out.push_back({x, y});
    });
    return out;
  }
  std::size_t lattice_count() const {
    std::size_t n = 0;
    for_each_row([&](std::int64_t, std::int64_t lo, std::int64_t hi) { n += static_cast<std::size_t>(hi - lo + 1); });
    return n;
  }

  // Lattice points on the line <x, u> = level satisfying every other
  // constraint.
  std::vector<Point> lattice_points_on_level(const Direction& u, std::int64_t level) const {
    const auto [g, s, t] = detail::ext_gcd(u.x(), u.y());
    (void)g;
    const Point x0{level * s, level * t};
    const Point step = rotate90(u.vec());
    std::optional<std::int64_t> klo, khi;
    for (const auto& [v, mv] : constraints_) {
      if (v == u) continue;
      const std::int64_t c = dot(step, v.vec());
      const std::int64_t slack = mv - dot(x0, v.vec());
      if (c == 0) {
        if (slack < 0) return {};
        continue;
      }
      if (c > 0) {
        const std::int64_t b = detail::floor_div(slack, c);
        khi = khi ? std::min(*khi, b) : b;
      } else {
        const std::int64_t b = detail::ceil_div(slack, c);
        klo = klo ? std::max(*klo, b) : b;
      }
    }
    if (!klo || !khi) throw std::domain_error("unbounded level set");
    std::vector<Point> out;
    for (std::int64_t k = *klo; k <= *khi; ++k) out.push_back(x0 + step * k);
    return out;
  }

  friend bool operator==(const QuasiDroplet& a, const QuasiDroplet& b) { return a.constraints_ == b.constraints_; }

 private:
  // Every query reads the vertices, so they are found once per droplet.
  void refresh() {
    vertices_.clear();
    bounded_ = true;
    for (const auto& [u, m] : constraints_) {
      const auto range = line_range(u, Rational(m));
      if (!range) continue;
      if (!range->lo || !range->hi) {
        vertices_.clear();
        bounded_ = false;
        return;
      }
      for (const Rational& t : {*range->lo, *range->hi}) {
        const RationalPoint p = point_on_line(u, Rational(m), t);
        if (std::find(vertices_.begin(), vertices_.end(), p) == vertices_.end()) vertices_.push_back(p);
      }
    }
  }

  Constraints constraints_;
  std::vector<RationalPoint> vertices_;
  bool bounded_{true};
};

inline double quasi_side_length(const QuasiDroplet& qd, const Direction& u) {
  if (!qd.offset(u)) throw std::invalid_argument("direction is not a constraint of the droplet");
  if (qd.continuum_empty()) throw std::domain_error("side of an empty quasi-droplet");
  return qd.side_length(u);
}

// Largest level searched by u_extension beyond the current offset when the
// droplet without the v-constraint is unbounded in direction v.
inline constexpr std::int64_t kExtensionSearchLimit = 1 << 20;

// Raises m_v to the smallest value above the current one whose new slab
// holds a lattice point of the droplet; other constraints stay.
inline QuasiDroplet u_extension(const QuasiDroplet& qd, const Direction& v) {
  const auto current = qd.offset(v);
  if (!current) throw std::invalid_argument("direction is not a constraint of the droplet");
  std::int64_t limit = *current + kExtensionSearchLimit;
  try {
    limit = std::min(limit, qd.without(v).support(v).floor());
  } catch (const std::domain_error&) {
  }
  for (std::int64_t level = *current + 1; level <= limit; ++level) {
    if (!qd.lattice_points_on_level(v, level).empty()) return qd.with_offset(v, level);
  }
  throw std::runtime_error("u-extension in direction " + to_string(v.vec()) +
                           " found no lattice point: degenerate droplet");
}

// Integer rounding of the constant C: bars are ceil(C^(1/3)), ceil(C^(1/2))
// for non-degeneracy and ceil(2 C^(1/3)), ceil(2 C^(1/2)) for extensions.
class ExtensionParams {
 public:
  ExtensionParams(std::int64_t big_c, const Neighbourhood& nbhd) : c_(big_c) {
    if (big_c < 1) throw ConfigError("C must be positive");
    // C^(1/3) >= |K|  <=>  C^2 >= |K|^6
    const __int128 lhs = static_cast<__int128>(big_c) * big_c;
    const __int128 n2 = nbhd.radius_norm2();
    if (lhs < n2 * n2 * n2) throw ConfigError("C too small: need C^(1/3) >= neighbourhood radius");
    nd_unstable_ = ceil_root(big_c, 3);
    nd_stable_ = ceil_root(big_c, 2);
    ext_unstable_ = ceil_root(8 * big_c, 3);
    ext_stable_ = ceil_root(4 * big_c, 2);
  }

  std::int64_t big_c() const { return c_; }
  std::int64_t nondegenerate_unstable() const { return nd_unstable_; }
  std::int64_t nondegenerate_stable() const { return nd_stable_; }
  std::int64_t extend_unstable() const { return ext_unstable_; }
  std::int64_t extend_stable() const { return ext_stable_; }

  // Smallest k >= 0 with k^p >= v.
  static std::int64_t ceil_root(std::int64_t v, int p) {
    std::int64_t k = static_cast<std::int64_t>(std::pow(static_cast<double>(v), 1.0 / p));
    auto pw = [p](std::int64_t b) {
      __int128 acc = 1;
      for (int i = 0; i < p; ++i) acc *= b;
      return acc;
    };
    while (k > 0 && pw(k - 1) >= v) --k;
    while (pw(k) < v) ++k;
    return k;
  }

 private:
  std::int64_t c_;
  std::int64_t nd_unstable_{0}, nd_stable_{0}, ext_unstable_{0}, ext_stable_{0};
};

// Quasi-stable directions of scale s together with a model (K, r) and its
// stable directions, which must be among them.
struct QuasiModel {
  Neighbourhood nbhd;
  std::int64_t s;
  std::vector<Direction> quasi_stable;
  std::vector<Direction> stable;

  QuasiModel(Neighbourhood n, std::int64_t scale) : nbhd(std::move(n)), s(scale), quasi_stable(quasi_stable_directions(scale)) {
    const auto rep = stability_report(nbhd);
    const auto finite = rep.finite_stable_set();
    if (!finite) throw ConfigError("model has stable arcs; quasi-droplets need finitely many stable directions");
    stable = *finite;
    for (const auto& u : stable) {
      if (std::find(quasi_stable.begin(), quasi_stable.end(), u) == quasi_stable.end()) {
        throw ConfigError("stable direction " + to_string(u.vec()) + " is not quasi-stable at this scale");
      }
    }
  }

  bool is_stable(const Direction& u) const { return std::find(stable.begin(), stable.end(), u) != stable.end(); }
};

// Every direction of Q carries a constraint and every side is long enough:
// at least ceil(C^(1/2)) for stable directions, ceil(C^(1/3)) otherwise.
inline bool is_non_degenerate(const QuasiDroplet& qd, const QuasiModel& model, const ExtensionParams& params) {
  if (qd.constraints().size() != model.quasi_stable.size()) return false;
  for (const auto& u : model.quasi_stable) {
    if (!qd.offset(u)) return false;
  }
  if (qd.continuum_empty()) return false;
  for (const auto& u : model.quasi_stable) {
    const std::int64_t bar = model.is_stable(u) ? params.nondegenerate_stable() : params.nondegenerate_unstable();
    if (!qd.side_at_least(u, bar)) return false;
  }
  return true;
}

// A cube C = k^3 with k the larger of the neighbourhood radius and one more
// than twice the longest quasi-stable direction. One extension shortens the
// extended side by less than |u-| + |u+| for its angular neighbours u-, u+,
// so sides of length >= 2 C^(1/3) stay above C^(1/3).
inline std::int64_t default_big_c(const QuasiModel& model) {
  std::int64_t longest2 = 0;
  for (const auto& u : model.quasi_stable) longest2 = std::max(longest2, u.vec().x * u.vec().x + u.vec().y * u.vec().y);
  std::int64_t k = model.nbhd.ceil_radius();
  while (k * k < 4 * longest2) ++k;
  ++k;
  return k * k * k;
}

// Random non-degenerate quasi-droplet: each pair of opposite directions gets
// the same edge multiple, drawn from the smallest one meeting its side bar up
// to `spread` more. Centred near the origin.
inline QuasiDroplet random_quasi_droplet(const QuasiModel& model, const ExtensionParams& params, Xoshiro256ss& rng,
                                         std::int64_t spread = 4) {
  const auto& q = model.quasi_stable;
  std::vector<std::int64_t> mult(q.size(), 0);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Point u = q[i].vec();
    if (angular_half(u) != 0) continue;  // the opposite direction copies it below
    const std::int64_t bar = model.is_stable(q[i]) ? params.nondegenerate_stable() : params.nondegenerate_unstable();
    const std::int64_t n2 = norm2(u);
    std::int64_t k = 1;
    while (k * k * n2 < bar * bar) ++k;
    k += static_cast<std::int64_t>(rng.bounded(static_cast<std::uint64_t>(spread + 1)));
    mult[i] = k;
    const auto opp = std::find(q.begin(), q.end(), q[i].opposite());
    mult[static_cast<std::size_t>(opp - q.begin())] = k;
  }
  QuasiDroplet qd = QuasiDroplet::from_edge_multiples(q, mult);
  // Recentre so that the bounding box straddles the origin.
  const auto box = qd.bounding_box();
  const Point shift{-(box[0] + box[1]) / 2, -(box[2] + box[3]) / 2};
  QuasiDroplet::Constraints c;
  for (const auto& [u, m] : qd.constraints()) c.emplace(u, m + dot(shift, u.vec()));
  return QuasiDroplet(std::move(c));
}

// Lattice points of `grown` that are not in `base`.
inline std::vector<Point> new_lattice_points(const QuasiDroplet& base, const QuasiDroplet& grown) {
  std::vector<Point> out;
  grown.for_each_row([&](std::int64_t y, std::int64_t lo, std::int64_t hi) {
    // rows of a convex set are intervals
    const auto [blo, bhi] = base.row_range(y, lo, hi);
    if (blo > bhi) {
      for (std::int64_t x = lo; x <= hi; ++x) out.push_back({x, y});
      return;
    }
    for (std::int64_t x = lo; x < blo; ++x) out.push_back({x, y});
    for (std::int64_t x = bhi + 1; x <= hi; ++x) out.push_back({x, y});
  });
  return out;
}

// Lattice points added by raising the v-constraint of `base` to `level`,
// enumerated level by level.
inline std::vector<Point> slab_points(const QuasiDroplet& base, const Direction& v, std::int64_t level) {
  const auto current = base.offset(v);
  if (!current) throw std::invalid_argument("direction is not a constraint of the droplet");
  std::vector<Point> out;
  for (std::int64_t l = *current + 1; l <= level; ++l) {
    for (Point p : base.lattice_points_on_level(v, l)) out.push_back(p);
  }
  return out;
}

// [D ∪ extra]_{D' \ D} ⊇ D' ∩ Z^2 for the v-extension D' of D, checked on
// the finite slab D' \ D.
inline bool extension_self_fills(const QuasiDroplet& base, const Direction& v, std::int64_t new_level,
                                 const Neighbourhood& nbhd, std::optional<Point> extra = std::nullopt) {
  const std::vector<Point> slab = slab_points(base, v, new_level);
  const auto filled = restricted_closure_plane(nbhd, slab, [&](Point p) {
    return base.contains(p) || (extra && p == *extra);
  });
  return filled.size() == slab.size();
}

enum class ExtensionKind { unstable, stable };
enum class Termination { stalled, left_region, step_limit };

inline const char* termination_name(Termination t) {
  switch (t) {
    case Termination::stalled: return "stalled";
    case Termination::left_region: return "left_region";
    case Termination::step_limit: return "step_limit";
  }
  return "?";
}

struct ExtensionStep {
  Direction direction{1, 0};
  ExtensionKind kind{ExtensionKind::unstable};
  std::optional<Point> witness;  // site of A' used by a stable extension
};

struct ExtensionTrace {
  std::vector<QuasiDroplet> droplets;  // droplets[0] is the input
  std::vector<ExtensionStep> steps;    // steps[i] turns droplets[i] into droplets[i + 1]
  Termination termination{Termination::stalled};
};

// Membership in A'. The current droplet is passed so that callers may answer
// from a closure that grows along with the trace; a fixed set ignores it.
using APrimeQuery = std::function<bool(Point, const QuasiDroplet&)>;

inline APrimeQuery fixed_a_prime(std::function<bool(Point)> set) {
  return [set = std::move(set)](Point p, const QuasiDroplet&) { return set(p); };
}

struct ExtensionOptions {
  // The droplet must stay inside [-stop_radius, stop_radius]^2.
  std::int64_t stop_radius{1 << 20};
  std::size_t max_steps{100000};
};

// Unstable extension of the first (by angle from (1, 0)) non-stable direction
// whose side is at least ceil(2 C^(1/3)); otherwise a stable extension of the
// first stable direction with side at least ceil(2 C^(1/2)) that has a
// witness x ∈ A' ∩ ((new sites + K) \ D); otherwise stop.
inline ExtensionTrace extension_algorithm(const QuasiDroplet& start, const QuasiModel& model, const APrimeQuery& a_prime,
                                          const ExtensionParams& params, const ExtensionOptions& options = {}) {
  if (!is_non_degenerate(start, model, params)) throw std::invalid_argument("extension algorithm needs a non-degenerate droplet");
  ExtensionTrace trace;
  trace.droplets.push_back(start);
  auto inside_stop = [&](const QuasiDroplet& d) {
    const auto box = d.bounding_box();
    return box[0] >= -options.stop_radius && box[1] <= options.stop_radius && box[2] >= -options.stop_radius &&
           box[3] <= options.stop_radius;
  };
  while (true) {
    if (trace.steps.size() >= options.max_steps) {
      trace.termination = Termination::step_limit;
      return trace;
    }
    const QuasiDroplet& d = trace.droplets.back();
    std::optional<QuasiDroplet> next;
    ExtensionStep step;
    for (const auto& u : model.quasi_stable) {
      if (model.is_stable(u) || !d.side_at_least(u, params.extend_unstable())) continue;
      next = u_extension(d, u);
      step = {u, ExtensionKind::unstable, std::nullopt};
      break;
    }
    if (!next) {
      for (const auto& u : model.stable) {
        if (!d.side_at_least(u, params.extend_stable())) continue;
        QuasiDroplet grown = u_extension(d, u);
        std::optional<Point> witness;
        for (Point y : slab_points(d, u, *grown.offset(u))) {
          for (Point k : model.nbhd.offsets()) {
            const Point x = y + k;
            if (!d.contains(x) && a_prime(x, d)) {
              witness = x;
              break;
            }
          }
          if (witness) break;
        }
        if (witness) {
          next = std::move(grown);
          step = {u, ExtensionKind::stable, witness};
          break;
        }
      }
    }
    if (!next) {
      trace.termination = Termination::stalled;
      return trace;
    }
    trace.droplets.push_back(std::move(*next));
    trace.steps.push_back(step);
    if (!inside_stop(trace.droplets.back())) {
      trace.termination = Termination::left_region;
      return trace;
    }
  }
}

}  // namespace bperc
