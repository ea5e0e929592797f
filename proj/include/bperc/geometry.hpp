#pragma once

// Neighbourhoods, critical thresholds and the exact angular geometry of
// stable and quasi-stable directions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bperc/lattice.hpp"
#include "bperc/rational.hpp"

namespace bperc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class NamedModel { square, triangular, boxtimes, diamond, square4 };

inline const char* model_name(NamedModel m) {
  switch (m) {
    case NamedModel::square: return "square";
    case NamedModel::triangular: return "triangular";
    case NamedModel::boxtimes: return "boxtimes";
    case NamedModel::diamond: return "diamond";
    case NamedModel::square4: return "square4";
  }
  return "?";
}

inline std::optional<NamedModel> parse_model_name(std::string_view name) {
  for (auto m : {NamedModel::square, NamedModel::triangular, NamedModel::boxtimes, NamedModel::diamond,
                 NamedModel::square4}) {
    if (name == model_name(m)) return m;
  }
  return std::nullopt;
}

// Lattice points of s*K where K is the l^p unit ball rescaled so that its
// largest Euclidean norm is 1. `p` empty means p = infinity.
struct LpBall {
  std::optional<Rational> p;
  Rational s{1};
};

struct ExplicitOffsets {
  std::vector<Point> offsets;
};

struct NeighbourhoodSpec {
  std::variant<NamedModel, LpBall, ExplicitOffsets> kind{NamedModel::square};
  // Empty means the critical threshold r_s.
  std::optional<int> threshold;

  static NeighbourhoodSpec named(NamedModel m) { return {m, std::nullopt}; }
  static NeighbourhoodSpec lp_ball(std::optional<Rational> p, Rational s, std::optional<int> r = {}) {
    return {LpBall{p, s}, r};
  }
  static NeighbourhoodSpec explicit_offsets(std::vector<Point> offsets, std::optional<int> r = {}) {
    return {ExplicitOffsets{std::move(offsets)}, r};
  }

  // Compact identifier: "square", "lp2_s8", "lpinf_s9/2_r30", "explicit5_r2".
  std::string id() const {
    std::string out;
    if (const auto* m = std::get_if<NamedModel>(&kind)) {
      out = model_name(*m);
    } else if (const auto* b = std::get_if<LpBall>(&kind)) {
      out = "lp" + (b->p ? b->p->str() : std::string("inf")) + "_s" + b->s.str();
    } else {
      out = "explicit" + std::to_string(std::get<ExplicitOffsets>(kind).offsets.size());
    }
    if (threshold) out += "_r" + std::to_string(*threshold);
    return out;
  }

  friend bool operator==(const NeighbourhoodSpec& a, const NeighbourhoodSpec& b) {
    if (a.threshold != b.threshold || a.kind.index() != b.kind.index()) return false;
    if (const auto* m = std::get_if<NamedModel>(&a.kind)) return *m == std::get<NamedModel>(b.kind);
    if (const auto* l = std::get_if<LpBall>(&a.kind)) {
      const auto& o = std::get<LpBall>(b.kind);
      return l->p == o.p && l->s == o.s;
    }
    return std::get<ExplicitOffsets>(a.kind).offsets == std::get<ExplicitOffsets>(b.kind).offsets;
  }
};

// Inverse of NeighbourhoodSpec::id() for named models and lp balls.
inline NeighbourhoodSpec parse_model_id(std::string_view id) {
  std::optional<int> r;
  std::string body(id);
  if (const auto pos = body.find("_r"); pos != std::string::npos) {
    try {
      r = std::stoi(body.substr(pos + 2));
    } catch (const std::exception&) {
      throw ConfigError("bad threshold suffix in model id '" + std::string(id) + "'");
    }
    body = body.substr(0, pos);
  }
  if (auto m = parse_model_name(body)) return {*m, r};
  if (body.rfind("lp", 0) == 0) {
    const auto us = body.find("_s");
    if (us == std::string::npos) throw ConfigError("lp model id needs _s<scale>: '" + std::string(id) + "'");
    const std::string p = body.substr(2, us - 2);
    try {
      std::optional<Rational> pr;
      if (p != "inf") pr = Rational::parse(p);
      return {LpBall{pr, Rational::parse(body.substr(us + 2))}, r};
    } catch (const std::invalid_argument& e) {
      throw ConfigError("bad lp model id '" + std::string(id) + "': " + e.what());
    }
  }
  throw ConfigError("unknown model '" + std::string(id) + "'");
}

// A finite offset set K (sorted lexicographically, duplicates removed) with
// threshold r. Immutable once built.
class Neighbourhood {
 public:
  Neighbourhood(std::vector<Point> offsets, int threshold, std::string id)
      : offsets_(std::move(offsets)), threshold_(threshold), id_(std::move(id)) {
    std::sort(offsets_.begin(), offsets_.end());
    offsets_.erase(std::unique(offsets_.begin(), offsets_.end()), offsets_.end());
    if (offsets_.empty()) throw ConfigError("neighbourhood has no offsets");
    if (threshold_ < 2) throw ConfigError("threshold must be at least 2");
    if (static_cast<std::size_t>(threshold_) > offsets_.size()) {
      throw ConfigError("threshold " + std::to_string(threshold_) + " exceeds neighbourhood size " +
                        std::to_string(offsets_.size()));
    }
    for (const Point& k : offsets_) {
      max_norm2_ = std::max(max_norm2_, norm2(k));
      max_coord_ = std::max({max_coord_, std::abs(k.x), std::abs(k.y)});
    }
  }

  std::span<const Point> offsets() const { return offsets_; }
  std::size_t size() const { return offsets_.size(); }
  int threshold() const { return threshold_; }
  const std::string& id() const { return id_; }

  // Largest Euclidean norm of an offset.
  double radius() const { return std::sqrt(static_cast<double>(max_norm2_)); }
  std::int64_t radius_norm2() const { return max_norm2_; }
  // ceil(radius()), exact.
  std::int64_t ceil_radius() const {
    std::int64_t c = static_cast<std::int64_t>(std::sqrt(static_cast<double>(max_norm2_)));
    while (c * c < max_norm2_) ++c;
    while (c > 0 && (c - 1) * (c - 1) >= max_norm2_) --c;
    return c;
  }
  // Largest |coordinate| of an offset (the l^inf radius).
  std::int64_t max_coordinate() const { return max_coord_; }

  bool contains(Point k) const { return std::binary_search(offsets_.begin(), offsets_.end(), k); }

 private:
  std::vector<Point> offsets_;
  int threshold_;
  std::string id_;
  std::int64_t max_norm2_{0};
  std::int64_t max_coord_{0};
};

namespace detail {

inline bool checked_mul(__int128 a, __int128 b, __int128& out) { return !__builtin_mul_overflow(a, b, &out); }

inline __int128 checked_pow(__int128 base, std::int64_t exp) {
  __int128 acc = 1;
  for (std::int64_t i = 0; i < exp; ++i) {
    if (!checked_mul(acc, base, acc)) throw ConfigError("lp_ball too large for exact evaluation");
  }
  return acc;
}

// Exact membership of (a, b) (both >= 0) in the rescaled l^p ball of scale s.
inline bool in_lp_ball(const LpBall& ball, std::int64_t a, std::int64_t b) {
  const __int128 sn = ball.s.num();
  const __int128 sd = ball.s.den();
  if (!ball.p) {
    // max(a, b) <= s / sqrt(2)  <=>  2 max^2 sd^2 <= sn^2
    const __int128 m = std::max(a, b);
    return 2 * m * m * sd * sd <= sn * sn;
  }
  const Rational& p = *ball.p;
  if (p.is_integer()) {
    const std::int64_t k = p.num();
    const __int128 lhs = checked_pow(a, k) + checked_pow(b, k);
    if (k <= 2) {
      // a^k + b^k <= s^k
      __int128 l = 0;
      if (!checked_mul(lhs, checked_pow(sd, k), l)) throw ConfigError("lp_ball too large for exact evaluation");
      return l <= checked_pow(sn, k);
    }
    // radius is s * 2^(1/k - 1/2); square both sides to stay rational:
    // (a^k + b^k)^2 * 2^(k-2) * sd^(2k) <= sn^(2k)
    __int128 l = 0;
    if (!checked_mul(lhs, lhs, l) || !checked_mul(l, checked_pow(2, k - 2), l) ||
        !checked_mul(l, checked_pow(sd, 2 * k), l)) {
      throw ConfigError("lp_ball too large for exact evaluation");
    }
    return l <= checked_pow(sn, 2 * k);
  }
  // Non-integer exponent: long double with a relative tolerance of 1e-12.
  const long double pe = p.to_long_double();
  const long double s = ball.s.to_long_double();
  const long double radius = pe >= 2 ? s * std::pow(2.0L, 1.0L / pe - 0.5L) : s;
  const long double lhs = std::pow(static_cast<long double>(a), pe) + std::pow(static_cast<long double>(b), pe);
  const long double rhs = std::pow(radius, pe);
  return lhs <= rhs * (1 + 1e-12L);
}

}  // namespace detail

inline std::vector<Point> named_offsets(NamedModel m) {
  switch (m) {
    case NamedModel::square: return {{0, 0}, {1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    case NamedModel::triangular: return {{0, 0}, {1, 0}, {0, 1}, {-1, 0}, {0, -1}, {1, -1}, {-1, 1}};
    case NamedModel::boxtimes: {
      std::vector<Point> v;
      for (int x = -1; x <= 1; ++x)
        for (int y = -1; y <= 1; ++y) v.push_back({x, y});
      return v;
    }
    case NamedModel::diamond: return {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
    case NamedModel::square4: {
      std::vector<Point> v;
      for (int x = -4; x <= 4; ++x)
        for (int y = -4; y <= 4; ++y)
          if (std::abs(x) + std::abs(y) <= 4) v.push_back({x, y});
      return v;
    }
  }
  return {};
}

inline int named_threshold(NamedModel m) {
  switch (m) {
    case NamedModel::square: return 2;
    case NamedModel::triangular: return 3;
    case NamedModel::boxtimes: return 4;
    case NamedModel::diamond: return 2;
    case NamedModel::square4: return 17;
  }
  return 0;
}

inline std::vector<Point> lp_ball_offsets(const LpBall& ball) {
  if (ball.s <= Rational(0)) throw ConfigError("lp_ball scale must be positive");
  if (ball.p && *ball.p < Rational(1)) throw ConfigError("lp_ball exponent must be at least 1");
  const std::int64_t reach = ball.s.ceil();
  std::vector<Point> out;
  for (std::int64_t x = -reach; x <= reach; ++x) {
    for (std::int64_t y = -reach; y <= reach; ++y) {
      if (detail::in_lp_ball(ball, std::abs(x), std::abs(y))) out.push_back({x, y});
    }
  }
  return out;
}

// True when the offset set is invariant under negation and rotation by pi/2.
inline bool is_rotation_symmetric(std::span<const Point> offsets) {
  const std::set<Point> set(offsets.begin(), offsets.end());
  return std::all_of(set.begin(), set.end(), [&](Point k) { return set.count(rotate90(k)) > 0; });
}

// One piece of the exact angular sweep: either a breakpoint direction (a
// normal to some offset) or the open arc between two consecutive breakpoints.
struct SweepPiece {
  bool is_arc{false};
  Direction from{1, 0};    // the breakpoint itself, or the arc's start
  Direction to{1, 0};      // equal to `from` for breakpoints
  Direction sample{1, 0};  // a direction inside the piece
  std::int64_t count{0};   // |H_u ∩ K| for every u in the piece
};

// |{k in K : <k, u> < 0}|.
inline std::int64_t open_half_plane_count(std::span<const Point> offsets, Point u) {
  return std::count_if(offsets.begin(), offsets.end(), [&](Point k) { return dot(k, u) < 0; });
}

// Partition of S^1 into breakpoints and open arcs on which |H_u ∩ K| is
// constant, in counter-clockwise order starting at the first breakpoint at or
// after angle 0. With no nonzero offset the whole circle is one arc.
inline std::vector<SweepPiece> angular_sweep(std::span<const Point> offsets) {
  std::vector<Point> crit;
  for (Point k : offsets) {
    if (k == Point{0, 0}) continue;
    const Direction n = Direction::from_vector(rotate90(k));
    crit.push_back(n.vec());
    crit.push_back(-n.vec());
  }
  std::sort(crit.begin(), crit.end(), angle_less);
  crit.erase(std::unique(crit.begin(), crit.end(),
                         [](Point a, Point b) { return !angle_less(a, b) && !angle_less(b, a); }),
             crit.end());
  std::vector<SweepPiece> pieces;
  if (crit.empty()) {
    pieces.push_back({true, Direction(1, 0), Direction(1, 0), Direction(1, 0), 0});
    return pieces;
  }
  for (std::size_t i = 0; i < crit.size(); ++i) {
    const Point a = crit[i];
    const Point b = crit[(i + 1) % crit.size()];
    const Direction da = Direction::from_vector(a);
    pieces.push_back({false, da, da, da, open_half_plane_count(offsets, a)});
    Point mid;
    const std::int64_t c = cross(a, b);
    if (c > 0) {
      mid = a + b;
    } else if (c == 0) {
      mid = rotate90(a);  // a and b are opposite
    } else {
      mid = -(a + b);
    }
    const Direction dm = Direction::from_vector(mid);
    pieces.push_back({true, da, Direction::from_vector(b), dm, open_half_plane_count(offsets, dm.vec())});
  }
  return pieces;
}

// r = 1 + min_u |{k in K : <k, u> < 0}|, exact. The min is attained on a
// sweep piece. For offset sets that are not rotation symmetric the value is
// still computed, but the critical/supercritical classification it encodes
// is only meaningful for symmetric models.
inline int critical_threshold(std::span<const Point> offsets) {
  if (offsets.empty()) throw ConfigError("critical threshold of an empty neighbourhood");
  std::int64_t best = static_cast<std::int64_t>(offsets.size());
  for (const SweepPiece& p : angular_sweep(offsets)) best = std::min(best, p.count);
  return static_cast<int>(best + 1);
}

inline Neighbourhood build_neighbourhood(const NeighbourhoodSpec& spec) {
  std::vector<Point> offsets;
  std::optional<int> default_r;
  bool require_symmetry = false;
  if (const auto* m = std::get_if<NamedModel>(&spec.kind)) {
    offsets = named_offsets(*m);
    default_r = named_threshold(*m);
  } else if (const auto* b = std::get_if<LpBall>(&spec.kind)) {
    offsets = lp_ball_offsets(*b);
  } else {
    offsets = std::get<ExplicitOffsets>(spec.kind).offsets;
    require_symmetry = !spec.threshold.has_value();
  }
  if (offsets.empty()) throw ConfigError("neighbourhood has no offsets");
  if (require_symmetry && !is_rotation_symmetric(offsets)) {
    throw ConfigError("explicit offsets without rotation symmetry need an explicit threshold");
  }
  const int r = spec.threshold ? *spec.threshold : default_r ? *default_r : critical_threshold(offsets);
  return Neighbourhood(std::move(offsets), r, spec.id());
}

// Closed arc of stable directions from `from` counter-clockwise to `to`.
struct StableArc {
  Direction from{1, 0};
  Direction to{1, 0};
  bool from_inclusive{false};
  bool to_inclusive{false};
  bool full_circle{false};
};

struct StabilityReport {
  int threshold{0};
  std::vector<SweepPiece> pieces;
  std::vector<Direction> stable_points;  // isolated stable directions
  std::vector<StableArc> stable_arcs;

  // |H_u ∩ K| for an arbitrary direction, from the sweep.
  std::int64_t count(const Direction& u) const {
    for (const SweepPiece& p : pieces) {
      if (!p.is_arc) {
        if (p.from == u) return p.count;
        continue;
      }
      if (pieces.size() == 1) return p.count;
      const Point a = p.from.vec();
      const Point b = p.to.vec();
      const Point v = u.vec();
      // strictly inside the counter-clockwise arc (a, b)
      const bool inside = cross(a, b) > 0    ? (cross(a, v) > 0 && cross(v, b) > 0)
                          : cross(a, b) == 0 ? cross(a, v) > 0
                                             : !(cross(b, v) >= 0 && cross(v, a) >= 0);
      if (inside) return p.count;
    }
    throw std::logic_error("direction not covered by sweep");
  }

  bool is_stable(const Direction& u) const { return count(u) < threshold; }

  // The stable set when it is finite, in angular order.
  std::optional<std::vector<Direction>> finite_stable_set() const {
    if (!stable_arcs.empty()) return std::nullopt;
    return stable_points;
  }
};

inline StabilityReport stability_report(std::span<const Point> offsets, int threshold) {
  StabilityReport rep;
  rep.threshold = threshold;
  rep.pieces = angular_sweep(offsets);
  const auto& pcs = rep.pieces;
  const std::size_t m = pcs.size();
  auto stable = [&](std::size_t i) { return pcs[i % m].count < threshold; };

  std::size_t start = m;
  for (std::size_t i = 0; i < m; ++i) {
    if (!stable(i)) {
      start = i;
      break;
    }
  }
  if (start == m) {
    rep.stable_arcs.push_back({pcs[0].from, pcs[0].from, true, true, true});
    return rep;
  }
  // Walk once around the circle starting just after an unstable piece.
  std::size_t i = start + 1;
  const std::size_t end = start + m;
  while (i < end) {
    if (!stable(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < end && stable(j + 1)) ++j;
    const SweepPiece& first = pcs[i % m];
    const SweepPiece& last = pcs[j % m];
    if (i == j && !first.is_arc) {
      rep.stable_points.push_back(first.from);
    } else {
      StableArc arc;
      arc.from = first.from;
      arc.from_inclusive = !first.is_arc;
      arc.to = last.to;
      arc.to_inclusive = !last.is_arc;
      rep.stable_arcs.push_back(arc);
    }
    i = j + 1;
  }
  AngleLess less;
  std::sort(rep.stable_points.begin(), rep.stable_points.end(), less);
  return rep;
}

inline StabilityReport stability_report(const Neighbourhood& nbhd) {
  return stability_report(nbhd.offsets(), nbhd.threshold());
}

// Names the stable set when it is one of the three that occur for the
// lattice models: "S_square" (the four axis directions), "S_triangle" (axes
// plus (1,1) and (-1,-1)) and "S_boxtimes" (axes and diagonals). Otherwise
// "other", or "infinite" when there are stable arcs.
inline std::string stable_set_name(const StabilityReport& rep) {
  const auto finite = rep.finite_stable_set();
  if (!finite) return "infinite";
  auto as_set = [](std::initializer_list<Point> ps) {
    std::vector<Direction> v;
    for (Point p : ps) v.emplace_back(p.x, p.y);
    std::sort(v.begin(), v.end(), AngleLess{});
    return v;
  };
  if (*finite == as_set({{1, 0}, {0, 1}, {-1, 0}, {0, -1}})) return "S_square";
  if (*finite == as_set({{1, 0}, {1, 1}, {0, 1}, {-1, 0}, {-1, -1}, {0, -1}})) return "S_triangle";
  if (*finite == as_set({{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}})) return "S_boxtimes";
  return "other";
}

// Primitive vectors with both coordinates in [-s, s], in angular order.
inline std::vector<Direction> quasi_stable_directions(std::int64_t s) {
  if (s < 1) throw std::invalid_argument("quasi-stable directions need s >= 1");
  std::vector<Direction> out;
  for (std::int64_t x = -s; x <= s; ++x) {
    for (std::int64_t y = -s; y <= s; ++y) {
      if (std::gcd(x, y) == 1) out.emplace_back(x, y);
    }
  }
  std::sort(out.begin(), out.end(), AngleLess{});
  return out;
}

// Angular predecessor and successor of u within q_set.
inline std::pair<Direction, Direction> consecutive_directions(std::span<const Direction> q_set,
                                                              const Direction& u) {
  if (q_set.size() < 3) throw std::invalid_argument("need at least three directions");
  std::vector<Direction> sorted(q_set.begin(), q_set.end());
  std::sort(sorted.begin(), sorted.end(), AngleLess{});
  const auto it = std::find(sorted.begin(), sorted.end(), u);
  if (it == sorted.end()) throw std::invalid_argument("direction " + to_string(u.vec()) + " not in set");
  const std::size_t i = static_cast<std::size_t>(it - sorted.begin());
  const std::size_t n = sorted.size();
  return {sorted[(i + n - 1) % n], sorted[(i + 1) % n]};
}

// max <k, u> over offsets, for the integer vector u. Divide by |u| to get the
// value for the unit direction.
struct SupportValue {
  std::int64_t value{0};
  std::int64_t norm2{1};
  double normalised() const { return static_cast<double>(value) / std::sqrt(static_cast<double>(norm2)); }
};

inline SupportValue support_value(std::span<const Point> offsets, const Direction& u) {
  std::int64_t best = dot(offsets.front(), u.vec());
  for (Point k : offsets) best = std::max(best, dot(k, u.vec()));
  return {best, norm2(u.vec())};
}

inline SupportValue support_value(const Neighbourhood& nbhd, const Direction& u) {
  return support_value(nbhd.offsets(), u);
}

}  // namespace bperc
