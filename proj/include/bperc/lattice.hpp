#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace bperc {

// A site of Z^2, or an offset between two sites.
struct Point {
  std::int64_t x{0};
  std::int64_t y{0};

  friend constexpr auto operator<=>(const Point&, const Point&) = default;

  constexpr Point operator+(Point o) const { return {x + o.x, y + o.y}; }
  constexpr Point operator-(Point o) const { return {x - o.x, y - o.y}; }
  constexpr Point operator-() const { return {-x, -y}; }
  constexpr Point operator*(std::int64_t k) const { return {x * k, y * k}; }
};

inline std::ostream& operator<<(std::ostream& os, Point p) {
  return os << '(' << p.x << ',' << p.y << ')';
}

constexpr std::int64_t dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
constexpr std::int64_t cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
constexpr std::int64_t norm2(Point a) { return dot(a, a); }
constexpr Point rotate90(Point a) { return {-a.y, a.x}; }

// 0 for the half-open upper half-plane (angle in [0, pi)), 1 otherwise.
constexpr int angular_half(Point a) {
  return (a.y > 0 || (a.y == 0 && a.x > 0)) ? 0 : 1;
}

// Strict weak order of nonzero vectors by polar angle in [0, 2pi), exact.
constexpr bool angle_less(Point a, Point b) {
  const int ha = angular_half(a);
  const int hb = angular_half(b);
  if (ha != hb) return ha < hb;
  return cross(a, b) > 0;
}

struct PointHash {
  std::size_t operator()(Point p) const noexcept {
    const auto ux = static_cast<std::uint64_t>(p.x);
    const auto uy = static_cast<std::uint64_t>(p.y);
    return std::hash<std::uint64_t>{}(ux * 0x9E3779B97F4A7C15ULL ^ (uy + 0x7F4A7C15ULL));
  }
};

// Primitive integer vector: gcd(|x|, |y|) == 1. Represents the point of S^1
// with the same polar angle; equality is exact.
class Direction {
 public:
  // Throws std::invalid_argument unless (x, y) is primitive.
  constexpr Direction(std::int64_t x, std::int64_t y) : v_{x, y} {
    if (std::gcd(x, y) != 1) {
      throw std::invalid_argument("direction must be a primitive integer vector");
    }
  }

  // Reduces any nonzero vector to the primitive vector with the same angle.
  static Direction from_vector(Point v) {
    const std::int64_t g = std::gcd(v.x, v.y);
    if (g == 0) throw std::invalid_argument("zero vector has no direction");
    return Direction(v.x / g, v.y / g);
  }

  constexpr Point vec() const { return v_; }
  constexpr std::int64_t x() const { return v_.x; }
  constexpr std::int64_t y() const { return v_.y; }
  double norm() const { return std::sqrt(static_cast<double>(norm2(v_))); }

  Direction rotated90() const { return Direction(-v_.y, v_.x); }
  Direction opposite() const { return Direction(-v_.x, -v_.y); }

  friend constexpr bool operator==(const Direction&, const Direction&) = default;

 private:
  Point v_;
};

// Angular order starting at (1, 0), counter-clockwise.
struct AngleLess {
  constexpr bool operator()(const Direction& a, const Direction& b) const {
    return angle_less(a.vec(), b.vec());
  }
};

inline std::ostream& operator<<(std::ostream& os, const Direction& d) { return os << d.vec(); }

inline std::string to_string(Point p) {
  return "(" + std::to_string(p.x) + "," + std::to_string(p.y) + ")";
}

}  // namespace bperc

