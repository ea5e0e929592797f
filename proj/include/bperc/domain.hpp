#pragma once

// Finite domains (torus, box, box with a frozen frame) and infection
// configurations over them.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bperc/geometry.hpp"
#include "bperc/lattice.hpp"

namespace bperc {

enum class DomainKind { torus, rect };

// Sites are indexed row-major over the bounding box:
//   index = (y - ymin) * width + (x - xmin).
// A torus of side n uses coordinates 0..n-1 and wraps; a rectangle has no
// sites outside it. Frozen sites are permanently infected.
class Domain {
 public:
  static Domain torus(std::int64_t n) {
    if (n < 1) throw ConfigError("torus side must be positive");
    return Domain(DomainKind::torus, 0, n - 1, 0, n - 1);
  }
  // Lambda_d = [-d, d]^2.
  static Domain box(std::int64_t d) {
    if (d < 0) throw ConfigError("box half-width must be nonnegative");
    return rect(-d, d, -d, d);
  }
  static Domain rect(std::int64_t xmin, std::int64_t xmax, std::int64_t ymin, std::int64_t ymax) {
    if (xmax < xmin || ymax < ymin) throw ConfigError("empty rectangle domain");
    return Domain(DomainKind::rect, xmin, xmax, ymin, ymax);
  }
  static Domain framed_box(std::int64_t d, std::vector<Point> frozen) {
    return box(d).with_frozen(std::move(frozen));
  }

  Domain with_frozen(std::vector<Point> frozen) const {
    Domain out = *this;
    std::sort(frozen.begin(), frozen.end());
    frozen.erase(std::unique(frozen.begin(), frozen.end()), frozen.end());
    for (Point p : frozen) {
      if (!contains(p)) throw ConfigError("frozen site " + to_string(p) + " outside domain");
    }
    out.frozen_ = std::move(frozen);
    return out;
  }

  DomainKind kind() const { return kind_; }
  bool is_torus() const { return kind_ == DomainKind::torus; }
  std::int64_t xmin() const { return xmin_; }
  std::int64_t xmax() const { return xmax_; }
  std::int64_t ymin() const { return ymin_; }
  std::int64_t ymax() const { return ymax_; }
  std::int64_t width() const { return xmax_ - xmin_ + 1; }
  std::int64_t height() const { return ymax_ - ymin_ + 1; }
  std::size_t size() const { return static_cast<std::size_t>(width() * height()); }
  std::span<const Point> frozen() const { return frozen_; }
  bool has_frozen() const { return !frozen_.empty(); }

  bool contains(Point p) const { return p.x >= xmin_ && p.x <= xmax_ && p.y >= ymin_ && p.y <= ymax_; }

  std::size_t index(Point p) const {
    if (!contains(p)) throw ConfigError("site " + to_string(p) + " outside domain");
    return static_cast<std::size_t>((p.y - ymin_) * width() + (p.x - xmin_));
  }
  Point point(std::size_t i) const {
    const auto w = static_cast<std::size_t>(width());
    return {xmin_ + static_cast<std::int64_t>(i % w), ymin_ + static_cast<std::int64_t>(i / w)};
  }

  // Index of p + k, wrapping on the torus; nullopt when it leaves a rectangle.
  std::optional<std::size_t> shifted(Point p, Point k) const {
    Point q = p + k;
    if (kind_ == DomainKind::torus) {
      const std::int64_t n = width();
      q.x = ((q.x % n) + n) % n;
      q.y = ((q.y % n) + n) % n;
      return index(q);
    }
    if (!contains(q)) return std::nullopt;
    return index(q);
  }

  // Torus sides must keep distinct offsets distinct: n >= 2 ceil(|K|) + 1.
  void check_compatible(const Neighbourhood& nbhd) const {
    if (kind_ != DomainKind::torus) return;
    const std::int64_t need = 2 * nbhd.ceil_radius() + 1;
    if (width() < need) {
      throw ConfigError("torus side " + std::to_string(width()) + " too small for neighbourhood " + nbhd.id() +
                        " (need n >= " + std::to_string(need) + ")");
    }
  }

  friend bool operator==(const Domain&, const Domain&) = default;

 private:
  Domain(DomainKind kind, std::int64_t xmin, std::int64_t xmax, std::int64_t ymin, std::int64_t ymax)
      : kind_(kind), xmin_(xmin), xmax_(xmax), ymin_(ymin), ymax_(ymax) {}

  DomainKind kind_;
  std::int64_t xmin_, xmax_, ymin_, ymax_;
  std::vector<Point> frozen_;
};

// Infected set with per-site generation: -1 healthy, 0 initial or frozen,
// t >= 1 infected in synchronous round t.
struct Configuration {
  Domain domain;
  std::vector<std::int32_t> times;

  static constexpr std::int32_t kHealthy = -1;

  bool infected(std::size_t i) const { return times[i] >= 0; }
  bool infected(Point p) const { return domain.contains(p) && infected(domain.index(p)); }

  std::size_t infected_count() const {
    return static_cast<std::size_t>(std::count_if(times.begin(), times.end(), [](auto t) { return t >= 0; }));
  }
  // Infected sites that are not frozen.
  std::size_t closure_size() const { return infected_count() - domain.frozen().size(); }
  bool is_full() const { return infected_count() == domain.size(); }

  std::vector<Point> infected_sites(bool include_frozen = false) const {
    std::vector<Point> out;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] < 0) continue;
      const Point p = domain.point(i);
      if (!include_frozen && std::binary_search(domain.frozen().begin(), domain.frozen().end(), p)) continue;
      out.push_back(p);
    }
    return out;
  }

  std::int32_t max_time() const {
    std::int32_t m = kHealthy;
    for (auto t : times) m = std::max(m, t);
    return m;
  }

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

// Frozen sites and `initial` at time 0; everything else healthy.
inline Configuration make_configuration(const Domain& domain, std::span<const Point> initial) {
  Configuration cfg{domain, std::vector<std::int32_t>(domain.size(), Configuration::kHealthy)};
  for (Point p : initial) cfg.times[domain.index(p)] = 0;
  for (Point p : domain.frozen()) cfg.times[domain.index(p)] = 0;
  return cfg;
}

}  // namespace bperc
