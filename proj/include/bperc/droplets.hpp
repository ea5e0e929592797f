#pragma once

// Droplets of the square and triangular models: canonical radii, single-site
// growth, internal filling and the droplet algorithm that computes closures
// by merging internally filled droplets.

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

#include "bperc/dynamics.hpp"
#include "bperc/geometry.hpp"
#include "bperc/lattice.hpp"
#include "bperc/rng.hpp"

namespace bperc {

enum class DropletModel { square, triangular };

inline NamedModel named_model(DropletModel m) {
  return m == DropletModel::square ? NamedModel::square : NamedModel::triangular;
}

inline const Neighbourhood& droplet_neighbourhood(DropletModel m) {
  static const Neighbourhood square = build_neighbourhood(NeighbourhoodSpec::named(NamedModel::square));
  static const Neighbourhood triangular = build_neighbourhood(NeighbourhoodSpec::named(NamedModel::triangular));
  return m == DropletModel::square ? square : triangular;
}

// Stable directions as integer normals, in the radii order
// right, up, left, down, up-right, down-left.
inline constexpr std::array<Point, 6> kDropletNormals{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {1, 1}, {-1, -1}}};

constexpr std::size_t droplet_direction_count(DropletModel m) { return m == DropletModel::square ? 4 : 6; }

using Radii = std::array<std::int64_t, 6>;

// D(l) = Z^2 ∩ {x : <x, u> <= l_u for every stable u}. Radii are kept
// minimal, i.e. l_u = max over the droplet of <x, u>. For the square model
// the last two entries are unused and zero.
class Droplet {
 public:
  static Droplet empty(DropletModel m) { return Droplet(m); }

  static Droplet singleton(DropletModel m, Point x) {
    Droplet d(m);
    d.empty_ = false;
    for (std::size_t i = 0; i < droplet_direction_count(m); ++i) d.radii_[i] = dot(x, kDropletNormals[i]);
    return d;
  }

  // Canonicalises arbitrary radii; the point set is unchanged.
  static Droplet from_radii(DropletModel m, const Radii& radii) {
    Droplet d(m);
    d.radii_ = radii;
    d.empty_ = false;
    d.canonicalise();
    return d;
  }

  DropletModel model() const { return model_; }
  bool is_empty() const { return empty_; }
  const Radii& radii() const { return radii_; }
  std::int64_t radius(std::size_t i) const { return radii_[i]; }

  bool contains(Point x) const {
    if (empty_) return false;
    for (std::size_t i = 0; i < droplet_direction_count(model_); ++i) {
      if (dot(x, kDropletNormals[i]) > radii_[i]) return false;
    }
    return true;
  }

  // Calls f(y, xlo, xhi) for every nonempty row of the droplet.
  template <typename F>
  void for_each_row(F&& f) const {
    if (empty_) return;
    for (std::int64_t y = -radii_[3]; y <= radii_[1]; ++y) {
      auto [lo, hi] = row_range(y);
      if (lo <= hi) f(y, lo, hi);
    }
  }

  std::vector<Point> points() const {
    std::vector<Point> out;
    for_each_row([&](std::int64_t y, std::int64_t lo, std::int64_t hi) {
      for (std::int64_t x = lo; x <= hi; ++x) out.push_back({x, y});
    });
    return out;
  }

  std::size_t size() const {
    std::size_t n = 0;
    for_each_row([&](std::int64_t, std::int64_t lo, std::int64_t hi) { n += static_cast<std::size_t>(hi - lo + 1); });
    return n;
  }

  // Smallest droplet containing both.
  Droplet hull_with(const Droplet& o) const {
    if (empty_) return o;
    if (o.empty_) return *this;
    Droplet d = *this;
    for (std::size_t i = 0; i < droplet_direction_count(model_); ++i) d.radii_[i] = std::max(radii_[i], o.radii_[i]);
    return d;
  }

  friend bool operator==(const Droplet&, const Droplet&) = default;

 private:
  explicit Droplet(DropletModel m) : model_(m) {}

  std::pair<std::int64_t, std::int64_t> row_range(std::int64_t y) const {
    std::int64_t lo = -radii_[2];
    std::int64_t hi = radii_[0];
    if (model_ == DropletModel::triangular) {
      lo = std::max(lo, -radii_[5] - y);
      hi = std::min(hi, radii_[4] - y);
    }
    return {lo, hi};
  }

  void canonicalise() {
    constexpr std::int64_t kLow = std::numeric_limits<std::int64_t>::min();
    Radii tight{kLow, kLow, kLow, kLow, kLow, kLow};
    bool any = false;
    for (std::int64_t y = -radii_[3]; y <= radii_[1]; ++y) {
      auto [lo, hi] = row_range(y);
      if (lo > hi) continue;
      any = true;
      tight[0] = std::max(tight[0], hi);
      tight[1] = std::max(tight[1], y);
      tight[2] = std::max(tight[2], -lo);
      tight[3] = std::max(tight[3], -y);
      tight[4] = std::max(tight[4], hi + y);
      tight[5] = std::max(tight[5], -(lo + y));
    }
    if (!any) {
      *this = Droplet(model_);
      return;
    }
    if (model_ == DropletModel::square) tight[4] = tight[5] = 0;
    radii_ = tight;
  }

  DropletModel model_;
  bool empty_{true};
  Radii radii_{};
};

inline Droplet canonical_radii(DropletModel m, const Radii& radii) { return Droplet::from_radii(m, radii); }

// The inclusion-minimal droplet containing d and x.
inline Droplet smallest_containing(const Droplet& d, Point x) {
  return d.hull_with(Droplet::singleton(d.model(), x));
}

// Smallest droplet containing every site of `sites`.
inline Droplet droplet_hull(DropletModel m, std::span<const Point> sites) {
  Droplet d = Droplet::empty(m);
  for (Point p : sites) d = smallest_containing(d, p);
  return d;
}

namespace detail {

// Rectangle domain covering the droplet's bounding box plus a margin.
inline Domain droplet_window(const Droplet& d, std::int64_t margin) {
  return Domain::rect(-d.radius(2) - margin, d.radius(0) + margin, -d.radius(3) - margin, d.radius(1) + margin);
}

inline void require_model(const Droplet& d, const Neighbourhood& nbhd) {
  const Neighbourhood& expected = droplet_neighbourhood(d.model());
  if (!std::equal(nbhd.offsets().begin(), nbhd.offsets().end(), expected.offsets().begin(), expected.offsets().end()) ||
      nbhd.threshold() != expected.threshold()) {
    throw std::invalid_argument("droplets are defined only for the square and triangular models");
  }
}

}  // namespace detail

// Computes [D ∪ {x}] and compares it with smallest_containing(D, x).
// x must be a neighbour of some site of a nonempty D.
inline bool single_site_growth_check(const Droplet& d, Point x, const Neighbourhood& nbhd) {
  detail::require_model(d, nbhd);
  if (!d.is_empty()) {
    const bool adjacent = std::any_of(nbhd.offsets().begin(), nbhd.offsets().end(), [&](Point k) {
      return k != Point{0, 0} && d.contains(x - k);
    });
    if (!adjacent && !d.contains(x)) throw std::invalid_argument("x is not a neighbour of the droplet");
  }
  const Droplet grown = smallest_containing(d, x);
  std::vector<Point> initial = d.points();
  initial.push_back(x);
  const Domain window = detail::droplet_window(grown, 2);
  const Configuration cfg = closure(window, nbhd, initial);
  if (cfg.infected_count() != grown.size()) return false;
  for (Point p : grown.points()) {
    if (!cfg.infected(p)) return false;
  }
  return true;
}

inline bool single_site_growth_check(const Droplet& d, Point x) {
  return single_site_growth_check(d, x, droplet_neighbourhood(d.model()));
}

// [D ∩ A] restricted to D equals D.
inline bool internally_filled(const Droplet& d, std::span<const Point> sites, const Neighbourhood& nbhd) {
  detail::require_model(d, nbhd);
  if (d.is_empty()) return true;
  std::vector<Point> inside;
  for (Point p : sites) {
    if (d.contains(p)) inside.push_back(p);
  }
  const std::vector<Point> region = d.points();
  const Domain window = detail::droplet_window(d, 1);
  const Configuration cfg = restricted_closure(window, nbhd, inside, region);
  return cfg.infected_count() == region.size();
}

inline bool internally_filled(const Droplet& d, std::span<const Point> sites) {
  return internally_filled(d, sites, droplet_neighbourhood(d.model()));
}

enum class MergeStrategy {
  // Lowest row-major candidate site; merge every droplet holding one of its
  // neighbours.
  first_found,
  // Random candidate site; merge a random minimal prefix of the droplets
  // holding its neighbours that reaches r neighbours.
  seeded_random,
};

struct DropletAlgorithmStats {
  std::size_t merges{0};
};

// Starts from singleton droplets of A and repeatedly merges droplets that
// together hold at least r neighbours of a site outside their union, until no
// such site exists. Every output droplet is internally filled and their union
// is [A].
inline std::vector<Droplet> droplet_algorithm(std::span<const Point> sites, DropletModel model,
                                              MergeStrategy strategy = MergeStrategy::first_found,
                                              std::uint64_t seed = 0, DropletAlgorithmStats* stats = nullptr) {
  std::vector<Point> unique_sites(sites.begin(), sites.end());
  std::sort(unique_sites.begin(), unique_sites.end());
  unique_sites.erase(std::unique(unique_sites.begin(), unique_sites.end()), unique_sites.end());
  if (unique_sites.empty()) return {};

  const Neighbourhood& nbhd = droplet_neighbourhood(model);
  const int r = nbhd.threshold();
  const Droplet hull = droplet_hull(model, unique_sites);
  const Domain grid = detail::droplet_window(hull, 1);
  const std::size_t cells = grid.size();

  std::vector<Droplet> droplets;
  std::vector<std::uint8_t> alive;
  std::vector<std::uint8_t> covered(cells, 0);
  std::vector<std::int32_t> nbr_count(cells, 0);  // covered sites in x + K
  std::set<std::size_t> ordered_candidates;
  std::vector<std::size_t> random_candidates;
  Xoshiro256ss rng(seed);

  auto push_candidate = [&](std::size_t i) {
    if (strategy == MergeStrategy::first_found) {
      ordered_candidates.insert(i);
    } else {
      random_candidates.push_back(i);
    }
  };
  auto cover = [&](Point p) {
    const std::size_t i = grid.index(p);
    if (covered[i]) return;
    covered[i] = 1;
    for (Point k : nbhd.offsets()) {
      const Point y = p - k;
      if (!grid.contains(y)) continue;
      const std::size_t j = grid.index(y);
      if (++nbr_count[j] >= r && !covered[j]) push_candidate(j);
    }
  };

  for (Point p : unique_sites) {
    droplets.push_back(Droplet::singleton(model, p));
    alive.push_back(1);
    cover(p);
  }

  std::vector<std::size_t> holders;
  while (true) {
    std::size_t x_index = cells;
    if (strategy == MergeStrategy::first_found) {
      while (!ordered_candidates.empty()) {
        const std::size_t i = *ordered_candidates.begin();
        ordered_candidates.erase(ordered_candidates.begin());
        if (!covered[i] && nbr_count[i] >= r) {
          x_index = i;
          break;
        }
      }
    } else {
      while (!random_candidates.empty()) {
        const std::size_t pick = rng.bounded(random_candidates.size());
        const std::size_t i = random_candidates[pick];
        random_candidates[pick] = random_candidates.back();
        random_candidates.pop_back();
        if (!covered[i] && nbr_count[i] >= r) {
          x_index = i;
          break;
        }
      }
    }
    if (x_index == cells) break;
    const Point x = grid.point(x_index);

    // Droplets holding a neighbour of x.
    holders.clear();
    for (std::size_t d = 0; d < droplets.size(); ++d) {
      if (!alive[d]) continue;
      const bool holds = std::any_of(nbhd.offsets().begin(), nbhd.offsets().end(),
                                     [&](Point k) { return droplets[d].contains(x + k); });
      if (holds) holders.push_back(d);
    }
    if (strategy == MergeStrategy::seeded_random) {
      shuffle(std::span<std::size_t>(holders), rng);
      std::set<Point> seen;
      std::size_t keep = 0;
      while (keep < holders.size() && static_cast<int>(seen.size()) < r) {
        for (Point k : nbhd.offsets()) {
          if (droplets[holders[keep]].contains(x + k)) seen.insert(x + k);
        }
        ++keep;
      }
      holders.resize(keep);
    }
    if (holders.size() < 2) throw std::logic_error("droplet algorithm: merge needs at least two droplets");

    Droplet merged = droplets[holders.front()];
    for (std::size_t d : holders) {
      merged = merged.hull_with(droplets[d]);
      alive[d] = 0;
    }
    merged.for_each_row([&](std::int64_t y, std::int64_t lo, std::int64_t hi) {
      for (std::int64_t px = lo; px <= hi; ++px) cover({px, y});
    });
    droplets.push_back(merged);
    alive.push_back(1);
    if (stats) ++stats->merges;
    if (!covered[x_index]) push_candidate(x_index);
  }

  std::vector<Droplet> out;
  for (std::size_t d = 0; d < droplets.size(); ++d) {
    if (alive[d]) out.push_back(droplets[d]);
  }
  return out;
}

}  // namespace bperc
