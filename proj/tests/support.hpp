#pragma once
// Random instance generators shared by the unit tests and the acceptance run.
#include <vector>

#include "bperc/droplets.hpp"
#include "bperc/rng.hpp"
#include "oracles.hpp"

namespace support {

using namespace bperc;

inline oracle::Grid grid_of(const Domain& d) { return {d.is_torus(), d.xmin(), d.xmax(), d.ymin(), d.ymax()}; }

inline std::vector<Point> offsets_of(const Neighbourhood& n) { return {n.offsets().begin(), n.offsets().end()}; }

// Each site of the domain independently with probability `density`.
inline std::vector<Point> random_sites(const Domain& d, double density, Xoshiro256ss& rng) {
  std::vector<Point> out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (rng.uniform() < density) out.push_back(d.point(i));
  }
  return out;
}

// Radii uniform in [0, max_radius], translated by a random shift of at most
// 10 per coordinate, resampled until nonempty and canonicalised. For the
// triangular model this often leaves sides with a single lattice point.
inline Droplet random_droplet(DropletModel m, Xoshiro256ss& rng, std::int64_t max_radius = 40) {
  while (true) {
    Radii r{};
    for (std::size_t i = 0; i < droplet_direction_count(m); ++i) {
      r[i] = static_cast<std::int64_t>(rng.bounded(static_cast<std::uint64_t>(max_radius + 1)));
    }
    // shift so that the droplet need not contain the origin
    const Point shift{static_cast<std::int64_t>(rng.bounded(21)) - 10, static_cast<std::int64_t>(rng.bounded(21)) - 10};
    for (std::size_t i = 0; i < droplet_direction_count(m); ++i) r[i] += dot(shift, kDropletNormals[i]);
    Droplet d = Droplet::from_radii(m, r);
    if (!d.is_empty()) return d;
  }
}

// True when some side of the droplet holds at most one lattice point.
inline bool has_degenerate_side(const Droplet& d) {
  const auto pts = d.points();
  for (std::size_t i = 0; i < droplet_direction_count(d.model()); ++i) {
    const auto on = std::count_if(pts.begin(), pts.end(), [&](Point p) { return dot(p, kDropletNormals[i]) == d.radius(i); });
    if (on <= 1) return true;
  }
  return false;
}

// A site outside d that is a neighbour of some site of d, found by stepping
// from a random row end; nullopt if the random tries all land inside.
inline std::optional<Point> random_adjacent_site(const Droplet& d, const Neighbourhood& nbhd, Xoshiro256ss& rng) {
  std::vector<std::pair<Point, Point>> ends;
  d.for_each_row([&](std::int64_t y, std::int64_t lo, std::int64_t hi) {
    ends.push_back({{lo, y}, {hi, y}});
  });
  std::vector<Point> ks;
  for (Point k : nbhd.offsets()) {
    if (k != Point{0, 0}) ks.push_back(k);
  }
  for (int attempt = 0; attempt < 64; ++attempt) {
    const auto& row = ends[rng.bounded(ends.size())];
    std::vector<Point> pool{row.first, row.second};
    // top and bottom rows contribute every site
    if (row.first.y == ends.front().first.y || row.first.y == ends.back().first.y) {
      pool.push_back({row.first.x + static_cast<std::int64_t>(rng.bounded(static_cast<std::uint64_t>(
                                         row.second.x - row.first.x + 1))),
                      row.first.y});
    }
    const Point y = pool[rng.bounded(pool.size())];
    const Point x = y + ks[rng.bounded(ks.size())];
    if (!d.contains(x)) return x;
  }
  return std::nullopt;
}

}  // namespace support
