#pragma once

// Threshold bootstrap dynamics on finite domains: closures, restricted
// closures, single synchronous steps and the infection graph.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "bperc/domain.hpp"
#include "bperc/geometry.hpp"
#include "bperc/rng.hpp"

namespace bperc {

namespace detail {

// Visits the index of every in-domain site i + k (k in offsets), in offset
// order, passing the offset position. Offsets must not exceed the torus side.
class NeighbourWalker {
 public:
  NeighbourWalker(const Domain& domain, std::span<const Point> offsets)
      : torus_(domain.is_torus()), w_(domain.width()), h_(domain.height()), offsets_(offsets) {}

  template <typename F>
  void for_each(std::size_t i, F&& f) const {
    const auto x = static_cast<std::int64_t>(i) % w_;
    const auto y = static_cast<std::int64_t>(i) / w_;
    for (std::size_t j = 0; j < offsets_.size(); ++j) {
      std::int64_t nx = x + offsets_[j].x;
      std::int64_t ny = y + offsets_[j].y;
      if (torus_) {
        nx = nx < 0 ? nx + w_ : (nx >= w_ ? nx - w_ : nx);
        ny = ny < 0 ? ny + h_ : (ny >= h_ ? ny - h_ : ny);
      } else if (nx < 0 || nx >= w_ || ny < 0 || ny >= h_) {
        continue;
      }
      f(static_cast<std::size_t>(ny * w_ + nx), j);
    }
  }

 private:
  bool torus_;
  std::int64_t w_, h_;
  std::span<const Point> offsets_;
};

inline std::vector<Point> negated(std::span<const Point> offsets) {
  std::vector<Point> out;
  out.reserve(offsets.size());
  for (Point k : offsets) out.push_back(-k);
  return out;
}

// Runs the dynamics from `cfg` to its fixed point in synchronous rounds,
// event-driven. Newly infected sites get time = round number continuing from
// `first_round`. `allowed` (may be empty) masks the sites that may become
// infected. Returns the number of rounds performed.
inline std::int32_t run_rounds(Configuration& cfg, const Neighbourhood& nbhd, const std::vector<std::uint8_t>& allowed,
                               std::int32_t first_round, std::int32_t max_rounds = INT32_MAX) {
  const Domain& dom = cfg.domain;
  const std::size_t n = dom.size();
  const int r = nbhd.threshold();
  const std::vector<Point> back_offsets = negated(nbhd.offsets());
  const NeighbourWalker backward(dom, back_offsets);
  auto may_infect = [&](std::size_t i) { return allowed.empty() || allowed[i] != 0; };

  // counts[i] = |(i + K) ∩ infected|
  std::vector<std::int32_t> counts(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!cfg.infected(i)) continue;
    backward.for_each(i, [&](std::size_t j, std::size_t) { ++counts[j]; });
  }
  std::vector<std::uint8_t> queued(n, 0);
  std::vector<std::size_t> frontier;
  for (std::size_t i = 0; i < n; ++i) {
    if (!cfg.infected(i) && may_infect(i) && counts[i] >= r) {
      frontier.push_back(i);
      queued[i] = 1;
    }
  }
  std::int32_t round = first_round;
  std::int32_t done = 0;
  std::vector<std::size_t> next;
  while (!frontier.empty() && done < max_rounds) {
    for (std::size_t i : frontier) cfg.times[i] = round;
    next.clear();
    for (std::size_t i : frontier) {
      backward.for_each(i, [&](std::size_t j, std::size_t) {
        if (++counts[j] >= r && !queued[j] && !cfg.infected(j) && may_infect(j)) {
          queued[j] = 1;
          next.push_back(j);
        }
      });
    }
    frontier.swap(next);
    ++round;
    ++done;
  }
  return done;
}

inline std::vector<std::uint8_t> site_mask(const Domain& domain, std::span<const Point> sites) {
  std::vector<std::uint8_t> mask(domain.size(), 0);
  for (Point p : sites) mask[domain.index(p)] = 1;
  return mask;
}

}  // namespace detail

// [A]: least fixed point of the update rule, with per-site generation times
// equal to those of the synchronous iteration A_0, A_1, ...
inline Configuration closure(const Domain& domain, const Neighbourhood& nbhd, std::span<const Point> initial) {
  domain.check_compatible(nbhd);
  Configuration cfg = make_configuration(domain, initial);
  detail::run_rounds(cfg, nbhd, {}, 1);
  return cfg;
}

// Continues the dynamics from an arbitrary configuration; existing times are
// kept and new sites get times after the configuration's latest one.
inline Configuration closure(Configuration cfg, const Neighbourhood& nbhd) {
  cfg.domain.check_compatible(nbhd);
  detail::run_rounds(cfg, nbhd, {}, std::max(cfg.max_time(), 0) + 1);
  return cfg;
}

// [A]_B: only sites of `region` may become infected; initial sites outside
// the region stay infected and still count as neighbours.
inline Configuration restricted_closure(const Domain& domain, const Neighbourhood& nbhd, std::span<const Point> initial,
                                        std::span<const Point> region) {
  domain.check_compatible(nbhd);
  Configuration cfg = make_configuration(domain, initial);
  const auto mask = detail::site_mask(domain, region);
  detail::run_rounds(cfg, nbhd, mask, 1);
  return cfg;
}

// Reference implementation: full synchronous sweeps until nothing changes.
// Quadratic in the number of rounds; meant for cross-checking.
inline Configuration sweep_closure(const Domain& domain, const Neighbourhood& nbhd, std::span<const Point> initial) {
  domain.check_compatible(nbhd);
  Configuration cfg = make_configuration(domain, initial);
  const detail::NeighbourWalker walker(domain, nbhd.offsets());
  std::vector<std::size_t> born;
  for (std::int32_t round = 1;; ++round) {
    born.clear();
    for (std::size_t i = 0; i < cfg.times.size(); ++i) {
      if (cfg.infected(i)) continue;
      int c = 0;
      walker.for_each(i, [&](std::size_t j, std::size_t) { c += cfg.infected(j) ? 1 : 0; });
      if (c >= nbhd.threshold()) born.push_back(i);
    }
    if (born.empty()) return cfg;
    for (auto i : born) cfg.times[i] = round;
  }
}

// Exactly one parallel application of the rule.
inline Configuration synchronous_step(Configuration cfg, const Neighbourhood& nbhd) {
  cfg.domain.check_compatible(nbhd);
  detail::run_rounds(cfg, nbhd, {}, std::max(cfg.max_time(), 0) + 1, 1);
  return cfg;
}

inline bool is_closed(const Configuration& cfg, const Neighbourhood& nbhd) {
  cfg.domain.check_compatible(nbhd);
  const detail::NeighbourWalker walker(cfg.domain, nbhd.offsets());
  for (std::size_t i = 0; i < cfg.times.size(); ++i) {
    if (cfg.infected(i)) continue;
    int c = 0;
    walker.for_each(i, [&](std::size_t j, std::size_t) { c += cfg.infected(j) ? 1 : 0; });
    if (c >= nbhd.threshold()) return false;
  }
  return true;
}

// [A]_B on Z^2 for a finite region B, with the initial set given as a
// predicate (it may be infinite, e.g. a half-plane intersection). Returns the
// region sites that end up infected, including initially infected ones.
inline std::vector<Point> restricted_closure_plane(const Neighbourhood& nbhd, std::span<const Point> region,
                                                   const std::function<bool(Point)>& initially_infected) {
  std::unordered_map<Point, std::size_t, PointHash> where;
  where.reserve(region.size() * 2);
  for (std::size_t i = 0; i < region.size(); ++i) where.emplace(region[i], i);
  std::vector<std::uint8_t> on(region.size(), 0);
  std::vector<std::int32_t> counts(region.size(), 0);
  for (std::size_t i = 0; i < region.size(); ++i) {
    if (initially_infected(region[i])) on[i] = 1;
  }
  // counts from infected sites: outside the region only the predicate can
  // infect; inside, `on` is authoritative.
  for (std::size_t i = 0; i < region.size(); ++i) {
    if (on[i]) continue;
    for (Point k : nbhd.offsets()) {
      const Point q = region[i] + k;
      const auto it = where.find(q);
      if (it != where.end() ? on[it->second] != 0 : initially_infected(q)) ++counts[i];
    }
  }
  std::vector<std::size_t> frontier;
  for (std::size_t i = 0; i < region.size(); ++i) {
    if (!on[i] && counts[i] >= nbhd.threshold()) frontier.push_back(i);
  }
  std::vector<std::uint8_t> queued(region.size(), 0);
  for (auto i : frontier) queued[i] = 1;
  while (!frontier.empty()) {
    for (auto i : frontier) on[i] = 1;
    std::vector<std::size_t> next;
    for (auto i : frontier) {
      for (Point k : nbhd.offsets()) {
        const auto it = where.find(region[i] - k);
        if (it == where.end()) continue;
        const std::size_t j = it->second;
        if (++counts[j] >= nbhd.threshold() && !on[j] && !queued[j]) {
          queued[j] = 1;
          next.push_back(j);
        }
      }
    }
    frontier.swap(next);
  }
  std::vector<Point> out;
  for (std::size_t i = 0; i < region.size(); ++i) {
    if (on[i]) out.push_back(region[i]);
  }
  return out;
}

// How the r in-neighbours K_v of an infected site are chosen.
enum class SelectionRule { earliest_then_lexicographic, seeded_random };

struct InfectionGraph {
  // in_edges[i]: the selected sites used to infect site i (empty for
  // healthy and initial sites).
  std::vector<std::vector<std::size_t>> in_edges;
  std::vector<std::int32_t> out_degree;
  // 1 good, 0 bad, -1 not classified (healthy or initially infected).
  std::vector<std::int8_t> good;
  int bar{0};  // ceil(0.9 r)

  std::size_t edge_count() const {
    std::size_t e = 0;
    for (const auto& v : in_edges) e += v.size();
    return e;
  }
  std::size_t good_count() const { return static_cast<std::size_t>(std::count(good.begin(), good.end(), 1)); }
  std::size_t bad_count() const { return static_cast<std::size_t>(std::count(good.begin(), good.end(), 0)); }
};

// Out-degree bar for a good vertex: 0.9 r rounded up.
constexpr int good_vertex_bar(int r) { return (9 * r + 9) / 10; }

inline InfectionGraph infection_graph(const Configuration& cfg, const Neighbourhood& nbhd,
                                      SelectionRule rule = SelectionRule::earliest_then_lexicographic,
                                      std::uint64_t seed = 0) {
  if (!is_closed(cfg, nbhd)) throw std::invalid_argument("infection graph needs a closed configuration");
  const std::size_t n = cfg.times.size();
  const int r = nbhd.threshold();
  InfectionGraph g;
  g.in_edges.resize(n);
  g.out_degree.assign(n, 0);
  g.good.assign(n, -1);
  g.bar = good_vertex_bar(r);
  const detail::NeighbourWalker walker(cfg.domain, nbhd.offsets());
  Xoshiro256ss rng(seed);
  struct Candidate {
    std::int32_t time;
    std::size_t offset_pos;
    std::size_t site;
  };
  std::vector<Candidate> cands;
  for (std::size_t v = 0; v < n; ++v) {
    const std::int32_t tv = cfg.times[v];
    if (tv <= 0) continue;
    cands.clear();
    walker.for_each(v, [&](std::size_t u, std::size_t j) {
      if (cfg.times[u] >= 0 && cfg.times[u] < tv) cands.push_back({cfg.times[u], j, u});
    });
    if (cands.size() < static_cast<std::size_t>(r)) {
      throw std::invalid_argument("site " + to_string(cfg.domain.point(v)) +
                                  " lacks r earlier-infected neighbours; infection times are inconsistent");
    }
    if (rule == SelectionRule::earliest_then_lexicographic) {
      std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        return a.time != b.time ? a.time < b.time : a.offset_pos < b.offset_pos;
      });
    } else {
      shuffle(std::span<Candidate>(cands), rng);
    }
    for (int i = 0; i < r; ++i) {
      g.in_edges[v].push_back(cands[static_cast<std::size_t>(i)].site);
      ++g.out_degree[cands[static_cast<std::size_t>(i)].site];
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (cfg.times[v] > 0) g.good[v] = g.out_degree[v] >= g.bar ? 1 : 0;
  }
  return g;
}

}  // namespace bperc
