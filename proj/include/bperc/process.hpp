#pragma once

// The random-permutation arrival process on the torus: sites are added one at
// a time in a uniformly random order while the closure is maintained
// incrementally; tau is the first time the closure is the whole torus.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "bperc/domain.hpp"
#include "bperc/dynamics.hpp"
#include "bperc/geometry.hpp"
#include "bperc/rng.hpp"

namespace bperc {

// Bumped whenever the generator, the seed derivation or the record columns
// change.
inline constexpr int kRecordSchemaVersion = 1;

struct ProcessRecord {
  std::string model;
  std::int64_t n{0};
  std::uint64_t seed{0};
  std::uint64_t tau{0};
  std::uint64_t closure_before{0};  // |[A(tau - 1)]|
  double jump_ratio{0};             // closure_before / tau
  double tau_scaled{0};             // tau ln(n) / n^2
  double wall_ms{0};

  // Equality ignores wall time.
  bool same_outcome(const ProcessRecord& o) const {
    return std::tie(model, n, seed, tau, closure_before) == std::tie(o.model, o.n, o.seed, o.tau, o.closure_before) &&
           jump_ratio == o.jump_ratio && tau_scaled == o.tau_scaled;
  }
};

// Closure of a growing set on a torus, maintained by cascading each arrival.
// The infected set is always [A] for the set A of sites added so far.
class IncrementalClosure {
 public:
  IncrementalClosure(const Domain& torus, const Neighbourhood& nbhd)
      : domain_(torus),
        threshold_(nbhd.threshold()),
        back_offsets_(detail::negated(nbhd.offsets())),
        walker_(domain_, back_offsets_),
        counts_(torus.size(), 0),
        infected_(torus.size(), 0) {
    if (!torus.is_torus()) throw ConfigError("the arrival process runs on a torus");
    torus.check_compatible(nbhd);
  }
  IncrementalClosure(const IncrementalClosure&) = delete;
  IncrementalClosure& operator=(const IncrementalClosure&) = delete;

  // Adds site i; returns how many sites became infected (0 if already in the
  // closure).
  std::size_t add(std::size_t i) {
    if (infected_[i]) return 0;
    infected_[i] = 1;
    stack_.push_back(i);
    std::size_t added = 1;
    while (!stack_.empty()) {
      const std::size_t z = stack_.back();
      stack_.pop_back();
      walker_.for_each(z, [&](std::size_t j, std::size_t) {
        if (++counts_[j] >= threshold_ && !infected_[j]) {
          infected_[j] = 1;
          stack_.push_back(j);
          ++added;
        }
      });
    }
    infected_count_ += added;
    return added;
  }

  std::size_t infected_count() const { return infected_count_; }
  bool full() const { return infected_count_ == infected_.size(); }
  bool infected(std::size_t i) const { return infected_[i] != 0; }
  const std::vector<std::uint8_t>& infected_mask() const { return infected_; }

 private:
  Domain domain_;
  int threshold_;
  std::vector<Point> back_offsets_;
  detail::NeighbourWalker walker_;
  std::vector<std::int32_t> counts_;
  std::vector<std::uint8_t> infected_;
  std::vector<std::size_t> stack_;
  std::size_t infected_count_{0};
};

// Row-major site indices in arrival order: a seeded Fisher-Yates shuffle of
// 0..n^2-1.
inline std::vector<std::uint32_t> random_arrival_order(std::int64_t n, std::uint64_t seed) {
  std::vector<std::uint32_t> order(static_cast<std::size_t>(n * n));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::uint32_t>(i);
  Xoshiro256ss rng(seed);
  shuffle(std::span<std::uint32_t>(order), rng);
  return order;
}

inline bool is_permutation_of_sites(std::span<const std::uint32_t> order) {
  std::vector<std::uint8_t> seen(order.size(), 0);
  for (auto i : order) {
    if (i >= order.size() || seen[i]) return false;
    seen[i] = 1;
  }
  return true;
}

inline ProcessRecord make_record(const std::string& model, std::int64_t n, std::uint64_t seed, std::uint64_t tau,
                                 std::uint64_t closure_before) {
  ProcessRecord rec;
  rec.model = model;
  rec.n = n;
  rec.seed = seed;
  rec.tau = tau;
  rec.closure_before = closure_before;
  rec.jump_ratio = static_cast<double>(closure_before) / static_cast<double>(tau);
  rec.tau_scaled = static_cast<double>(tau) * std::log(static_cast<double>(n)) / static_cast<double>(n * n);
  return rec;
}

// Runs the process for a given arrival order (row-major site indices).
inline ProcessRecord run_with_order(const Neighbourhood& nbhd, std::int64_t n, std::span<const std::uint32_t> order,
                                    std::uint64_t seed = 0) {
  const auto start = std::chrono::steady_clock::now();
  const Domain torus = Domain::torus(n);
  if (order.size() != torus.size()) throw std::invalid_argument("arrival order must list every site once");
  IncrementalClosure state(torus, nbhd);
  std::uint64_t t = 0;
  std::uint64_t before = 0;
  for (auto site : order) {
    before = state.infected_count();
    ++t;
    state.add(site);
    if (state.full()) break;
  }
  if (!state.full()) throw std::logic_error("closure of the whole torus is not full");
  ProcessRecord rec = make_record(nbhd.id(), n, seed, t, before);
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

inline ProcessRecord run_once(const Neighbourhood& nbhd, std::int64_t n, std::uint64_t seed) {
  Domain::torus(n).check_compatible(nbhd);
  const auto order = random_arrival_order(n, seed);
  return run_with_order(nbhd, n, order, seed);
}

struct AuditReport {
  bool ok{true};
  std::size_t checkpoints{0};
  std::string failure;
};

// Replays a run and cross-checks it against from-scratch closures: the
// arrival order is a permutation; at `checkpoints` random times t <= tau the
// incremental set equals closure(A(t)); closure(A(tau - 1)) is not full and
// has closure_before sites; closure(A(tau)) is full.
inline AuditReport audit_run(const Neighbourhood& nbhd, std::int64_t n, std::span<const std::uint32_t> order,
                             const ProcessRecord& rec, std::size_t checkpoints = 32, std::uint64_t audit_seed = 1) {
  AuditReport report;
  auto fail = [&](std::string why) {
    report.ok = false;
    report.failure = std::move(why);
    return report;
  };
  if (!is_permutation_of_sites(order)) return fail("arrival order is not a permutation");
  const Domain torus = Domain::torus(n);
  auto sites_until = [&](std::uint64_t t) {
    std::vector<Point> out;
    out.reserve(t);
    for (std::uint64_t i = 0; i < t; ++i) out.push_back(torus.point(order[i]));
    return out;
  };

  // Distinct checkpoint times in [1, tau] (all of them when tau is small).
  Xoshiro256ss rng(audit_seed);
  std::vector<std::uint64_t> times;
  if (rec.tau <= checkpoints) {
    for (std::uint64_t t = 1; t <= rec.tau; ++t) times.push_back(t);
  } else {
    std::unordered_set<std::uint64_t> picked;
    while (picked.size() < checkpoints) picked.insert(1 + rng.bounded(rec.tau));
    times.assign(picked.begin(), picked.end());
    std::sort(times.begin(), times.end());
  }

  IncrementalClosure state(torus, nbhd);
  std::uint64_t t = 0;
  for (auto check : times) {
    while (t < check) state.add(order[t++]);
    const Configuration fresh = closure(torus, nbhd, sites_until(t));
    for (std::size_t i = 0; i < torus.size(); ++i) {
      if (fresh.infected(i) != state.infected(i)) {
        return fail("incremental closure differs from recomputation at t=" + std::to_string(t));
      }
    }
    ++report.checkpoints;
  }
  const Configuration before = closure(torus, nbhd, sites_until(rec.tau - 1));
  if (before.is_full()) return fail("closure of A(tau-1) is already full");
  if (before.infected_count() != rec.closure_before) return fail("closure_before does not match recomputation");
  if (!closure(torus, nbhd, sites_until(rec.tau)).is_full()) return fail("closure of A(tau) is not full");
  return report;
}

// Fraction of records with closure_before >= tau (1 + c / ln n).
inline double jump_event_rate(std::span<const ProcessRecord> records, double c) {
  if (records.empty()) throw std::invalid_argument("jump event rate of zero records");
  const std::int64_t n = records.front().n;
  std::size_t hits = 0;
  for (const auto& r : records) {
    if (r.n != n) throw std::invalid_argument("jump event rate needs records with a common n");
    const double bar = static_cast<double>(r.tau) * (1.0 + c / std::log(static_cast<double>(n)));
    if (static_cast<double>(r.closure_before) >= bar) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

// Linear interpolation between order statistics (R type 7).
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of no values");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return values[lo] + (values[hi] - values[lo]) * (pos - static_cast<double>(lo));
}

struct StatSummary {
  double q25{0}, median{0}, q75{0}, mean{0}, variance{0};

  double iqr_over_median() const { return median == 0 ? 0 : (q75 - q25) / median; }

  static StatSummary of(const std::vector<double>& v) {
    StatSummary s;
    s.q25 = quantile(v, 0.25);
    s.median = quantile(v, 0.5);
    s.q75 = quantile(v, 0.75);
    double sum = 0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.variance = v.size() > 1 ? ss / static_cast<double>(v.size() - 1) : 0;
    return s;
  }
};

struct GroupSummary {
  std::string model;
  std::int64_t n{0};
  std::size_t count{0};
  StatSummary tau_scaled;
  StatSummary jump_ratio;
  StatSummary closure_fraction;  // closure_before / n^2
  // threshold -> fraction of runs with closure_before >= threshold * tau
  std::map<double, double> jump_fractions;
};

// Per-(model, n) aggregates, computed from the full record list.
inline std::vector<GroupSummary> summarise(std::span<const ProcessRecord> records,
                                           std::span<const double> thresholds = {}) {
  if (records.empty()) throw std::invalid_argument("summary of zero runs");
  std::map<std::pair<std::string, std::int64_t>, std::vector<const ProcessRecord*>> groups;
  for (const auto& r : records) groups[{r.model, r.n}].push_back(&r);
  std::vector<GroupSummary> out;
  for (const auto& [key, recs] : groups) {
    GroupSummary g;
    g.model = key.first;
    g.n = key.second;
    g.count = recs.size();
    std::vector<double> ts, jr, cf;
    for (const auto* r : recs) {
      ts.push_back(r->tau_scaled);
      jr.push_back(r->jump_ratio);
      cf.push_back(static_cast<double>(r->closure_before) / static_cast<double>(r->n * r->n));
    }
    g.tau_scaled = StatSummary::of(ts);
    g.jump_ratio = StatSummary::of(jr);
    g.closure_fraction = StatSummary::of(cf);
    for (double thr : thresholds) {
      std::size_t hits = 0;
      for (const auto* r : recs) {
        if (static_cast<double>(r->closure_before) >= thr * static_cast<double>(r->tau)) ++hits;
      }
      g.jump_fractions[thr] = static_cast<double>(hits) / static_cast<double>(recs.size());
    }
    out.push_back(std::move(g));
  }
  return out;
}

struct SweepConfig {
  std::vector<NeighbourhoodSpec> models;
  std::vector<std::int64_t> ns;
  std::size_t runs{1};  // per (model, n)
  std::uint64_t master_seed{0};
  unsigned parallelism{1};
  std::vector<double> thresholds{1.1, 1.5, 2.0};
};

struct SweepResult {
  std::vector<ProcessRecord> records;  // model-major, then n, then run index
  std::vector<GroupSummary> summaries;
};

// Runs run_once over models x ns x runs. Run k of the Cartesian product uses
// seed derive_seed(master_seed, k), so results do not depend on parallelism.
inline SweepResult run_sweep(const SweepConfig& cfg) {
  std::vector<Neighbourhood> nbhds;
  for (const auto& spec : cfg.models) nbhds.push_back(build_neighbourhood(spec));
  struct Job {
    std::size_t model;
    std::int64_t n;
  };
  std::vector<Job> jobs;
  for (std::size_t m = 0; m < nbhds.size(); ++m) {
    for (auto n : cfg.ns) {
      Domain::torus(n).check_compatible(nbhds[m]);
      for (std::size_t k = 0; k < cfg.runs; ++k) jobs.push_back({m, n});
    }
  }
  if (jobs.empty()) throw std::invalid_argument("sweep with zero runs");
  SweepResult result;
  result.records.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      result.records[k] = run_once(nbhds[jobs[k].model], jobs[k].n, derive_seed(cfg.master_seed, k));
    }
  };
  const unsigned threads = std::max(1u, cfg.parallelism);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  result.summaries = summarise(result.records, cfg.thresholds);
  return result;
}

}  // namespace bperc
