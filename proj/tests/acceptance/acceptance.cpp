// Acceptance run: one PASS/FAIL line per criterion, with its measured
// numbers and wall time. Exit status 1 if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bperc/droplets.hpp"
#include "bperc/dynamics.hpp"
#include "bperc/process.hpp"
#include "bperc/quasi_droplets.hpp"
#include "bperc/scenarios.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace bperc;

namespace {

const std::filesystem::path kCorpus = BPERC_CORPUS_DIR;

struct Outcome {
  bool ok{true};
  std::string detail;
};

class Report {
 public:
  explicit Report(std::set<int> only) : only_(std::move(only)) {}

  void run(int id, const char* title, double limit_s, const std::function<Outcome()>& body) {
    if (!only_.empty() && !only_.count(id)) return;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = body();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > limit_s) {
      out.ok = false;
      out.detail += "; over the time limit";
    }
    failed_ += out.ok ? 0 : 1;
    std::printf("[%s] %2d %s: %s (%.2f s, limit %.0f s)\n", out.ok ? "PASS" : "FAIL", id, title, out.detail.c_str(), secs,
                limit_s);
    std::fflush(stdout);
  }
  int failed() const { return failed_; }

 private:
  std::set<int> only_;
  int failed_{0};
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

template <typename T>
std::string list(const std::vector<T>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if constexpr (std::is_floating_point_v<T>) {
      out += (i ? ", " : "") + fmt(v[i]);
    } else {
      out += (i ? ", " : "") + std::to_string(v[i]);
    }
  }
  return out + "]";
}

Neighbourhood named(NamedModel m) { return build_neighbourhood(NeighbourhoodSpec::named(m)); }

// ---- 1 -------------------------------------------------------------------

Outcome closure_oracle_equivalence() {
  std::vector<NeighbourhoodSpec> specs;
  for (auto m : {NamedModel::square, NamedModel::triangular, NamedModel::boxtimes, NamedModel::diamond,
                 NamedModel::square4}) {
    specs.push_back(NeighbourhoodSpec::named(m));
  }
  for (int s : {2, 4, 8}) specs.push_back(NeighbourhoodSpec::lp_ball(Rational(1), Rational(s)));
  for (int s : {3, 5, 8}) specs.push_back(NeighbourhoodSpec::lp_ball(Rational(2), Rational(s)));
  specs.push_back(NeighbourhoodSpec::lp_ball(std::nullopt, Rational(5, 2)));
  for (int s : {4, 8}) specs.push_back(NeighbourhoodSpec::lp_ball(std::nullopt, Rational(s)));
  specs.push_back(NeighbourhoodSpec::lp_ball(Rational(3, 2), Rational(6)));

  std::vector<Neighbourhood> nbhds;
  for (const auto& s : specs) nbhds.push_back(build_neighbourhood(s));
  Xoshiro256ss rng(1);
  const std::size_t instances = 80 * specs.size();
  std::size_t mismatches = 0;
  std::string first;
  for (std::size_t k = 0; k < instances; ++k) {
    const auto& nb = nbhds[k % nbhds.size()];
    const std::int64_t lo = 2 * nb.ceil_radius() + 1;
    const std::int64_t side = lo + static_cast<std::int64_t>(rng.bounded(static_cast<std::uint64_t>(64 - lo + 1)));
    const Domain d = k % 2 ? Domain::torus(side) : Domain::rect(0, side - 1, 0, side - 1);
    const double density = 0.01 + 0.49 * rng.uniform();
    const auto a = support::random_sites(d, density, rng);
    const auto cfg = closure(d, nb, a);
    const auto expected = oracle::naive_closure(support::grid_of(d), support::offsets_of(nb), nb.threshold(), a);
    if (cfg.times != expected) {
      if (!mismatches++) first = specs[k % specs.size()].id() + " n=" + std::to_string(side);
    }
  }
  return {mismatches == 0, std::to_string(instances) + " instances over " + std::to_string(specs.size()) +
                               " models, " + std::to_string(mismatches) + " mismatches" +
                               (first.empty() ? "" : " (first: " + first + ")")};
}

// ---- 2 -------------------------------------------------------------------

std::set<Point> union_of(const std::vector<Droplet>& ds) {
  std::set<Point> out;
  for (const auto& d : ds) {
    for (Point p : d.points()) out.insert(p);
  }
  return out;
}

Outcome droplet_union_equals_closure() {
  Xoshiro256ss rng(2);
  const std::size_t instances = 600;
  std::size_t mismatches = 0, sites = 0;
  for (std::size_t k = 0; k < instances; ++k) {
    const auto m = k % 2 ? DropletModel::triangular : DropletModel::square;
    const std::int64_t n = 8 + static_cast<std::int64_t>(rng.bounded(57));
    const auto a = support::random_sites(Domain::rect(0, n - 1, 0, n - 1), 0.01 + 0.19 * rng.uniform(), rng);
    sites += a.size();
    // both closures stay inside the droplet hull of A, which this window
    // contains with room to spare
    const std::int64_t pad = m == DropletModel::triangular ? n + 2 : 2;
    const Domain window = Domain::rect(-pad, n - 1 + pad, -pad, n - 1 + pad);
    const auto cfg = closure(window, droplet_neighbourhood(m), a);
    const auto inf = cfg.infected_sites(true);
    const std::set<Point> expected(inf.begin(), inf.end());
    const auto first = droplet_algorithm(a, m, MergeStrategy::first_found);
    const auto random = droplet_algorithm(a, m, MergeStrategy::seeded_random, k);
    if (union_of(first) != expected || union_of(random) != expected) ++mismatches;
  }
  return {mismatches == 0, std::to_string(instances) + " instances (" + std::to_string(sites) +
                               " sites), two merge strategies, " + std::to_string(mismatches) + " mismatches"};
}

// ---- 3 -------------------------------------------------------------------

Outcome single_site_growth() {
  Xoshiro256ss rng(3);
  std::string detail;
  bool ok = true;
  for (auto m : {DropletModel::square, DropletModel::triangular}) {
    const auto& nb = droplet_neighbourhood(m);
    std::size_t checked = 0, failures = 0, degenerate = 0;
    while (checked < 1500) {
      const auto d = support::random_droplet(m, rng, 40);
      const auto x = support::random_adjacent_site(d, nb, rng);
      if (!x) continue;
      ++checked;
      if (support::has_degenerate_side(d)) ++degenerate;
      if (!single_site_growth_check(d, *x)) ++failures;
    }
    ok = ok && failures == 0 && (m == DropletModel::square || degenerate > 0);
    detail += std::string(detail.empty() ? "" : "; ") + droplet_model_name(m) + " " + std::to_string(checked) +
              " pairs, " + std::to_string(degenerate) + " with a degenerate side, " + std::to_string(failures) +
              " failures";
  }
  return {ok, detail};
}

// ---- 4 -------------------------------------------------------------------

Outcome figure2_claims() {
  const auto full = load_scenario(kCorpus / "square4_figure2.json");
  const auto no_blue = load_scenario(kCorpus / "square4_figure2_no_blue.json");
  const auto no_red = load_scenario(kCorpus / "square4_figure2_no_red.json");
  const auto nb = named(NamedModel::square4);

  const bool fills = closure(full.domain, nb, full.infected).is_full();
  const auto nb_closure = closure(no_blue.domain, nb, no_blue.infected);
  const bool stuck = nb_closure.infected_count() == no_blue.infected.size();
  std::set<Point> expected(no_red.infected.begin(), no_red.infected.end());
  for (Point p : no_red.marked.at("plus")) expected.insert(p);
  const auto nr = closure(no_red.domain, nb, no_red.infected).infected_sites(true);
  const bool exactly_plus = std::set<Point>(nr.begin(), nr.end()) == expected;
  const bool scenarios = run_scenario(full).passed() && run_scenario(no_blue).passed() && run_scenario(no_red).passed();
  return {fills && stuck && exactly_plus && scenarios,
          std::string("full configuration fills the window: ") + (fills ? "yes" : "no") +
              "; without blue no growth: " + (stuck ? "yes" : "no") + "; without red closure = initial + plus sites: " +
              (exactly_plus ? "yes" : "no")};
}

// ---- 5 -------------------------------------------------------------------

Outcome figure3() {
  const auto c = figure3_counts(kCorpus);
  const std::vector<std::size_t> got(c.begin(), c.end());
  return {got == std::vector<std::size_t>{16, 16, 14}, "counts " + list(got) + ", expected [16, 16, 14]"};
}

// ---- 6 -------------------------------------------------------------------

Outcome thresholds_and_stability() {
  bool ok = true;
  std::string detail;
  const std::pair<NamedModel, int> expected_r[] = {
      {NamedModel::square, 2}, {NamedModel::triangular, 3}, {NamedModel::square4, 17}, {NamedModel::boxtimes, 4}};
  for (const auto& [m, r] : expected_r) {
    const auto nb = named(m);
    const int crit = critical_threshold(nb.offsets());
    ok = ok && nb.threshold() == r && crit == r;
    detail += std::string(model_name(m)) + " r=" + std::to_string(crit) + " ";
  }
  const auto sq = stable_set_name(stability_report(named(NamedModel::square)));
  const auto tri = stable_set_name(stability_report(named(NamedModel::triangular)));
  ok = ok && sq == "S_square" && tri == "S_triangle";
  detail += "; square " + sq + ", triangular " + tri;

  std::size_t lp_checked = 0, lp_bad = 0;
  std::string first_bad;
  for (int s = 4; s <= 12; ++s) {
    for (const auto& spec : {NeighbourhoodSpec::lp_ball(Rational(1), Rational(s)),
                             NeighbourhoodSpec::lp_ball(Rational(2), Rational(s)),
                             NeighbourhoodSpec::lp_ball(std::nullopt, Rational(s))}) {
      const auto nb = build_neighbourhood(spec);
      const auto rep = stability_report(nb);
      const auto name = stable_set_name(rep);
      // independent scan of the stable set over all short directions
      const auto scan = oracle::scan_stable(support::offsets_of(nb), nb.threshold(), 2 * nb.max_coordinate() + 1);
      std::set<Point> lib;
      if (const auto finite = rep.finite_stable_set()) {
        for (const auto& u : *finite) lib.insert(u.vec());
      }
      const bool in_range = 2 * nb.threshold() >= s * s && nb.threshold() <= 2 * s * s;
      const bool good = (name == "S_square" || name == "S_boxtimes") && !scan.arc && scan.directions == lib && in_range;
      ++lp_checked;
      if (!good) {
        ++lp_bad;
        if (first_bad.empty()) first_bad = spec.id() + " " + name + " r=" + std::to_string(nb.threshold());
      }
    }
  }
  ok = ok && lp_bad == 0;
  detail += "; lp balls " + std::to_string(lp_checked) + " checked, " + std::to_string(lp_bad) + " outside S_square/S_boxtimes or r range" +
            (first_bad.empty() ? "" : " (first: " + first_bad + ")");
  return {ok, detail};
}

// ---- 7 -------------------------------------------------------------------

Outcome row_major_permutation() {
  const auto sq = named(NamedModel::square);
  bool ok = true;
  std::string detail;
  for (std::int64_t n : {5, 8, 16, 64}) {
    std::vector<std::uint32_t> order(static_cast<std::size_t>(n * n));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::uint32_t>(i);
    const auto rec = run_with_order(sq, n, order);
    const auto audit = audit_run(sq, n, order, rec);
    const bool good = rec.tau == static_cast<std::uint64_t>((n - 1) * (n - 1)) &&
                      rec.closure_before == static_cast<std::uint64_t>(n * (n - 2)) && audit.ok;
    ok = ok && good;
    detail += (detail.empty() ? "" : "; ") + std::string("n=") + std::to_string(n) + " tau=" + std::to_string(rec.tau) +
              " closure_before=" + std::to_string(rec.closure_before) + " audit " + (audit.ok ? "ok" : audit.failure);
  }
  return {ok, detail};
}

// ---- 8, 9 ----------------------------------------------------------------

constexpr std::size_t kSquareSeeds = 400;
const std::vector<std::int64_t> kSquareSizes{64, 128, 256, 512};

SweepResult square_sweep() {
  SweepConfig cfg;
  cfg.models = {NeighbourhoodSpec::named(NamedModel::square)};
  cfg.ns = kSquareSizes;
  cfg.runs = kSquareSeeds;
  cfg.master_seed = 8;
  cfg.thresholds = {2.0};
  return run_sweep(cfg);
}

Outcome jump_trend(const SweepResult& sweep) {
  std::vector<double> medians, at_least_double;
  for (const auto& g : sweep.summaries) {
    medians.push_back(g.jump_ratio.median);
    at_least_double.push_back(g.jump_fractions.at(2.0));
  }
  bool bounded = true, slack = true, fraction = true;
  for (std::size_t i = 0; i < medians.size(); ++i) {
    bounded = bounded && medians[i] <= 1.5;
    if (i > 0) {
      slack = slack && medians[i] <= 1.10 * medians[i - 1];
      fraction = fraction && at_least_double[i] <= at_least_double[i - 1];
    }
  }
  return {bounded && slack && fraction,
          std::to_string(kSquareSeeds) + " seeds per n " + list(kSquareSizes) + "; median jump_ratio " + list(medians) +
              (bounded ? "" : " (above 1.5)") + ", non-increasing within 10%: " + (slack ? "yes" : "no") +
              "; fraction with closure_before >= 2 tau " + list(at_least_double) +
              ", non-increasing: " + (fraction ? "yes" : "no")};
}

Outcome concentration_trend(const SweepResult& sweep) {
  std::vector<double> spread;
  for (const auto& g : sweep.summaries) spread.push_back(g.tau_scaled.iqr_over_median());
  bool ok = true;
  for (std::size_t i = 1; i < spread.size(); ++i) ok = ok && spread[i] <= 1.15 * spread[i - 1];
  return {ok, "IQR/median of tau ln n / n^2 " + list(spread) + ", non-increasing within 15% per doubling: " +
                  (ok ? "yes" : "no")};
}

// ---- 10 ------------------------------------------------------------------

Outcome diamond_parity() {
  SweepConfig cfg;
  cfg.models = {NeighbourhoodSpec::named(NamedModel::diamond)};
  cfg.ns = {127, 128, 255, 256};
  cfg.runs = 200;
  cfg.master_seed = 10;
  const auto res = run_sweep(cfg);
  bool ok = true;
  std::vector<double> medians;
  for (const auto& g : res.summaries) {
    const double m = g.closure_fraction.median;
    medians.push_back(m);
    ok = ok && (g.n % 2 == 0 ? (m >= 0.4 && m <= 0.6) : m <= 0.1);
  }
  return {ok, "200 seeds; median closure_before/n^2 at n=[127, 128, 255, 256]: " + list(medians) +
                  " (even in [0.4, 0.6], odd <= 0.1)"};
}

// ---- 11 ------------------------------------------------------------------

APrimeQuery hashed_sites(std::uint64_t seed, std::uint64_t per_mille) {
  return fixed_a_prime([=](Point p) {
    const auto key = static_cast<std::uint64_t>(p.x) * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint64_t>(p.y);
    return SplitMix64(key ^ seed).next() % 1000 < per_mille;
  });
}

// Unstable step check by a naive fixed point over the new lattice points:
// sweep them forwards and backwards, infecting any point with at least r
// infected neighbours among the old droplet and the points already infected,
// until a sweep changes nothing.
bool fills_by_restricted_closure(const QuasiDroplet& prev, const QuasiDroplet& next, const Neighbourhood& nb) {
  auto added = new_lattice_points(prev, next);
  std::set<Point> on;
  const std::set<Point> region(added.begin(), added.end());
  for (bool changed = true; changed;) {
    changed = false;
    for (Point p : added) {
      if (on.count(p)) continue;
      int count = 0;
      for (Point k : nb.offsets()) {
        const Point q = p + k;
        if (region.count(q) ? on.count(q) != 0 : prev.contains(q)) ++count;
      }
      if (count >= nb.threshold()) {
        on.insert(p);
        changed = true;
      }
    }
    std::reverse(added.begin(), added.end());
  }
  return on.size() == added.size();
}

Outcome extension_invariants() {
  Xoshiro256ss rng(11);
  std::size_t runs = 0, steps = 0, unstable = 0, stable = 0, violations = 0;
  std::string first;
  const NamedModel models[] = {NamedModel::square, NamedModel::triangular, NamedModel::boxtimes};
  for (int rep = 0; rep < 12; ++rep) {
    for (auto m : models) {
      for (std::int64_t s = 1; s <= 6; ++s) {
        const QuasiModel model(named(m), s);
        const ExtensionParams params(default_big_c(model), model.nbhd);
        const auto start = random_quasi_droplet(model, params, rng);
        if (!is_non_degenerate(start, model, params)) {
          ++violations;
          continue;
        }
        ExtensionOptions opts;
        opts.max_steps = 300;
        const auto trace =
            extension_algorithm(start, model, hashed_sites(rng.next(), 5 + rng.bounded(40)), params, opts);
        ++runs;
        auto flag = [&](const std::string& what, std::size_t i) {
          if (!violations++) {
            first = std::string(model_name(m)) + " s=" + std::to_string(s) + " step " + std::to_string(i) + ": " + what;
          }
        };
        for (std::size_t i = 0; i < trace.steps.size(); ++i) {
          const auto& prev = trace.droplets[i];
          const auto& next = trace.droplets[i + 1];
          const auto& step = trace.steps[i];
          ++steps;
          for (const auto& [u, mu] : prev.constraints()) {
            if (!next.offset(u) || *next.offset(u) < mu) flag("not nested", i);
          }
          if (next.lattice_count() < prev.lattice_count()) flag("point count fell", i);
          for (const auto& u : model.quasi_stable) {
            if (!next.side_at_least(u, params.nondegenerate_unstable())) flag("side below C^(1/3)", i);
          }
          if (step.kind == ExtensionKind::unstable) {
            ++unstable;
            if (!fills_by_restricted_closure(prev, next, model.nbhd)) flag("unstable step does not self-fill", i);
          } else {
            ++stable;
          }
        }
      }
    }
  }
  return {violations == 0 && runs >= 200,
          std::to_string(runs) + " traces (s = 1..6), " + std::to_string(steps) + " steps (" + std::to_string(unstable) +
              " unstable, " + std::to_string(stable) + " stable), " + std::to_string(violations) + " violations" +
              (first.empty() ? "" : " (first: " + first + ")")};
}

}  // namespace

// With arguments, runs only the listed criteria.
int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  Report report(only);
  report.run(1, "closure equals synchronous oracle", 120, closure_oracle_equivalence);
  report.run(2, "droplet union equals closure", 120, droplet_union_equals_closure);
  report.run(3, "single-site droplet growth", 60, single_site_growth);
  report.run(4, "square4 counterexample claims", 1, figure2_claims);
  report.run(5, "square4 local counts", 1, figure3);
  report.run(6, "thresholds and stable sets", 30, thresholds_and_stability);
  report.run(7, "row-major arrival order", 10, row_major_permutation);
  SweepResult sweep;
  report.run(8, "jump ratio trend", 1800, [&] {
    sweep = square_sweep();
    return jump_trend(sweep);
  });
  report.run(9, "tau concentration trend", 1800, [&] {
    if (sweep.summaries.empty()) sweep = square_sweep();
    return concentration_trend(sweep);
  });
  report.run(10, "diamond parity split", 600, diamond_parity);
  report.run(11, "extension algorithm invariants", 300, extension_invariants);
  std::printf("%d failed\n", report.failed());
  return report.failed() == 0 ? 0 : 1;
}
