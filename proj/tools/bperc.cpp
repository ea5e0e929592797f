// bperc: command-line front end.
//
//   bperc closure    --model square --box 5 --infected "(0,0),(1,1)"
//   bperc threshold  --lp 2 --s 8 --critical
//   bperc tau        --model square --n 64 --seed 7 [--audit]
//   bperc sweep      --model square --n 64,128 --runs 100 --master-seed 1
//   bperc verify     corpus/
//   bperc droplets   --model triangular --box 20 --infected-file sites.txt
//   bperc extend     --model square --q 3 --random 1
//   bperc generate   lemma31 --n 64 --eps 0.9
//
// Exit codes: 0 success, 1 an assertion or check failed, 2 usage error or
// invalid input. Parallelism comes from --threads or BPERC_THREADS.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "bperc/droplets.hpp"
#include "bperc/dynamics.hpp"
#include "bperc/io.hpp"
#include "bperc/process.hpp"
#include "bperc/quasi_droplets.hpp"
#include "bperc/scenarios.hpp"

namespace {

using namespace bperc;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

// Options that never affect results and are left out of the echoed config.
bool is_unechoed(const std::string& name) { return name == "--threads" || name == "--help" || name == "--config"; }

json echo_config(const CLI::App& sub) {
  json opts = json::object();
  for (const CLI::Option* o : sub.get_options()) {
    const std::string name = o->get_name();
    if (name.empty() || is_unechoed(name)) continue;
    const auto res = o->reduced_results();
    if (res.empty()) {
      opts[name] = o->get_default_str().empty() ? json(nullptr) : json(o->get_default_str());
    } else if (res.size() == 1) {
      opts[name] = res.front();
    } else {
      opts[name] = res;
    }
  }
  return {{"subcommand", sub.get_name()}, {"options", opts}};
}

std::string config_comment(const CLI::App& sub) { return "# config: " + echo_config(sub).dump() + "\n"; }

unsigned thread_count(int flag) {
  if (flag > 0) return static_cast<unsigned>(flag);
  if (const char* env = std::getenv("BPERC_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("BPERC_THREADS must be a positive integer, got '") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// "(0,0),(1,-2)" -> sites. Whitespace and separating commas are optional.
std::vector<Point> parse_site_list(const std::string& text) {
  static const std::regex tuple(R"(\s*\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)\s*,?)");
  std::vector<Point> out;
  auto it = text.cbegin();
  std::smatch m;
  while (it != text.cend()) {
    if (std::all_of(it, text.cend(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); })) break;
    if (!std::regex_search(it, text.cend(), m, tuple, std::regex_constants::match_continuous)) {
      throw ConfigError("cannot parse sites at '" + std::string(it, text.cend()) + "'; expected (x,y),(x,y),...");
    }
    out.push_back({std::stoll(m[1].str()), std::stoll(m[2].str())});
    it = m.suffix().first;
  }
  return out;
}

struct ModelOptions {
  std::string model;
  std::string lp;
  std::string s;
  int r{0};

  void add(CLI::App* app, bool allow_lp = true) {
    app->add_option("--model", model, "model id: square, triangular, boxtimes, diamond, square4, lp2_s8, ...");
    if (allow_lp) {
      app->add_option("--lp", lp, "l^p exponent for an lp-ball neighbourhood (a rational or 'inf')");
      app->add_option("--s", s, "lp-ball scale (a rational)");
    }
    app->add_option("--r", r, "threshold override (default: the model's own or the critical threshold)");
  }

  NeighbourhoodSpec spec() const {
    NeighbourhoodSpec out;
    if (!model.empty()) {
      if (!lp.empty() || !s.empty()) throw ConfigError("give either --model or --lp/--s, not both");
      out = parse_model_id(model);
    } else if (!lp.empty() || !s.empty()) {
      if (lp.empty() || s.empty()) throw ConfigError("--lp and --s go together");
      std::optional<Rational> p;
      try {
        if (lp != "inf") p = Rational::parse(lp);
        out = NeighbourhoodSpec::lp_ball(p, Rational::parse(s));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("bad --lp/--s: ") + e.what());
      }
    } else {
      throw ConfigError("a model is required (--model or --lp/--s)");
    }
    if (r != 0) out.threshold = r;
    return out;
  }
};

struct DomainOptions {
  std::int64_t box{-1};
  std::int64_t torus{-1};
  std::vector<std::int64_t> rect;

  void add(CLI::App* app) {
    app->add_option("--box", box, "domain [-d, d]^2");
    app->add_option("--torus", torus, "domain: the n x n torus");
    app->add_option("--rect", rect, "domain xmin,xmax,ymin,ymax")->delimiter(',')->expected(4);
  }
  bool given() const { return box >= 0 || torus >= 0 || !rect.empty(); }
  Domain domain() const {
    const int count = (box >= 0) + (torus >= 0) + !rect.empty();
    if (count != 1) throw ConfigError("give exactly one of --box, --torus, --rect");
    if (box >= 0) return Domain::box(box);
    if (torus >= 0) return Domain::torus(torus);
    return Domain::rect(rect[0], rect[1], rect[2], rect[3]);
  }
};

struct SiteOptions {
  std::optional<std::string> inline_sites;
  std::string file;

  void add(CLI::App* app) {
    app->add_option("--infected", inline_sites, "initial sites, e.g. \"(0,0),(1,1)\"");
    app->add_option("--infected-file", file,
                    "initial sites: JSON ([[x,y],...] or an object with 'infected') or a .#F grid on the domain");
  }

  // Sites and frozen sites (grid files only).
  GridSites read(const std::optional<Domain>& domain) const {
    if (inline_sites && !file.empty()) throw ConfigError("give either --infected or --infected-file");
    if (inline_sites) return {parse_site_list(*inline_sites), {}};
    if (file.empty()) throw ConfigError("initial sites required (--infected or --infected-file)");
    const std::string text = read_file(file);
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && (text[first] == '[' || text[first] == '{')) {
      json j;
      try {
        j = json::parse(text);
      } catch (const json::parse_error& e) {
        throw ConfigError(file + ": " + e.what());
      }
      if (j.is_array()) return {points_from_json(j, file), {}};
      const json& inf = detail::require(j, "infected", file);
      GridSites out;
      if (inf.is_array()) {
        for (std::size_t i = 0; i < inf.size(); ++i) {
          const json& e = inf[i];
          if (!e.is_array() || e.size() < 2) throw ConfigError(file + ".infected: expected [x, y] entries");
          out.infected.push_back(point_from_json(json::array({e[0], e[1]}), file + ".infected"));
        }
      }
      if (j.contains("frozen")) out.frozen = points_from_json(j["frozen"], file + ".frozen");
      return out;
    }
    if (!domain) throw ConfigError("grid input needs a domain (--box, --torus or --rect)");
    return parse_grid(text, *domain);
  }
};

// Smallest rectangle holding the sites (the origin when there are none).
Domain bounding_domain(std::span<const Point> sites) {
  if (sites.empty()) return Domain::rect(0, 0, 0, 0);
  std::int64_t x0 = sites[0].x, x1 = x0, y0 = sites[0].y, y1 = y0;
  for (Point p : sites) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  return Domain::rect(x0, x1, y0, y1);
}

void check_sites_in(const Domain& d, std::span<const Point> sites) {
  for (Point p : sites) {
    if (!d.contains(p)) throw ConfigError("site " + to_string(p) + " lies outside the domain");
  }
}

// ---- closure ---------------------------------------------------------------

struct ClosureCmd {
  ModelOptions model;
  DomainOptions dom;
  SiteOptions sites;
  std::string format{"grid"};

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("closure", "closure of an initial set on a finite domain");
    model.add(c);
    dom.add(c);
    sites.add(c);
    c->add_option("--format", format, "grid or json")->check(CLI::IsMember({"grid", "json"}))->capture_default_str();
    c->callback([this, c] { exit_code = run(*c); });
  }
  int exit_code{kExitOk};

  int run(const CLI::App& sub) {
    const Neighbourhood nbhd = build_neighbourhood(model.spec());
    Domain domain = dom.domain();
    GridSites in = sites.read(domain);
    check_sites_in(domain, in.infected);
    if (!in.frozen.empty()) domain = domain.with_frozen(in.frozen);
    const Configuration cfg = closure(domain, nbhd, in.infected);
    const Configuration initial = make_configuration(domain, in.infected);
    const std::int32_t rounds = std::max(cfg.max_time(), 0);
    if (format == "json") {
      json out = {{"schema_version", 1},
                  {"config", echo_config(sub)},
                  {"model", nbhd.id()},
                  {"threshold", nbhd.threshold()},
                  {"initial_size", initial.closure_size()},
                  {"closure_size", cfg.closure_size()},
                  {"rounds", rounds},
                  {"full", cfg.is_full()},
                  {"configuration", to_json(cfg)}};
      std::cout << out.dump(2) << "\n";
    } else {
      std::cout << config_comment(sub) << "# schema_version: 1\n" << to_grid(cfg);
      std::cout << "# initial_size: " << initial.closure_size() << "\n# closure_size: " << cfg.closure_size()
                << "\n# rounds: " << rounds << "\n";
    }
    return kExitOk;
  }
};

// ---- threshold -------------------------------------------------------------

struct ThresholdCmd {
  ModelOptions model;
  bool critical{false};
  int exit_code{kExitOk};

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("threshold", "threshold, critical threshold and stable directions of a model");
    model.add(c);
    c->add_flag("--critical", critical, "use the critical threshold instead of the model's own");
    c->callback([this, c] { exit_code = run(*c); });
  }

  int run(const CLI::App& sub) {
    const NeighbourhoodSpec spec = model.spec();
    Neighbourhood nbhd = build_neighbourhood(spec);
    const int r_crit = critical_threshold(nbhd.offsets());
    if (critical) {
      std::vector<Point> k(nbhd.offsets().begin(), nbhd.offsets().end());
      nbhd = Neighbourhood(std::move(k), r_crit, nbhd.id());
    }
    const StabilityReport rep = stability_report(nbhd);
    json stable = json::array();
    for (const auto& u : rep.stable_points) stable.push_back(to_json(u.vec()));
    json arcs = json::array();
    for (const auto& a : rep.stable_arcs) {
      arcs.push_back({{"from", to_json(a.from.vec())},
                      {"to", to_json(a.to.vec())},
                      {"from_inclusive", a.from_inclusive},
                      {"to_inclusive", a.to_inclusive},
                      {"full_circle", a.full_circle}});
    }
    json out = {{"schema_version", 1},
                {"config", echo_config(sub)},
                {"model", nbhd.id()},
                {"offsets", nbhd.size()},
                {"threshold", nbhd.threshold()},
                {"critical_threshold", r_crit},
                {"radius", nbhd.radius()},
                {"stable_directions", stable},
                {"stable_arcs", arcs},
                {"stable_set", stable_set_name(rep)}};
    int code = kExitOk;
    if (const auto* ball = std::get_if<LpBall>(&spec.kind)) {
      // r in [s^2/2, 2 s^2] and a stable set of S_square or S_boxtimes are
      // checked from s = 4 on and only reported below that.
      const Rational s2 = ball->s * ball->s;
      const Rational r(nbhd.threshold());
      const bool in_range = s2 / Rational(2) <= r && r <= Rational(2) * s2;
      const std::string name = stable_set_name(rep);
      const bool set_ok = name == "S_square" || name == "S_boxtimes";
      const bool asserted = ball->s >= Rational(4);
      out["scale_check"] = {{"s", ball->s.str()},
                            {"r_lower", (s2 / Rational(2)).str()},
                            {"r_upper", (Rational(2) * s2).str()},
                            {"r_in_range", in_range},
                            {"stable_set_expected", set_ok},
                            {"asserted", asserted}};
      if (asserted && (!in_range || !set_ok)) code = kExitCheckFailed;
    }
    std::cout << out.dump(2) << "\n";
    return code;
  }
};

// ---- tau -------------------------------------------------------------------

struct TauCmd {
  ModelOptions model;
  std::int64_t n{0};
  std::vector<std::uint64_t> seeds;
  bool audit{false};
  bool timing{false};
  std::string format{"csv"};
  int threads{0};
  int exit_code{kExitOk};

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("tau", "percolation time of the random arrival process on the n-torus");
    model.add(c);
    c->add_option("--n", n, "torus side")->required();
    c->add_option("--seed", seeds, "seed(s), comma separated")->delimiter(',')->required();
    c->add_flag("--audit", audit, "cross-check each run against from-scratch closures");
    c->add_flag("--timing", timing, "report wall-clock milliseconds (otherwise 0, keeping output reproducible)");
    c->add_option("--format", format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}))->capture_default_str();
    c->add_option("--threads", threads, "worker threads (default: BPERC_THREADS or all cores)");
    c->callback([this, c] { exit_code = run(*c); });
  }

  int run(const CLI::App& sub) {
    const Neighbourhood nbhd = build_neighbourhood(model.spec());
    Domain::torus(n).check_compatible(nbhd);
    std::vector<ProcessRecord> recs(seeds.size());
    std::vector<AuditReport> audits(seeds.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t k = next++; k < seeds.size(); k = next++) {
        const auto order = random_arrival_order(n, seeds[k]);
        recs[k] = run_with_order(nbhd, n, order, seeds[k]);
        if (!timing) recs[k].wall_ms = 0;
        if (audit) audits[k] = audit_run(nbhd, n, order, recs[k], 32, seeds[k]);
      }
    };
    {
      std::vector<std::jthread> pool;
      for (unsigned i = 0; i < std::min<std::size_t>(thread_count(threads), seeds.size()); ++i) pool.emplace_back(worker);
    }
    int code = kExitOk;
    if (format == "csv") {
      std::cout << config_comment(sub) << kRecordCsvHeader << "\n";
      for (const auto& r : recs) std::cout << to_csv_row(r) << "\n";
    } else {
      std::cout << json{{"schema_version", kRecordSchemaVersion}, {"config", echo_config(sub)}}.dump() << "\n";
      for (const auto& r : recs) std::cout << to_json(r).dump() << "\n";
    }
    if (audit) {
      for (std::size_t k = 0; k < recs.size(); ++k) {
        if (!audits[k].ok) code = kExitCheckFailed;
        const std::string line = "audit seed=" + std::to_string(seeds[k]) + ": " +
                                 (audits[k].ok ? "ok (" + std::to_string(audits[k].checkpoints) + " checkpoints)"
                                               : "FAILED " + audits[k].failure);
        if (format == "csv") {
          std::cout << "# " << line << "\n";
        } else {
          std::cout << json{{"audit", line}}.dump() << "\n";
        }
      }
    }
    return code;
  }
};

// ---- sweep -----------------------------------------------------------------

struct SweepCmd {
  std::vector<std::string> models;
  std::vector<std::int64_t> ns;
  std::size_t runs{1};
  std::uint64_t master_seed{0};
  std::vector<double> thresholds{1.1, 1.5, 2.0};
  std::vector<double> jump_c;
  std::string records_path{"-"};
  std::string summary_path;
  std::string format{"csv"};
  bool timing{false};
  int threads{0};
  int exit_code{kExitOk};

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("sweep", "Monte-Carlo sweep over models x n x runs");
    c->add_option("--model", models, "model ids, comma separated")->delimiter(',')->required();
    c->add_option("--n", ns, "torus sides, comma separated")->delimiter(',')->required();
    c->add_option("--runs", runs, "runs per (model, n)")->capture_default_str();
    c->add_option("--master-seed", master_seed, "run k uses derive_seed(master, k)")->capture_default_str();
    c->add_option("--thresholds", thresholds, "report the fraction of runs with closure_before >= t * tau")
        ->delimiter(',')
        ->capture_default_str();
    c->add_option("--jump-c", jump_c, "report the rate of closure_before >= tau (1 + c / ln n)")->delimiter(',');
    c->add_option("--records", records_path, "records output path, '-' for stdout")->capture_default_str();
    c->add_option("--summary", summary_path, "summary JSON output path ('-' for stdout)");
    c->add_option("--format", format, "records as csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}))->capture_default_str();
    c->add_flag("--timing", timing, "report wall-clock milliseconds");
    c->add_option("--threads", threads, "worker threads (default: BPERC_THREADS or all cores)");
    c->callback([this, c] { exit_code = run(*c); });
  }

  static void write_to(const std::string& path, const std::string& text) {
    if (path == "-") {
      std::cout << text;
      return;
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
  }

  int run(const CLI::App& sub) {
    SweepConfig cfg;
    for (const auto& m : models) cfg.models.push_back(parse_model_id(m));
    cfg.ns = ns;
    cfg.runs = runs;
    cfg.master_seed = master_seed;
    cfg.parallelism = thread_count(threads);
    cfg.thresholds = thresholds;
    SweepResult res = run_sweep(cfg);
    if (!timing) {
      for (auto& r : res.records) r.wall_ms = 0;
    }
    if (records_path != "-" || summary_path != "-") {
      std::ostringstream rec;
      if (format == "csv") {
        rec << config_comment(sub) << kRecordCsvHeader << "\n";
        for (const auto& r : res.records) rec << to_csv_row(r) << "\n";
      } else {
        rec << json{{"schema_version", kRecordSchemaVersion}, {"config", echo_config(sub)}}.dump() << "\n";
        for (const auto& r : res.records) rec << to_json(r).dump() << "\n";
      }
      write_to(records_path, rec.str());
    }
    if (!summary_path.empty()) {
      json s = summaries_to_json(res.summaries);
      s["config"] = echo_config(sub);
      for (std::size_t g = 0; g < res.summaries.size(); ++g) {
        const auto& grp = res.summaries[g];
        std::vector<ProcessRecord> mine;
        for (const auto& r : res.records) {
          if (r.model == grp.model && r.n == grp.n) mine.push_back(r);
        }
        json rates = json::array();
        for (double c : jump_c) rates.push_back({{"c", c}, {"rate", jump_event_rate(mine, c)}});
        s["groups"][g]["jump_event_rate"] = rates;
      }
      write_to(summary_path, s.dump(2) + "\n");
    }
    return kExitOk;
  }
};

// ---- verify ----------------------------------------------------------------

struct VerifyCmd {
  std::vector<std::string> paths;
  std::string engine{"both"};
  int exit_code{kExitOk};

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("verify", "run scenario files (or every .json in a directory) and check their assertions");
    c->add_option("paths", paths, "scenario files or directories")->required();
    c->add_option("--engine", engine, "event, sweeps or both")->check(CLI::IsMember({"event", "sweeps", "both"}))->capture_default_str();
    c->callback([this, c] { exit_code = run(*c); });
  }

  int run(const CLI::App& sub) {
    std::vector<std::filesystem::path> files;
    for (const auto& p : paths) {
      if (std::filesystem::is_directory(p)) {
        for (auto& f : scenario_files(p)) files.push_back(f);
      } else {
        files.emplace_back(p);
      }
    }
    std::vector<Scenario> scenarios;
    for (const auto& f : files) scenarios.push_back(load_scenario(f));
    std::vector<ClosureEngine> engines;
    if (engine != "sweeps") engines.push_back(ClosureEngine::event_driven);
    if (engine != "event") engines.push_back(ClosureEngine::full_sweeps);
    std::cout << config_comment(sub);
    std::size_t failed = 0;
    for (const auto& sc : scenarios) {
      bool ok = true;
      for (auto e : engines) {
        const ScenarioResult res = run_scenario(sc, e);
        const char* ename = e == ClosureEngine::event_driven ? "event" : "sweeps";
        for (const auto& v : res.verdicts) {
          std::cout << (v.passed ? "PASS " : "FAIL ") << sc.name << " [" << ename << "] " << v.assertion;
          if (!v.detail.empty()) std::cout << ": " << v.detail;
          std::cout << "\n";
        }
        ok = ok && res.passed();
      }
      failed += ok ? 0 : 1;
    }
    std::cout << "# scenarios: " << scenarios.size() << ", failed: " << failed << "\n";
    return failed == 0 ? kExitOk : kExitCheckFailed;
  }
};

// ---- droplets --------------------------------------------------------------

struct DropletsCmd {
  std::string model{"square"};
  DomainOptions dom;
  SiteOptions sites;
  std::string strategy{"first_found"};
  std::uint64_t seed{0};
  std::string format{"json"};
  bool check{false};
  int exit_code{kExitOk};

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("droplets", "droplet algorithm for the square and triangular models");
    c->add_option("--model", model, "square or triangular")->check(CLI::IsMember({"square", "triangular"}))->capture_default_str();
    dom.add(c);
    sites.add(c);
    c->add_option("--strategy", strategy, "first_found or seeded_random")
        ->check(CLI::IsMember({"first_found", "seeded_random"}))
        ->capture_default_str();
    c->add_option("--seed", seed, "seed for seeded_random")->capture_default_str();
    c->add_option("--format", format, "json, or grid (the union of the droplets)")
        ->check(CLI::IsMember({"json", "grid"}))
        ->capture_default_str();
    c->add_flag("--check", check, "compare the union with the closure on the domain; exit 1 if they differ");
    c->callback([this, c] { exit_code = run(*c); });
  }

  int run(const CLI::App& sub) {
    const DropletModel m = droplet_model_from_name(model);
    const std::optional<Domain> given = dom.given() ? std::optional<Domain>(dom.domain()) : std::nullopt;
    const GridSites in = sites.read(given);
    if (!in.frozen.empty()) throw ConfigError("frozen sites are not supported by the droplet algorithm");
    if (given && given->is_torus()) throw ConfigError("the droplet algorithm works on the plane; use --box or --rect");
    const Domain domain = given ? *given : bounding_domain(in.infected);
    check_sites_in(domain, in.infected);
    DropletAlgorithmStats stats;
    const auto droplets = droplet_algorithm(in.infected, m,
                                            strategy == "first_found" ? MergeStrategy::first_found : MergeStrategy::seeded_random,
                                            seed, &stats);
    Configuration uni = make_configuration(domain, {});
    for (const auto& d : droplets) {
      for (Point p : d.points()) {
        if (!domain.contains(p)) throw ConfigError("droplet site " + to_string(p) + " leaves the domain; enlarge it");
        uni.times[domain.index(p)] = 0;
      }
    }
    int code = kExitOk;
    std::optional<bool> equal;
    if (check) {
      const Configuration cl = closure(domain, droplet_neighbourhood(m), in.infected);
      equal = true;
      for (std::size_t i = 0; i < cl.times.size(); ++i) equal = *equal && (cl.infected(i) == uni.infected(i));
      if (!*equal) code = kExitCheckFailed;
    }
    if (format == "json") {
      json ds = json::array();
      for (const auto& d : droplets) ds.push_back(to_json(d));
      json out = {{"schema_version", 1},
                  {"config", echo_config(sub)},
                  {"droplets", ds},
                  {"union_size", uni.infected_count()},
                  {"merges", stats.merges}};
      if (equal) out["union_equals_closure"] = *equal;
      std::cout << out.dump(2) << "\n";
    } else {
      std::cout << config_comment(sub) << "# schema_version: 1\n" << to_grid(uni);
      std::cout << "# droplets: " << droplets.size() << "\n# union_size: " << uni.infected_count() << "\n";
      if (equal) std::cout << "# union_equals_closure: " << (*equal ? "true" : "false") << "\n";
    }
    return code;
  }
};

// ---- extend ----------------------------------------------------------------

struct ExtendCmd {
  ModelOptions model;
  std::int64_t q{2};
  std::int64_t big_c{0};
  std::string droplet_file;
  std::optional<std::uint64_t> random_seed;
  std::string a_prime_file;
  std::int64_t stop_radius{1 << 20};
  std::size_t max_steps{100};
  int exit_code{kExitOk};

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("extend", "extension algorithm on a quasi-droplet; prints a JSON-lines trace");
    model.add(c);
    c->add_option("--q", q, "scale of the quasi-stable directions")->capture_default_str();
    c->add_option("--C", big_c, "the constant C (default: smallest safe cube)");
    c->add_option("--droplet", droplet_file, "quasi-droplet JSON");
    c->add_option("--random", random_seed, "start from a random non-degenerate quasi-droplet with this seed");
    c->add_option("--a-prime", a_prime_file, "JSON list of the sites of A' (default: empty)");
    c->add_option("--stop-radius", stop_radius, "stop once the droplet leaves [-R, R]^2")->capture_default_str();
    c->add_option("--max-steps", max_steps, "step limit")->capture_default_str();
    c->callback([this, c] { exit_code = run(*c); });
  }

  int run(const CLI::App& sub) {
    const QuasiModel qm(build_neighbourhood(model.spec()), q);
    const ExtensionParams params(big_c > 0 ? big_c : default_big_c(qm), qm.nbhd);
    if (droplet_file.empty() == !random_seed.has_value()) throw ConfigError("give exactly one of --droplet and --random");
    QuasiDroplet start;
    if (random_seed) {
      Xoshiro256ss rng(*random_seed);
      start = random_quasi_droplet(qm, params, rng);
    } else {
      try {
        start = quasi_droplet_from_json(json::parse(read_file(droplet_file)), droplet_file);
      } catch (const json::parse_error& e) {
        throw ConfigError(droplet_file + ": " + e.what());
      }
    }
    if (!is_non_degenerate(start, qm, params)) throw ConfigError("start droplet is degenerate for this model and C");
    std::unordered_set<Point, PointHash> a_prime;
    if (!a_prime_file.empty()) {
      try {
        for (Point p : points_from_json(json::parse(read_file(a_prime_file)), a_prime_file)) a_prime.insert(p);
      } catch (const json::parse_error& e) {
        throw ConfigError(a_prime_file + ": " + e.what());
      }
    }
    ExtensionOptions opts;
    opts.stop_radius = stop_radius;
    opts.max_steps = max_steps;
    const ExtensionTrace trace =
        extension_algorithm(start, qm, fixed_a_prime([&](Point p) { return a_prime.count(p) > 0; }), params, opts);
    std::cout << json{{"schema_version", 1}, {"config", echo_config(sub)}, {"C", params.big_c()}}.dump() << "\n";
    write_trace_jsonl(std::cout, trace);
    return kExitOk;
  }
};

// ---- generate --------------------------------------------------------------

struct GenerateCmd {
  std::string kind;
  std::int64_t n{64};
  double eps{1.0};
  int exit_code{kExitOk};

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("generate", "print a generated scenario");
    c->add_option("kind", kind, "lemma31")->check(CLI::IsMember({"lemma31"}))->required();
    c->add_option("--n", n, "torus side (a multiple of 8)")->capture_default_str();
    c->add_option("--eps", eps, "epsilon; the pitch is floor(eps^3 n / 8)")->capture_default_str();
    c->callback([this] { exit_code = run(); });
  }

  int run() {
    std::cout << serialise_scenario(lemma31_scenario(n, eps));
    return kExitOk;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bperc: threshold bootstrap percolation on Z^2 lattices"};
  app.set_config("--config", "", "TOML/INI file with option values (flags take precedence)");
  app.require_subcommand(1);
  ClosureCmd closure_cmd;
  ThresholdCmd threshold_cmd;
  TauCmd tau_cmd;
  SweepCmd sweep_cmd;
  VerifyCmd verify_cmd;
  DropletsCmd droplets_cmd;
  ExtendCmd extend_cmd;
  GenerateCmd generate_cmd;
  closure_cmd.add(app);
  threshold_cmd.add(app);
  tau_cmd.add(app);
  sweep_cmd.add(app);
  verify_cmd.add(app);
  droplets_cmd.add(app);
  extend_cmd.add(app);
  generate_cmd.add(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "bperc: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "bperc: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "bperc: error: " << e.what() << "\n";
    return kExitUsage;
  }
  for (int code : {closure_cmd.exit_code, threshold_cmd.exit_code, tau_cmd.exit_code, sweep_cmd.exit_code,
                   verify_cmd.exit_code, droplets_cmd.exit_code, extend_cmd.exit_code, generate_cmd.exit_code}) {
    if (code != kExitOk) return code;
  }
  return kExitOk;
}
