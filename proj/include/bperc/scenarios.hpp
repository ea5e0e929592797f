#pragma once

// Declarative scenarios: a domain, a neighbourhood, an initial set and a list
// of assertions about its closure. Also generators for the bundled corpus.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "bperc/dynamics.hpp"
#include "bperc/io.hpp"

namespace bperc {

inline constexpr int kScenarioSchemaVersion = 1;

namespace assertion {
struct ClosureEqualsDomain {
  friend bool operator==(const ClosureEqualsDomain&, const ClosureEqualsDomain&) = default;
};
struct NoGrowth {
  friend bool operator==(const NoGrowth&, const NoGrowth&) = default;
};
struct ClosureSize {
  std::size_t value{0};  // infected sites, frozen ones excluded
  friend bool operator==(const ClosureSize&, const ClosureSize&) = default;
};
struct ClosureContains {
  std::vector<Point> sites;
  friend bool operator==(const ClosureContains&, const ClosureContains&) = default;
};
struct ClosureExcludes {
  std::vector<Point> sites;
  friend bool operator==(const ClosureExcludes&, const ClosureExcludes&) = default;
};
// A fully infected axis-parallel rectangle, `length` sites along `direction`
// ("horizontal" or "vertical") and `width` sites across. Wraps on a torus.
struct ContainsRectangle {
  std::int64_t width{1};
  std::int64_t length{1};
  std::string direction{"horizontal"};
  friend bool operator==(const ContainsRectangle&, const ContainsRectangle&) = default;
};
}  // namespace assertion

using Assertion = std::variant<assertion::ClosureEqualsDomain, assertion::NoGrowth, assertion::ClosureSize,
                               assertion::ClosureContains, assertion::ClosureExcludes, assertion::ContainsRectangle>;

struct Scenario {
  std::string name;
  std::string notes;
  Domain domain = Domain::box(0);  // carries the frozen sites
  NeighbourhoodSpec neighbourhood;
  std::vector<Point> infected;
  // Named groups of annotated sites; informational only.
  std::map<std::string, std::vector<Point>> marked;
  std::vector<Assertion> assertions;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

class ScenarioError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

namespace detail {

inline std::string assertion_type(const Assertion& a) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, assertion::ClosureEqualsDomain>) return "closure_equals_domain";
        if constexpr (std::is_same_v<T, assertion::NoGrowth>) return "no_growth";
        if constexpr (std::is_same_v<T, assertion::ClosureSize>) return "closure_size";
        if constexpr (std::is_same_v<T, assertion::ClosureContains>) return "closure_contains";
        if constexpr (std::is_same_v<T, assertion::ClosureExcludes>) return "closure_excludes";
        if constexpr (std::is_same_v<T, assertion::ContainsRectangle>) return "contains_rectangle";
      },
      a);
}

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw ScenarioError(where + ": unknown field '" + key + "'");
    }
  }
}

inline Assertion assertion_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ScenarioError(where + ": expected an object");
  const json& type = require(j, "type", where);
  const std::string t = type.is_string() ? type.get<std::string>() : "";
  if (t == "closure_equals_domain") {
    check_keys(j, {"type"}, where);
    return assertion::ClosureEqualsDomain{};
  }
  if (t == "no_growth") {
    check_keys(j, {"type"}, where);
    return assertion::NoGrowth{};
  }
  if (t == "closure_size") {
    check_keys(j, {"type", "value"}, where);
    const auto v = require_int(j, "value", where);
    if (v < 0) throw ScenarioError(where + ".value: must be nonnegative");
    return assertion::ClosureSize{static_cast<std::size_t>(v)};
  }
  if (t == "closure_contains") {
    check_keys(j, {"type", "sites"}, where);
    return assertion::ClosureContains{points_from_json(require(j, "sites", where), where + ".sites")};
  }
  if (t == "closure_excludes") {
    check_keys(j, {"type", "sites"}, where);
    return assertion::ClosureExcludes{points_from_json(require(j, "sites", where), where + ".sites")};
  }
  if (t == "contains_rectangle") {
    check_keys(j, {"type", "width", "length", "direction"}, where);
    assertion::ContainsRectangle a{require_int(j, "width", where), require_int(j, "length", where), "horizontal"};
    if (a.width < 1 || a.length < 1) throw ScenarioError(where + ": width and length must be positive");
    if (j.contains("direction")) {
      if (!j["direction"].is_string()) throw ScenarioError(where + ".direction: expected a string");
      a.direction = j["direction"].get<std::string>();
    }
    if (a.direction != "horizontal" && a.direction != "vertical") {
      throw ScenarioError(where + ".direction: expected \"horizontal\" or \"vertical\"");
    }
    return a;
  }
  throw ScenarioError(where + ".type: unknown assertion " + type.dump());
}

inline json assertion_to_json(const Assertion& a) {
  json j = {{"type", assertion_type(a)}};
  if (const auto* s = std::get_if<assertion::ClosureSize>(&a)) j["value"] = s->value;
  if (const auto* c = std::get_if<assertion::ClosureContains>(&a)) j["sites"] = to_json(std::span<const Point>(c->sites));
  if (const auto* e = std::get_if<assertion::ClosureExcludes>(&a)) j["sites"] = to_json(std::span<const Point>(e->sites));
  if (const auto* r = std::get_if<assertion::ContainsRectangle>(&a)) {
    j["width"] = r->width;
    j["length"] = r->length;
    j["direction"] = r->direction;
  }
  return j;
}

inline std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

}  // namespace detail

// Validates a parsed scenario document. Errors name the offending field.
inline Scenario scenario_from_json(const json& j) {
  const std::string where = "scenario";
  if (!j.is_object()) throw ScenarioError("scenario: expected a JSON object");
  detail::check_keys(j,
                     {"schema_version", "name", "notes", "domain", "neighbourhood", "infected", "infected_grid", "frozen",
                      "marked", "assertions"},
                     where);
  if (detail::require_int(j, "schema_version", where) != kScenarioSchemaVersion) {
    throw ScenarioError("scenario.schema_version: only version 1 is supported");
  }
  Scenario sc;
  const json& name = detail::require(j, "name", where);
  if (!name.is_string() || name.get<std::string>().empty()) throw ScenarioError("scenario.name: expected a nonempty string");
  sc.name = name.get<std::string>();
  if (j.contains("notes")) {
    if (!j["notes"].is_string()) throw ScenarioError("scenario.notes: expected a string");
    sc.notes = j["notes"].get<std::string>();
  }
  sc.domain = domain_from_json(detail::require(j, "domain", where), "scenario.domain");
  sc.neighbourhood = neighbourhood_spec_from_json(detail::require(j, "neighbourhood", where), "scenario.neighbourhood");

  std::vector<Point> frozen;
  if (j.contains("frozen")) frozen = points_from_json(j["frozen"], "scenario.frozen");
  const bool has_list = j.contains("infected");
  const bool has_grid = j.contains("infected_grid");
  if (has_list == has_grid) throw ScenarioError("scenario: give exactly one of 'infected' and 'infected_grid'");
  if (has_list) {
    sc.infected = points_from_json(j["infected"], "scenario.infected");
  } else {
    const json& g = j["infected_grid"];
    std::string text;
    if (g.is_string()) {
      text = g.get<std::string>();
    } else if (g.is_array()) {
      for (const auto& row : g) {
        if (!row.is_string()) throw ScenarioError("scenario.infected_grid: expected row strings");
        text += row.get<std::string>() + "\n";
      }
    } else {
      throw ScenarioError("scenario.infected_grid: expected a string or a list of row strings");
    }
    try {
      GridSites gs = parse_grid(text, sc.domain);
      sc.infected = std::move(gs.infected);
      frozen.insert(frozen.end(), gs.frozen.begin(), gs.frozen.end());
    } catch (const ConfigError& e) {
      throw ScenarioError(std::string("scenario.infected_grid: ") + e.what());
    }
  }
  for (std::size_t i = 0; i < sc.infected.size(); ++i) {
    if (!sc.domain.contains(sc.infected[i])) {
      throw ScenarioError("scenario.infected[" + std::to_string(i) + "]: site " + to_string(sc.infected[i]) +
                          " lies outside the domain");
    }
  }
  try {
    sc.domain = sc.domain.with_frozen(std::move(frozen));
  } catch (const ConfigError& e) {
    throw ScenarioError(std::string("scenario.frozen: ") + e.what());
  }
  if (j.contains("marked")) {
    if (!j["marked"].is_object()) throw ScenarioError("scenario.marked: expected an object of site lists");
    for (const auto& [key, sites] : j["marked"].items()) sc.marked[key] = points_from_json(sites, "scenario.marked." + key);
  }
  const json& as = detail::require(j, "assertions", where);
  if (!as.is_array()) throw ScenarioError("scenario.assertions: expected a list");
  for (std::size_t i = 0; i < as.size(); ++i) {
    sc.assertions.push_back(detail::assertion_from_json(as[i], "scenario.assertions[" + std::to_string(i) + "]"));
  }
  // Building the neighbourhood validates it (and the torus size) up front.
  try {
    sc.domain.check_compatible(build_neighbourhood(sc.neighbourhood));
  } catch (const ConfigError& e) {
    throw ScenarioError(std::string("scenario.neighbourhood: ") + e.what());
  }
  return sc;
}

inline Scenario parse_scenario(std::string_view text, const std::string& origin = "<string>") {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(origin + ":" + std::to_string(detail::line_of_offset(text, e.byte)) + ": " + e.what());
  }
  try {
    return scenario_from_json(j);
  } catch (const ConfigError& e) {
    throw ScenarioError(origin + ": " + e.what());
  }
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path.string() + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

inline json to_json(const Scenario& sc) {
  json j = {{"schema_version", kScenarioSchemaVersion}, {"name", sc.name}};
  if (!sc.notes.empty()) j["notes"] = sc.notes;
  j["domain"] = to_json(sc.domain);
  j["neighbourhood"] = to_json(sc.neighbourhood);
  j["infected"] = to_json(std::span<const Point>(sc.infected));
  if (sc.domain.has_frozen()) j["frozen"] = to_json(sc.domain.frozen());
  if (!sc.marked.empty()) {
    json m = json::object();
    for (const auto& [k, v] : sc.marked) m[k] = to_json(std::span<const Point>(v));
    j["marked"] = m;
  }
  j["assertions"] = json::array();
  for (const auto& a : sc.assertions) j["assertions"].push_back(detail::assertion_to_json(a));
  return j;
}

inline std::string serialise_scenario(const Scenario& sc) { return to_json(sc).dump(2) + "\n"; }

// ---- running -------------------------------------------------------------

struct Verdict {
  std::string assertion;
  bool passed{false};
  std::string detail;  // witness on failure, summary on success
};

struct ScenarioResult {
  std::string name;
  std::size_t initial_size{0};
  std::size_t closure_size{0};
  std::vector<Verdict> verdicts;

  bool passed() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
  }
};

enum class ClosureEngine { event_driven, full_sweeps };

// Position (x, y) of a fully infected rectangle, or nullopt.
inline std::optional<Point> find_rectangle(const Configuration& cfg, std::int64_t along, std::int64_t across,
                                           bool horizontal) {
  const Domain& d = cfg.domain;
  const std::int64_t w = d.width(), h = d.height();
  const bool wrap = d.is_torus();
  // Swap axes so that the rectangle's length always runs along "columns".
  const std::int64_t len_axis = horizontal ? w : h;
  const std::int64_t other_axis = horizontal ? h : w;
  if (along > len_axis || across > other_axis) return std::nullopt;
  auto infected_at = [&](std::int64_t a, std::int64_t b) {
    const std::int64_t x = horizontal ? a : b, y = horizontal ? b : a;
    return cfg.infected(static_cast<std::size_t>(y * w + x));
  };
  // run[b][a]: consecutive infected sites starting at a along the length axis.
  std::vector<std::int64_t> run(static_cast<std::size_t>(len_axis * other_axis));
  for (std::int64_t b = 0; b < other_axis; ++b) {
    std::int64_t cur = 0;
    const std::int64_t passes = wrap ? 2 : 1;
    for (std::int64_t k = passes * len_axis - 1; k >= 0; --k) {
      const std::int64_t a = k % len_axis;
      cur = infected_at(a, b) ? std::min(cur + 1, len_axis) : 0;
      if (k < len_axis) run[static_cast<std::size_t>(b * len_axis + a)] = cur;
    }
  }
  for (std::int64_t a = 0; a < len_axis; ++a) {
    std::int64_t streak = 0;
    const std::int64_t passes = wrap ? 2 : 1;
    for (std::int64_t k = 0; k < passes * other_axis; ++k) {
      const std::int64_t b = k % other_axis;
      streak = run[static_cast<std::size_t>(b * len_axis + a)] >= along ? streak + 1 : 0;
      if (streak >= across) {
        const std::int64_t b0 = ((b - across + 1) % other_axis + other_axis) % other_axis;
        const std::int64_t x = horizontal ? a : b0, y = horizontal ? b0 : a;
        return d.point(static_cast<std::size_t>(y * w + x));
      }
    }
  }
  return std::nullopt;
}

inline ScenarioResult run_scenario(const Scenario& sc, ClosureEngine engine = ClosureEngine::event_driven) {
  const Neighbourhood nbhd = build_neighbourhood(sc.neighbourhood);
  const Configuration cfg = engine == ClosureEngine::event_driven ? closure(sc.domain, nbhd, sc.infected)
                                                                  : sweep_closure(sc.domain, nbhd, sc.infected);
  const Configuration initial = make_configuration(sc.domain, sc.infected);
  ScenarioResult res;
  res.name = sc.name;
  res.initial_size = initial.closure_size();
  res.closure_size = cfg.closure_size();
  for (const auto& a : sc.assertions) {
    Verdict v{detail::assertion_type(a), true, ""};
    if (std::holds_alternative<assertion::ClosureEqualsDomain>(a)) {
      for (std::size_t i = 0; i < cfg.times.size() && v.passed; ++i) {
        if (!cfg.infected(i)) {
          v.passed = false;
          v.detail = "site " + to_string(sc.domain.point(i)) + " stays healthy";
        }
      }
      if (v.passed) v.detail = "all " + std::to_string(sc.domain.size()) + " sites infected";
    } else if (std::holds_alternative<assertion::NoGrowth>(a)) {
      for (std::size_t i = 0; i < cfg.times.size() && v.passed; ++i) {
        if (cfg.times[i] > 0) {
          v.passed = false;
          v.detail = "site " + to_string(sc.domain.point(i)) + " becomes infected in round " + std::to_string(cfg.times[i]);
        }
      }
    } else if (const auto* s = std::get_if<assertion::ClosureSize>(&a)) {
      v.passed = res.closure_size == s->value;
      v.detail = "closure has " + std::to_string(res.closure_size) + " sites, expected " + std::to_string(s->value);
    } else if (const auto* c = std::get_if<assertion::ClosureContains>(&a)) {
      for (Point p : c->sites) {
        if (!cfg.infected(p)) {
          v.passed = false;
          v.detail = "site " + to_string(p) + " is not in the closure";
          break;
        }
      }
    } else if (const auto* e = std::get_if<assertion::ClosureExcludes>(&a)) {
      for (Point p : e->sites) {
        if (cfg.infected(p)) {
          v.passed = false;
          v.detail = "site " + to_string(p) + " is in the closure";
          break;
        }
      }
    } else if (const auto* r = std::get_if<assertion::ContainsRectangle>(&a)) {
      const auto at = find_rectangle(cfg, r->length, r->width, r->direction == "horizontal");
      v.passed = at.has_value();
      v.detail = at ? "rectangle at " + to_string(*at) : "no such rectangle";
    }
    res.verdicts.push_back(std::move(v));
  }
  return res;
}

inline std::vector<std::filesystem::path> scenario_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---- corpus helpers ------------------------------------------------------

// Infected sites within l1-distance 4 of the site marked "cross", for each of
// the three local square4 patterns in `corpus_dir`.
inline std::array<std::size_t, 3> figure3_counts(const std::filesystem::path& corpus_dir) {
  std::array<std::size_t, 3> out{};
  const char* names[] = {"square4_figure3_i.json", "square4_figure3_ii.json", "square4_figure3_iii.json"};
  for (std::size_t i = 0; i < 3; ++i) {
    const Scenario sc = load_scenario(corpus_dir / names[i]);
    const auto it = sc.marked.find("cross");
    if (it == sc.marked.end() || it->second.size() != 1) throw ScenarioError(sc.name + ": needs one marked cross site");
    const Point x = it->second.front();
    for (Point p : sc.infected) out[i] += (std::abs(p.x - x.x) + std::abs(p.y - x.y) <= 4) ? 1 : 0;
  }
  return out;
}

// True when every run of `pitch` consecutive sites along a row or a column
// (cyclically on a torus) contains a site of `sites`.
inline bool meets_every_axis_segment(const Domain& torus, std::span<const Point> sites, std::int64_t pitch) {
  const std::int64_t n = torus.width();
  std::vector<std::uint8_t> on(torus.size(), 0);
  for (Point p : sites) on[torus.index(p)] = 1;
  for (int axis = 0; axis < 2; ++axis) {
    for (std::int64_t line = 0; line < n; ++line) {
      std::int64_t gap = 0;
      for (std::int64_t k = 0; k < 2 * n; ++k) {
        const std::int64_t a = k % n;
        const Point p = axis == 0 ? Point{a, line} : Point{line, a};
        gap = on[torus.index(p)] ? 0 : gap + 1;
        if (gap >= pitch) return false;
      }
    }
  }
  return true;
}

// Finite square-model instance of the rectangle-fill lemma on the n-torus: a
// 1 x d segment (d = n/8) plus a sparse set meeting every axis segment of
// length floor(eps^3 d). The sparse set is the sheared lattice
// x = a y (mod L) with a chosen so that no two of its sites share a
// neighbour, then patched greedily along the seams where n is not a multiple
// of L.
inline Scenario lemma31_scenario(std::int64_t n, double eps) {
  if (n < 16 || n % 8 != 0) throw ConfigError("lemma31 scenarios need n a multiple of 8, n >= 16");
  const std::int64_t d = n / 8;
  const auto pitch = static_cast<std::int64_t>(std::floor(eps * eps * eps * static_cast<double>(d) + 1e-9));
  if (pitch < 3 || pitch > d) throw ConfigError("lemma31 pitch floor(eps^3 d) must lie in [3, d]");
  std::int64_t shear = 2;
  while (std::gcd(shear, pitch) != 1) ++shear;
  if (shear >= pitch - 1) throw ConfigError("no shear available for pitch " + std::to_string(pitch));

  const Domain torus = Domain::torus(n);
  std::vector<std::uint8_t> on(torus.size(), 0);
  for (std::int64_t y = 0; y < n; ++y) {
    for (std::int64_t x = 0; x < n; ++x) {
      if (((x - shear * y) % pitch + pitch) % pitch == 0) on[torus.index({x, y})] = 1;
    }
  }
  for (int axis = 0; axis < 2; ++axis) {
    for (std::int64_t line = 0; line < n; ++line) {
      std::int64_t gap = 0;
      for (std::int64_t k = 0; k < 2 * n; ++k) {
        const std::int64_t a = k % n;
        const std::size_t i = torus.index(axis == 0 ? Point{a, line} : Point{line, a});
        if (on[i]) {
          gap = 0;
        } else if (++gap >= pitch) {
          on[i] = 1;
          gap = 0;
        }
      }
    }
  }
  for (std::int64_t x = 0; x < d; ++x) on[torus.index({x, 0})] = 1;

  Scenario sc;
  std::ostringstream name;
  name << "square_lemma31_n" << n << "_eps" << eps;
  sc.name = name.str();
  sc.notes = "Generated: a 1 x " + std::to_string(d) + " segment on row 0 plus a sheared lattice of pitch " +
             std::to_string(pitch) + " (x = " + std::to_string(shear) + " y mod " + std::to_string(pitch) +
             ") patched so that every axis segment of " + std::to_string(pitch) +
             " sites is met. Finite-instance evidence only.";
  sc.domain = torus;
  sc.neighbourhood = NeighbourhoodSpec::named(NamedModel::square);
  for (std::size_t i = 0; i < on.size(); ++i) {
    if (on[i]) sc.infected.push_back(torus.point(i));
  }
  sc.assertions.push_back(assertion::ClosureEqualsDomain{});
  return sc;
}

}  // namespace bperc
