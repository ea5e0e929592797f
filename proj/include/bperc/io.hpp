#pragma once

// Serialisation: JSON for neighbourhoods, domains, configurations, droplets
// and quasi-droplets; the `.#F` grid text format; CSV / JSON-lines records
// of the arrival process; JSON-lines extension traces.

#include <charconv>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bperc/domain.hpp"
#include "bperc/droplets.hpp"
#include "bperc/geometry.hpp"
#include "bperc/process.hpp"
#include "bperc/quasi_droplets.hpp"

namespace bperc {

using nlohmann::json;

namespace detail {

inline const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  return j.at(key);
}

inline std::int64_t require_int(const json& j, const char* key, const std::string& where) {
  const json& v = require(j, key, where);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return v.get<std::int64_t>();
}

}  // namespace detail

inline json to_json(Point p) { return json::array({p.x, p.y}); }

inline Point point_from_json(const json& j, const std::string& where = "site") {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw ConfigError(where + ": expected [x, y] with integer coordinates");
  }
  return {j[0].get<std::int64_t>(), j[1].get<std::int64_t>()};
}

inline json to_json(std::span<const Point> sites) {
  json out = json::array();
  for (Point p : sites) out.push_back(to_json(p));
  return out;
}

inline std::vector<Point> points_from_json(const json& j, const std::string& where = "sites") {
  if (!j.is_array()) throw ConfigError(where + ": expected a list of [x, y] sites");
  std::vector<Point> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(point_from_json(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

// ---- neighbourhoods ------------------------------------------------------
//   {"kind": "named", "name": "square"}
//   {"kind": "lp_ball", "p": "2" | "inf", "s": "8"}
//   {"kind": "explicit", "offsets": [[1, 0], ...]}
// each with an optional integer "threshold". A bare string is read as a
// model id ("square", "lp2_s8", "lpinf_s4_r20").

inline json to_json(const NeighbourhoodSpec& spec) {
  json j;
  if (const auto* m = std::get_if<NamedModel>(&spec.kind)) {
    j = {{"kind", "named"}, {"name", model_name(*m)}};
  } else if (const auto* b = std::get_if<LpBall>(&spec.kind)) {
    j = {{"kind", "lp_ball"}, {"p", b->p ? b->p->str() : std::string("inf")}, {"s", b->s.str()}};
  } else {
    j = {{"kind", "explicit"}, {"offsets", to_json(std::span<const Point>(std::get<ExplicitOffsets>(spec.kind).offsets))}};
  }
  if (spec.threshold) j["threshold"] = *spec.threshold;
  return j;
}

inline Rational rational_from_json(const json& j, const std::string& where) {
  try {
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
    if (j.is_string()) return Rational::parse(j.get<std::string>());
  } catch (const std::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ": expected an integer or a string such as \"9/2\"");
}

inline NeighbourhoodSpec neighbourhood_spec_from_json(const json& j, const std::string& where = "neighbourhood") {
  if (j.is_string()) return parse_model_id(j.get<std::string>());
  const json& kind = detail::require(j, "kind", where);
  NeighbourhoodSpec spec;
  const std::string k = kind.is_string() ? kind.get<std::string>() : "";
  if (k == "named") {
    const json& name = detail::require(j, "name", where);
    const auto m = name.is_string() ? parse_model_name(name.get<std::string>()) : std::nullopt;
    if (!m) throw ConfigError(where + ".name: unknown model " + name.dump());
    spec.kind = *m;
  } else if (k == "lp_ball") {
    const json& p = detail::require(j, "p", where);
    LpBall ball;
    if (!(p.is_string() && p.get<std::string>() == "inf")) ball.p = rational_from_json(p, where + ".p");
    ball.s = rational_from_json(detail::require(j, "s", where), where + ".s");
    spec.kind = ball;
  } else if (k == "explicit") {
    spec.kind = ExplicitOffsets{points_from_json(detail::require(j, "offsets", where), where + ".offsets")};
  } else {
    throw ConfigError(where + ".kind: expected \"named\", \"lp_ball\" or \"explicit\"");
  }
  if (j.contains("threshold")) {
    if (!j["threshold"].is_number_integer()) throw ConfigError(where + ".threshold: expected an integer");
    spec.threshold = j["threshold"].get<int>();
  }
  return spec;
}

// ---- domains ---------------------------------------------------------------
//   {"kind": "torus", "n": 64}
//   {"kind": "box", "d": 5}
//   {"kind": "rect", "xmin": -10, "xmax": 13, "ymin": -4, "ymax": 4}
// Frozen sites are listed separately (see scenarios).

inline json to_json(const Domain& d) {
  if (d.is_torus()) return {{"kind", "torus"}, {"n", d.width()}};
  if (d.xmin() == -d.xmax() && d.ymin() == -d.ymax() && d.xmax() == d.ymax()) return {{"kind", "box"}, {"d", d.xmax()}};
  return {{"kind", "rect"}, {"xmin", d.xmin()}, {"xmax", d.xmax()}, {"ymin", d.ymin()}, {"ymax", d.ymax()}};
}

inline Domain domain_from_json(const json& j, const std::string& where = "domain") {
  const json& kind = detail::require(j, "kind", where);
  const std::string k = kind.is_string() ? kind.get<std::string>() : "";
  if (k == "torus") return Domain::torus(detail::require_int(j, "n", where));
  if (k == "box") return Domain::box(detail::require_int(j, "d", where));
  if (k == "rect") {
    return Domain::rect(detail::require_int(j, "xmin", where), detail::require_int(j, "xmax", where),
                        detail::require_int(j, "ymin", where), detail::require_int(j, "ymax", where));
  }
  throw ConfigError(where + ".kind: expected \"torus\", \"box\" or \"rect\"");
}

// ---- configurations ------------------------------------------------------
//   {"domain": {...}, "frozen": [[x, y], ...], "infected": [[x, y, t], ...]}
// t is the generation time (0 for initial sites). Frozen sites are omitted
// from "infected".

inline json to_json(const Configuration& cfg) {
  json infected = json::array();
  const auto frozen = cfg.domain.frozen();
  for (std::size_t i = 0; i < cfg.times.size(); ++i) {
    if (cfg.times[i] < 0) continue;
    const Point p = cfg.domain.point(i);
    if (std::binary_search(frozen.begin(), frozen.end(), p)) continue;
    infected.push_back(json::array({p.x, p.y, cfg.times[i]}));
  }
  return {{"domain", to_json(cfg.domain)}, {"frozen", to_json(frozen)}, {"infected", infected}};
}

inline Configuration configuration_from_json(const json& j, const std::string& where = "configuration") {
  Domain domain = domain_from_json(detail::require(j, "domain", where), where + ".domain");
  if (j.contains("frozen")) domain = domain.with_frozen(points_from_json(j["frozen"], where + ".frozen"));
  Configuration cfg = make_configuration(domain, {});
  const json& infected = detail::require(j, "infected", where);
  if (!infected.is_array()) throw ConfigError(where + ".infected: expected a list");
  for (std::size_t i = 0; i < infected.size(); ++i) {
    const json& e = infected[i];
    const std::string at = where + ".infected[" + std::to_string(i) + "]";
    if (!e.is_array() || e.size() != 3) throw ConfigError(at + ": expected [x, y, t]");
    const Point p = point_from_json(json::array({e[0], e[1]}), at);
    if (!e[2].is_number_integer() || e[2].get<std::int64_t>() < 0) throw ConfigError(at + ": bad time");
    cfg.times[domain.index(p)] = e[2].get<std::int32_t>();
  }
  return cfg;
}

// ---- grid text -------------------------------------------------------------
// One line per row from ymax down to ymin, columns xmin..xmax; '.' healthy,
// '#' infected, 'F' frozen. Generation times are not represented. When
// reading, lines starting with "# " are comments.

inline std::string to_grid(const Configuration& cfg) {
  const Domain& d = cfg.domain;
  const auto frozen = d.frozen();
  std::string out;
  out.reserve(static_cast<std::size_t>((d.width() + 1) * d.height()));
  for (std::int64_t y = d.ymax(); y >= d.ymin(); --y) {
    for (std::int64_t x = d.xmin(); x <= d.xmax(); ++x) {
      const Point p{x, y};
      if (std::binary_search(frozen.begin(), frozen.end(), p)) {
        out += 'F';
      } else {
        out += cfg.infected(d.index(p)) ? '#' : '.';
      }
    }
    out += '\n';
  }
  return out;
}

struct GridSites {
  std::vector<Point> infected;
  std::vector<Point> frozen;
};

// Parses grid text laid out on `domain` (blank and comment lines ignored).
inline GridSites parse_grid(std::string_view text, const Domain& domain) {
  std::vector<std::string> rows;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.rfind("# ", 0) != 0) rows.push_back(line);
  }
  if (static_cast<std::int64_t>(rows.size()) != domain.height()) {
    throw ConfigError("grid has " + std::to_string(rows.size()) + " rows, domain needs " + std::to_string(domain.height()));
  }
  GridSites out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<std::int64_t>(rows[r].size()) != domain.width()) {
      throw ConfigError("grid row " + std::to_string(r + 1) + " has width " + std::to_string(rows[r].size()) +
                        ", domain needs " + std::to_string(domain.width()));
    }
    const std::int64_t y = domain.ymax() - static_cast<std::int64_t>(r);
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      const Point p{domain.xmin() + static_cast<std::int64_t>(c), y};
      switch (rows[r][c]) {
        case '.': break;
        case '#': out.infected.push_back(p); break;
        case 'F': out.frozen.push_back(p); break;
        default:
          throw ConfigError("grid row " + std::to_string(r + 1) + " column " + std::to_string(c + 1) +
                            ": unexpected character '" + rows[r][c] + "'");
      }
    }
  }
  return out;
}

inline Configuration configuration_from_grid(std::string_view text, const Domain& domain) {
  GridSites g = parse_grid(text, domain);
  return make_configuration(domain.with_frozen(std::move(g.frozen)), g.infected);
}

// ---- droplets --------------------------------------------------------------

inline const char* droplet_model_name(DropletModel m) { return model_name(named_model(m)); }

inline DropletModel droplet_model_from_name(std::string_view name) {
  if (name == "square") return DropletModel::square;
  if (name == "triangular") return DropletModel::triangular;
  throw ConfigError("droplets exist for the square and triangular models only, not '" + std::string(name) + "'");
}

// {"model": "triangular", "radii": [r_E, r_N, r_W, r_S, r_NE, r_SW]} (square:
// four radii), or {"model": ..., "empty": true}.
inline json to_json(const Droplet& d) {
  json j = {{"model", droplet_model_name(d.model())}};
  if (d.is_empty()) {
    j["empty"] = true;
    return j;
  }
  json radii = json::array();
  for (std::size_t i = 0; i < droplet_direction_count(d.model()); ++i) radii.push_back(d.radius(i));
  j["radii"] = radii;
  return j;
}

inline Droplet droplet_from_json(const json& j, const std::string& where = "droplet") {
  const json& name = detail::require(j, "model", where);
  if (!name.is_string()) throw ConfigError(where + ".model: expected a string");
  const DropletModel m = droplet_model_from_name(name.get<std::string>());
  if (j.value("empty", false)) return Droplet::empty(m);
  const json& radii = detail::require(j, "radii", where);
  if (!radii.is_array() || radii.size() != droplet_direction_count(m)) {
    throw ConfigError(where + ".radii: expected " + std::to_string(droplet_direction_count(m)) + " integers");
  }
  Radii r{};
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!radii[i].is_number_integer()) throw ConfigError(where + ".radii: expected integers");
    r[i] = radii[i].get<std::int64_t>();
  }
  return Droplet::from_radii(m, r);
}

// {"constraints": [{"u": [1, 0], "m": 5}, ...]} in angular order.
inline json to_json(const QuasiDroplet& qd) {
  json cs = json::array();
  for (const auto& [u, m] : qd.constraints()) cs.push_back({{"u", to_json(u.vec())}, {"m", m}});
  return {{"constraints", cs}};
}

inline QuasiDroplet quasi_droplet_from_json(const json& j, const std::string& where = "quasi_droplet") {
  const json& cs = detail::require(j, "constraints", where);
  if (!cs.is_array()) throw ConfigError(where + ".constraints: expected a list");
  QuasiDroplet::Constraints c;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const std::string at = where + ".constraints[" + std::to_string(i) + "]";
    const Point u = point_from_json(detail::require(cs[i], "u", at), at + ".u");
    try {
      c[Direction(u.x, u.y)] = detail::require_int(cs[i], "m", at);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(at + ".u: " + e.what());
    }
  }
  return QuasiDroplet(std::move(c));
}

// One JSON object per line: each step's droplet, then a closing line with
// the termination reason.
inline void write_trace_jsonl(std::ostream& out, const ExtensionTrace& trace) {
  for (std::size_t i = 0; i < trace.droplets.size(); ++i) {
    json line = {{"step", i}, {"droplet", to_json(trace.droplets[i])}, {"lattice_count", trace.droplets[i].lattice_count()}};
    if (i > 0) {
      const ExtensionStep& s = trace.steps[i - 1];
      line["direction"] = to_json(s.direction.vec());
      line["kind"] = s.kind == ExtensionKind::unstable ? "unstable" : "stable";
      line["witness"] = s.witness ? to_json(*s.witness) : json(nullptr);
    }
    out << line.dump() << '\n';
  }
  out << json{{"termination", termination_name(trace.termination)}, {"steps", trace.steps.size()}}.dump() << '\n';
}

// ---- arrival-process records -------------------------------------------

inline constexpr const char* kRecordCsvHeader = "schema_version,model,n,seed,tau,closure_before,jump_ratio,tau_scaled,wall_ms";

// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string to_csv_row(const ProcessRecord& r) {
  return std::to_string(kRecordSchemaVersion) + "," + r.model + "," + std::to_string(r.n) + "," + std::to_string(r.seed) +
         "," + std::to_string(r.tau) + "," + std::to_string(r.closure_before) + "," + format_double(r.jump_ratio) + "," +
         format_double(r.tau_scaled) + "," + format_double(r.wall_ms);
}

inline json to_json(const ProcessRecord& r) {
  return {{"schema_version", kRecordSchemaVersion},
          {"model", r.model},
          {"n", r.n},
          {"seed", r.seed},
          {"tau", r.tau},
          {"closure_before", r.closure_before},
          {"jump_ratio", r.jump_ratio},
          {"tau_scaled", r.tau_scaled},
          {"wall_ms", r.wall_ms}};
}

inline ProcessRecord record_from_json(const json& j) {
  if (j.value("schema_version", 0) != kRecordSchemaVersion) throw ConfigError("record: unsupported schema_version");
  ProcessRecord r = make_record(j.at("model").get<std::string>(), j.at("n").get<std::int64_t>(),
                                j.at("seed").get<std::uint64_t>(), j.at("tau").get<std::uint64_t>(),
                                j.at("closure_before").get<std::uint64_t>());
  r.wall_ms = j.value("wall_ms", 0.0);
  return r;
}

inline json to_json(const StatSummary& s) {
  return {{"q25", s.q25}, {"median", s.median}, {"q75", s.q75}, {"mean", s.mean}, {"variance", s.variance}};
}

inline json to_json(const GroupSummary& g) {
  json fractions = json::array();
  for (const auto& [thr, frac] : g.jump_fractions) fractions.push_back({{"threshold", thr}, {"fraction", frac}});
  return {{"model", g.model},
          {"n", g.n},
          {"count", g.count},
          {"tau_scaled", to_json(g.tau_scaled)},
          {"tau_scaled_iqr_over_median", g.tau_scaled.iqr_over_median()},
          {"jump_ratio", to_json(g.jump_ratio)},
          {"closure_fraction", to_json(g.closure_fraction)},
          {"closure_before_at_least", fractions}};
}

inline json summaries_to_json(std::span<const GroupSummary> groups) {
  json out = {{"schema_version", kRecordSchemaVersion}, {"groups", json::array()}};
  for (const auto& g : groups) out["groups"].push_back(to_json(g));
  return out;
}

}  // namespace bperc
