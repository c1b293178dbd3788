#include "informon/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "informon/errors.hpp"

namespace informon::cli {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <typename T>
void read_optional(const json& obj, const char* key, std::optional<T>& out, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  T value{};
  read(obj, key, value, where);
  out = value;
}

Complex read_complex(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw ConfigError(where + " must be a number or a [re, im] pair");
}

oracle::PacketSpec read_packet(const json& j, const std::string& where, WeightedPacket* weighted = nullptr) {
  std::set<std::string> keys{"sigma0", "x0", "k0"};
  if (weighted) keys.insert({"weight", "tag"});
  check_keys(j, keys, where);
  oracle::PacketSpec p;
  read(j, "sigma0", p.sigma0, where);
  read(j, "x0", p.x0, where);
  read(j, "k0", p.k0, where);
  if (weighted) {
    read(j, "weight", weighted->weight, where);
    read(j, "tag", weighted->tag, where);
  }
  if (!(p.sigma0 > 0)) throw ConfigError(where + ".sigma0 must be positive");
  return p;
}

std::set<std::pair<std::string, std::string>> read_pairs(const json& j, const std::string& where) {
  std::set<std::pair<std::string, std::string>> out;
  if (!j.is_array()) throw ConfigError(where + " must be an array of pairs");
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string())
      throw ConfigError(where + " entries must be [string, string]");
    out.insert({p[0].get<std::string>(), p[1].get<std::string>()});
  }
  return out;
}

algebra::PrimitiveSpec read_primitive(const json& j, const std::string& id, const std::string& where) {
  check_keys(j, {"character", "state", "strategy", "source_tag", "sites"}, where);
  algebra::PrimitiveSpec p;
  p.id = id;
  read(j, "character", p.character, where);
  read(j, "state", p.state, where);
  std::string strategy = "path_integral";
  read(j, "strategy", strategy, where);
  if (strategy == "path_integral") p.strategy = algebra::Strategy::PathIntegral;
  else if (strategy == "identity") p.strategy = algebra::Strategy::Identity;
  else throw ConfigError(where + ".strategy must be path_integral or identity");
  read_optional(j, "source_tag", p.source_tag, where);
  read(j, "sites", p.sites, where);
  return p;
}

json primitive_json(const algebra::PrimitiveSpec& p) {
  json j{{"character", p.character},
         {"state", p.state},
         {"strategy", p.strategy == algebra::Strategy::Identity ? "identity" : "path_integral"},
         {"sites", p.sites}};
  if (p.source_tag) j["source_tag"] = *p.source_tag;
  return j;
}

json pairs_json(const std::set<std::pair<std::string, std::string>>& s) {
  json a = json::array();
  for (const auto& [x, y] : s) a.push_back({x, y});
  return a;
}

algebra::PrimitiveSpec make_primitive(const std::string& id, const std::string& character, const std::string& state,
                                      algebra::Strategy strategy, const std::string& source,
                                      std::vector<std::vector<int>> sites = {}) {
  algebra::PrimitiveSpec p;
  p.id = id;
  p.character = character;
  p.state = state;
  p.strategy = strategy;
  p.source_tag = source;
  p.sites = std::move(sites);
  return p;
}

void apply_scenario_defaults(ScenarioConfig& c, bool packets_given, bool checks_given, bool process_given) {
  const double inv_sqrt2 = 1 / std::sqrt(2.0);
  auto packet_at = [](double x0, double weight, const std::string& tag) {
    WeightedPacket w;
    w.packet.x0 = x0;
    w.weight = weight;
    w.tag = tag;
    return w;
  };
  auto& pr = c.process;
  if (c.scenario == "free_packet" || c.scenario.empty()) {
    if (!packets_given) c.packets = {WeightedPacket{}};
    if (!checks_given) c.checks = {CheckConfig{"Linf", 0.05, true}};
  } else if (c.scenario == "superposition") {
    if (!packets_given) c.packets = {packet_at(-1.5, inv_sqrt2, "P1"), packet_at(1.5, inv_sqrt2, "P2")};
  } else if (c.scenario == "two_slit") {
    if (!packets_given) c.packets = {packet_at(-1.5, inv_sqrt2, "L"), packet_at(1.5, inv_sqrt2, "R")};
    c.strategy.coupling = "free";
  } else if (c.scenario == "entanglement" && !process_given) {
    pr.expr = "(A0 (+) A1) [x]@entangle (B0 (+) B1)";
    pr.rounds = 1;
    using algebra::Strategy;
    pr.primitives = {{"A0", make_primitive("A0", "A", "0", Strategy::Identity, "A", {{0}})},
                     {"A1", make_primitive("A1", "A", "1", Strategy::Identity, "A", {{1}})},
                     {"B0", make_primitive("B0", "B", "0", Strategy::Identity, "B", {{0}})},
                     {"B1", make_primitive("B1", "B", "1", Strategy::Identity, "B", {{1}})}};
    pr.initial = {InitialInformon{{0}, "A", inv_sqrt2, "A", "0"}, InitialInformon{{1}, "A", inv_sqrt2, "A", "1"},
                  InitialInformon{{0}, "B", inv_sqrt2, "B", "0"}, InitialInformon{{1}, "B", inv_sqrt2, "B", "1"}};
    if (!c.strategy.half_width) c.strategy.half_width = c.strategy.l_P;
  } else if (c.scenario == "cat" && !process_given) {
    pr.expr = "0.70710678118654757*((Dn (x) Ca) [+]@cat (Dr (x) Cd))";
    pr.rounds = 2;
    using algebra::Strategy;
    pr.primitives = {{"Dn", make_primitive("Dn", "detector", "n", Strategy::PathIntegral, "D")},
                     {"Dr", make_primitive("Dr", "detector", "r", Strategy::PathIntegral, "D")},
                     {"Ca", make_primitive("Ca", "cat", "a", Strategy::PathIntegral, "C")},
                     {"Cd", make_primitive("Cd", "cat", "d", Strategy::PathIntegral, "C")}};
    pr.initial = {InitialInformon{{0}, "D", 1.0, "detector", "n"}, InitialInformon{{0}, "C", 1.0, "cat", "a"}};
    pr.dead = {"Dr", "Cd"};
    pr.compat.incompatible_products = {{"Ca", "Dr"}, {"Cd", "Dn"}};
    if (!c.strategy.half_width) c.strategy.half_width = c.strategy.l_P;
  }
}

}  // namespace

ScenarioConfig config_from_json(const json& j) {
  check_keys(j, {"scenario", "rng_seed", "strategy", "packet", "packets", "grid", "refine", "process", "checks",
                 "bounds", "output"},
             "config");
  ScenarioConfig c;
  read(j, "scenario", c.scenario, "config");
  if (!c.scenario.empty() && std::find(kScenarios.begin(), kScenarios.end(), c.scenario) == kScenarios.end())
    throw ConfigError("unknown scenario '" + c.scenario + "'");
  read(j, "rng_seed", c.rng_seed, "config");

  if (j.contains("strategy")) {
    const auto& s = j.at("strategy");
    const std::string w = "strategy";
    check_keys(s, {"t_P", "l_P", "dim", "mass", "hbar", "distance_bound", "max_sources", "rounds_per_generation",
                   "band_limit", "coupling", "boundary", "half_width", "padding", "generations", "potential",
                   "full_content"},
               w);
    auto& st = c.strategy;
    read(s, "t_P", st.t_P, w);
    read(s, "l_P", st.l_P, w);
    read(s, "dim", st.dim, w);
    read(s, "mass", st.mass, w);
    read(s, "hbar", st.hbar, w);
    read_optional(s, "distance_bound", st.distance_bound, w);
    read_optional(s, "max_sources", st.max_sources, w);
    read(s, "rounds_per_generation", st.rounds_per_generation, w);
    read(s, "band_limit", st.band_limit, w);
    read(s, "coupling", st.coupling, w);
    read(s, "boundary", st.boundary, w);
    read_optional(s, "half_width", st.half_width, w);
    read(s, "padding", st.padding, w);
    read(s, "generations", st.generations, w);
    read(s, "potential", st.potential, w);
    read(s, "full_content", st.full_content, w);
    if (st.coupling != "exclusive" && st.coupling != "free") throw ConfigError("strategy.coupling must be exclusive or free");
    if (st.boundary != "absorbing" && st.boundary != "periodic")
      throw ConfigError("strategy.boundary must be absorbing or periodic");
    if (st.generations < 0) throw ConfigError("strategy.generations must be >= 0");
  }

  bool packets_given = false;
  if (j.contains("packet") && j.contains("packets")) throw ConfigError("give either packet or packets, not both");
  if (j.contains("packet")) {
    c.packets = {WeightedPacket{read_packet(j.at("packet"), "packet")}};
    packets_given = true;
  }
  if (j.contains("packets")) {
    if (!j.at("packets").is_array()) throw ConfigError("packets must be an array");
    for (std::size_t i = 0; i < j.at("packets").size(); ++i) {
      WeightedPacket w;
      w.packet = read_packet(j.at("packets")[i], "packets[" + std::to_string(i) + "]", &w);
      c.packets.push_back(w);
    }
    packets_given = true;
  }

  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    check_keys(g, {"lo", "hi", "points"}, "grid");
    read(g, "lo", c.grid.lo, "grid");
    read(g, "hi", c.grid.hi, "grid");
    read(g, "points", c.grid.points, "grid");
    if (!(c.grid.hi >= c.grid.lo) || c.grid.points == 0) throw ConfigError("grid needs lo <= hi and points >= 1");
  }

  if (j.contains("refine")) {
    const auto& r = j.at("refine");
    check_keys(r, {"levels", "t_final"}, "refine");
    read(r, "levels", c.refine.levels, "refine");
    read(r, "t_final", c.refine.t_final, "refine");
    if (c.refine.levels.empty()) throw ConfigError("refine.levels must not be empty");
    for (double l : c.refine.levels)
      if (!(l > 0)) throw ConfigError("refine.levels must be positive");
  }

  bool process_given = false;
  if (j.contains("process")) {
    process_given = true;
    const auto& p = j.at("process");
    const std::string w = "process";
    check_keys(p, {"expr", "rounds", "cap", "runs", "primitives", "compat", "initial", "dead"}, w);
    auto& pr = c.process;
    read(p, "expr", pr.expr, w);
    read(p, "rounds", pr.rounds, w);
    read(p, "cap", pr.cap, w);
    read(p, "runs", pr.runs, w);
    read(p, "dead", pr.dead, w);
    if (p.contains("primitives")) {
      for (const auto& [id, spec] : p.at("primitives").items())
        pr.primitives[id] = read_primitive(spec, id, w + ".primitives." + id);
    }
    if (p.contains("compat")) {
      const auto& cj = p.at("compat");
      check_keys(cj, {"summable_characters", "incompatible_product_characters", "incompatible_products",
                      "fermionic_characters"},
                 w + ".compat");
      if (cj.contains("summable_characters")) pr.compat.summable_characters = read_pairs(cj.at("summable_characters"), "compat");
      if (cj.contains("incompatible_product_characters"))
        pr.compat.incompatible_product_characters = read_pairs(cj.at("incompatible_product_characters"), "compat");
      if (cj.contains("incompatible_products"))
        pr.compat.incompatible_products = read_pairs(cj.at("incompatible_products"), "compat");
      read(cj, "fermionic_characters", pr.compat.fermionic_characters, w + ".compat");
    }
    if (p.contains("initial")) {
      if (!p.at("initial").is_array()) throw ConfigError("process.initial must be an array");
      for (const auto& e : p.at("initial")) {
        check_keys(e, {"coords", "tag", "gamma", "character", "state"}, w + ".initial[]");
        InitialInformon inf;
        read(e, "coords", inf.coords, w + ".initial[]");
        read(e, "tag", inf.tag, w + ".initial[]");
        if (e.contains("gamma")) inf.gamma = read_complex(e.at("gamma"), w + ".initial[].gamma");
        read(e, "character", inf.character, w + ".initial[]");
        read(e, "state", inf.state, w + ".initial[]");
        if (static_cast<int>(inf.coords.size()) != c.strategy.dim)
          throw ConfigError("process.initial coordinates must have strategy.dim entries");
        pr.initial.push_back(inf);
      }
    }
    if (pr.rounds == 0) throw ConfigError("process.rounds must be >= 1");
  }

  bool checks_given = false;
  if (j.contains("checks")) {
    checks_given = true;
    if (!j.at("checks").is_array()) throw ConfigError("checks must be an array");
    for (const auto& e : j.at("checks")) {
      check_keys(e, {"metric", "tolerance", "relative"}, "checks[]");
      CheckConfig ch;
      read(e, "metric", ch.metric, "checks[]");
      read(e, "tolerance", ch.tolerance, "checks[]");
      read(e, "relative", ch.relative, "checks[]");
      try {
        oracle::metric_from_string(ch.metric);
      } catch (const InvalidArgument& ex) {
        throw ConfigError(ex.what());
      }
      if (!(ch.tolerance > 0)) throw ConfigError("check tolerance must be positive");
      c.checks.push_back(ch);
    }
  }

  if (j.contains("bounds")) {
    const auto& b = j.at("bounds");
    check_keys(b, {"gamma", "epsilon", "delta", "l_P", "psi_sup", "dpsi_sup", "M", "W", "r", "psi_max", "c"}, "bounds");
    auto& bu = c.bounds.butzer;
    read(b, "gamma", bu.gamma, "bounds");
    read(b, "epsilon", bu.epsilon, "bounds");
    read(b, "delta", bu.delta, "bounds");
    read(b, "l_P", bu.l_P, "bounds");
    read(b, "psi_sup", bu.psi_sup, "bounds");
    read(b, "dpsi_sup", bu.dpsi_sup, "bounds");
    read(b, "M", bu.M, "bounds");
    read_optional(b, "W", bu.W, "bounds");
    read_optional(b, "r", bu.r, "bounds");
    read(b, "psi_max", c.bounds.psi_max, "bounds");
    read(b, "c", c.bounds.c, "bounds");
  }

  if (j.contains("output")) {
    check_keys(j.at("output"), {"dir"}, "output");
    read(j.at("output"), "dir", c.output_dir, "output");
  }

  apply_scenario_defaults(c, packets_given, checks_given, process_given);
  // Reference packets always evolve under the strategy's mass and hbar.
  for (auto& w : c.packets) {
    w.packet.mass = c.strategy.mass;
    w.packet.hbar = c.strategy.hbar;
  }
  if (c.scenario == "custom" && c.process.expr.empty()) throw ConfigError("custom scenario needs process.expr");
  if (!(c.strategy.t_P > 0) || !(c.strategy.l_P > 0)) throw ConfigError("strategy spacings must be positive");
  if (c.strategy.dim < 1 || c.strategy.dim > 3) throw ConfigError("strategy.dim must be 1, 2 or 3");
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

json to_json(const ScenarioConfig& c) {
  const auto& st = c.strategy;
  json strategy{{"t_P", st.t_P},
                {"l_P", st.l_P},
                {"dim", st.dim},
                {"mass", st.mass},
                {"hbar", st.hbar},
                {"distance_bound", st.distance_bound ? json(*st.distance_bound) : json(nullptr)},
                {"max_sources", st.max_sources ? json(*st.max_sources) : json(nullptr)},
                {"rounds_per_generation", st.rounds_per_generation},
                {"band_limit", st.band_limit},
                {"coupling", st.coupling},
                {"boundary", st.boundary},
                {"half_width", st.half_width ? json(*st.half_width) : json(nullptr)},
                {"padding", st.padding},
                {"generations", st.generations},
                {"potential", st.potential},
                {"full_content", st.full_content}};
  json packets = json::array();
  for (const auto& w : c.packets)
    packets.push_back({{"sigma0", w.packet.sigma0},
                       {"x0", w.packet.x0},
                       {"k0", w.packet.k0},
                       {"weight", w.weight},
                       {"tag", w.tag}});
  json primitives = json::object();
  for (const auto& [id, p] : c.process.primitives) primitives[id] = primitive_json(p);
  json initial = json::array();
  for (const auto& i : c.process.initial)
    initial.push_back({{"coords", i.coords},
                       {"tag", i.tag},
                       {"gamma", {i.gamma.real(), i.gamma.imag()}},
                       {"character", i.character},
                       {"state", i.state}});
  json checks = json::array();
  for (const auto& ch : c.checks)
    checks.push_back({{"metric", ch.metric}, {"tolerance", ch.tolerance}, {"relative", ch.relative}});
  const auto& bu = c.bounds.butzer;
  json bounds{{"gamma", bu.gamma},     {"epsilon", bu.epsilon},   {"delta", bu.delta},
              {"l_P", bu.l_P},         {"psi_sup", bu.psi_sup},   {"dpsi_sup", bu.dpsi_sup},
              {"M", bu.M},             {"W", bu.W ? json(*bu.W) : json(nullptr)},
              {"r", bu.r ? json(*bu.r) : json(nullptr)},
              {"psi_max", c.bounds.psi_max}, {"c", c.bounds.c}};
  json compat{{"summable_characters", pairs_json(c.process.compat.summable_characters)},
              {"incompatible_product_characters", pairs_json(c.process.compat.incompatible_product_characters)},
              {"incompatible_products", pairs_json(c.process.compat.incompatible_products)},
              {"fermionic_characters", c.process.compat.fermionic_characters}};
  return {{"scenario", c.scenario},
          {"rng_seed", c.rng_seed},
          {"strategy", strategy},
          {"packets", packets},
          {"grid", {{"lo", c.grid.lo}, {"hi", c.grid.hi}, {"points", c.grid.points}}},
          {"refine", {{"levels", c.refine.levels}, {"t_final", c.refine.t_final}}},
          {"process",
           {{"expr", c.process.expr},
            {"rounds", c.process.rounds},
            {"cap", c.process.cap},
            {"runs", c.process.runs},
            {"primitives", primitives},
            {"compat", compat},
            {"initial", initial},
            {"dead", c.process.dead}}},
          {"checks", checks},
          {"bounds", bounds},
          {"output", {{"dir", c.output_dir}}}};
}

dynamics::StrategyParams strategy_params(const ScenarioConfig& c) {
  const auto& st = c.strategy;
  dynamics::StrategyParams p;
  p.spacing = Spacing{st.t_P, st.l_P, st.dim};
  p.mass = st.mass;
  p.hbar = st.hbar;
  if (st.distance_bound) p.distance_bound = *st.distance_bound;
  if (st.max_sources) p.max_sources = *st.max_sources;
  p.rounds_per_generation = st.rounds_per_generation;
  p.band_limit = st.band_limit;
  const double v0 = st.potential;
  if (v0 != 0) p.potential = [v0](const LatticeSite&) { return v0; };
  p.rng_seed = c.rng_seed;
  p.coupling = st.coupling == "free" ? dynamics::Coupling::Free : dynamics::Coupling::Exclusive;
  p.full_content = st.full_content;

  double half_width = 0;
  if (st.half_width) {
    half_width = *st.half_width;
  } else if (!c.packets.empty()) {
    for (const auto& w : c.packets) half_width = std::max(half_width, std::abs(w.packet.x0) + 6 * w.packet.sigma0);
    half_width += st.padding;
  } else {
    int reach = 1;
    for (const auto& i : c.process.initial)
      for (int x : i.coords) reach = std::max(reach, std::abs(x));
    half_width = reach * st.l_P;
  }
  // Nudge so that a half-width that is an exact multiple of l_P keeps its edge site.
  p.box = box_for_half_width(st.dim, half_width * (1 + 1e-12), st.l_P,
                             st.boundary == "periodic" ? Boundary::Periodic : Boundary::Absorbing);
  return p;
}

dynamics::StrategyParams strategy_params(const ScenarioConfig& c, double level) {
  ScenarioConfig copy = c;
  copy.strategy.t_P = level;
  copy.strategy.l_P = level;
  return strategy_params(copy);
}

}  // namespace informon::cli
