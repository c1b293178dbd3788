#include "informon/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "informon/errors.hpp"
#include "informon/parser.hpp"

namespace informon::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class Writer {
 public:
  explicit Writer(const std::string& dir) : dir_(dir) { fs::create_directories(dir_); }

  void csv(const std::string& name, const interp::WaveField& field) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir_ / name).string());
    interp::write_csv(out, field);
    files.push_back(name);
  }

  void text(const std::string& name, const std::string& body) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir_ / name).string());
    out << body;
    files.push_back(name);
  }

  void json_file(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }

  std::vector<std::string> files;

 private:
  fs::path dir_;
};

json base_report(const std::string& command, const ScenarioConfig& c) {
  return {{"schema_version", 1}, {"command", command}, {"config", to_json(c)}};
}

RunReport finish(Writer& w, json report, const std::string& name) {
  bool pass = true;
  if (report.contains("checks"))
    for (const auto& ch : report["checks"]) pass = pass && ch.value("pass", false);
  report["pass"] = pass;
  w.json_file(name, report);
  RunReport r;
  r.report = std::move(report);
  r.exit_code = pass ? kPass : kNumericalFail;
  r.files = w.files;
  return r;
}

std::vector<interp::Point> grid_at(const ScenarioConfig& c, double time) {
  return interp::uniform_grid(c.strategy.dim, time, c.grid.lo, c.grid.hi, c.grid.points);
}

double max_abs(const oracle::Reference& ref, std::span<const interp::Point> grid) {
  double m = 0;
  for (const auto& z : grid) m = std::max(m, std::abs(ref(z)));
  return m;
}

json check_json(const CheckConfig& ch, double value, const json& params) {
  return oracle::error_report(ch.metric + (ch.relative ? "_relative" : ""), value, ch.tolerance, params,
                              value <= ch.tolerance);
}

/// Evaluates the configured checks against the last field of `history`.
json evaluate_checks(const ScenarioConfig& c, std::span<const interp::WaveField> history, const oracle::Reference& ref,
                     const json& params) {
  json out = json::array();
  for (const auto& ch : c.checks) {
    oracle::DiscrepancySpec spec;
    spec.metric = oracle::metric_from_string(ch.metric);
    spec.tolerance = ch.tolerance;
    spec.mass = c.strategy.mass;
    spec.hbar = c.strategy.hbar;
    const double v0 = c.strategy.potential;
    spec.potential = [v0](const interp::Point&) { return v0; };
    if (spec.metric == oracle::Metric::SchrodingerResidual && history.size() < 3) {
      out.push_back(oracle::error_report(ch.metric, std::nan(""), ch.tolerance, params, false));
      continue;
    }
    double value = oracle::discrepancy(history, ref, spec);
    if (ch.relative) {
      const double scale = max_abs(ref, history.back().grid);
      value = scale > 0 ? value / scale : value;
    }
    out.push_back(check_json(ch, value, params));
  }
  return out;
}

std::vector<interp::WaveField> fields_of(std::span<const CausalTapestry> history, const ScenarioConfig& c,
                                         const Spacing& spacing) {
  std::vector<interp::WaveField> fields;
  for (const auto& t : history) {
    const auto grid = grid_at(c, t.generation() * spacing.t_P);
    fields.push_back(interp::global_field(t, grid, spacing));
  }
  return fields;
}

std::vector<double> strengths(std::span<const CausalTapestry> history, const Spacing& spacing) {
  std::vector<double> s;
  for (const auto& t : history) s.push_back(interp::process_strength(t, spacing));
  return s;
}

json expr_json(const algebra::Expr& e) {
  static const char* names[] = {"Primitive", "Zero",     "Scalar",   "SumExcl",   "SumFree",
                                "SumInter",  "ProdExcl", "ProdFree", "ProdInter", "Concat"};
  json j{{"kind", names[static_cast<int>(e->kind)]}};
  if (e->kind == algebra::Kind::Primitive) j["id"] = e->primitive.id;
  if (e->kind == algebra::Kind::Scalar) j["weight"] = {e->weight.real(), e->weight.imag()};
  if (algebra::is_interactive(e->kind)) {
    j["rule"] = e->rule;
    j["free"] = e->free;
  }
  if (!e->children.empty()) {
    j["children"] = json::array();
    for (const auto& ch : e->children) j["children"].push_back(expr_json(ch));
  }
  return j;
}

algebra::Context process_context(const ScenarioConfig& c, const dynamics::StrategyParams& params) {
  algebra::Context ctx;
  ctx.params = params;
  ctx.rounds = c.process.rounds;
  ctx.cap = c.process.cap;
  return ctx;
}

// Scenario drivers.

RunReport free_packet(const ScenarioConfig& c) {
  Writer w(c.output_dir);
  json report = base_report("scenario", c);
  json levels = json::array();
  std::vector<double> errors;
  json checks = json::array();
  for (std::size_t li = 0; li < c.refine.levels.size(); ++li) {
    const double level = c.refine.levels[li];
    const auto params = strategy_params(c, level);
    const int generations = static_cast<int>(std::lround(c.refine.t_final / level));
    const auto initial = packet_tapestry(c, params);
    dynamics::Rng rng(c.rng_seed);
    const auto history = dynamics::evolve(initial, generations, params, rng);
    const auto fields = fields_of(history, c, params.spacing);
    for (std::size_t g = 0; g < fields.size(); ++g)
      w.csv("free_packet_level" + std::to_string(li) + "_g" + std::to_string(g) + ".csv", fields[g]);
    const auto ref = packet_reference(c, params);
    oracle::DiscrepancySpec spec;
    const double linf = oracle::discrepancy(fields.back(), ref, spec);
    const double scale = max_abs(ref, fields.back().grid);
    errors.push_back(linf);
    levels.push_back({{"level", level},
                      {"generations", generations},
                      {"sites", params.box.size()},
                      {"linf", linf},
                      {"relative_linf", linf / scale},
                      {"boundary_magnitude", interp::boundary_magnitude(history.back(), params.box)},
                      {"process_strength", strengths(history, params.spacing)}});
    if (li + 1 == c.refine.levels.size()) {
      json params_json{{"level", level}, {"t_final", c.refine.t_final}};
      checks = evaluate_checks(c, fields, ref, params_json);
    }
  }
  bool monotone = true;
  for (std::size_t i = 1; i < errors.size(); ++i) monotone = monotone && errors[i] < errors[i - 1];
  report["levels"] = levels;
  checks.push_back(oracle::error_report("linf_strictly_decreasing", monotone ? 1.0 : 0.0, 1.0,
                                        json{{"levels", c.refine.levels}}, monotone));
  report["checks"] = checks;
  return finish(w, report, "free_packet_report.json");
}

/// Shared by superposition and two_slit: evolve the tagged packets and return
/// the final global field plus one partial field per packet tag.
struct Evolved {
  std::vector<CausalTapestry> history;
  std::vector<interp::WaveField> fields;
  std::vector<interp::WaveField> partials;
};

Evolved evolve_packets(const ScenarioConfig& c, const dynamics::StrategyParams& params) {
  Evolved e;
  dynamics::Rng rng(c.rng_seed);
  e.history = dynamics::evolve(packet_tapestry(c, params), c.strategy.generations, params, rng);
  e.fields = fields_of(e.history, c, params.spacing);
  for (const auto& wp : c.packets)
    e.partials.push_back(interp::partial_field(e.history.back(), wp.tag, e.fields.back().grid, params.spacing));
  return e;
}

RunReport superposition(const ScenarioConfig& c) {
  Writer w(c.output_dir);
  const auto params = strategy_params(c);
  const auto e = evolve_packets(c, params);
  for (std::size_t g = 0; g < e.fields.size(); ++g) w.csv("superposition_g" + std::to_string(g) + ".csv", e.fields[g]);
  for (std::size_t k = 0; k < e.partials.size(); ++k) w.csv("superposition_" + c.packets[k].tag + ".csv", e.partials[k]);

  double linearity = 0;
  const auto& phi = e.fields.back();
  for (std::size_t i = 0; i < phi.size(); ++i) {
    Complex parts = 0;
    for (const auto& p : e.partials) parts += p.values[i];
    linearity = std::max(linearity, std::abs(phi.values[i] - parts));
  }
  json report = base_report("scenario", c);
  const auto ref = packet_reference(c, params);
  oracle::DiscrepancySpec spec;
  report["linf_vs_exact"] = oracle::discrepancy(phi, ref, spec);
  report["process_strength"] = strengths(e.history, params.spacing);
  json checks = evaluate_checks(c, e.fields, ref, json{{"generations", c.strategy.generations}});
  checks.push_back(oracle::error_report("sum_of_partials", linearity, 1e-10, json::object(), linearity <= 1e-10));
  report["checks"] = checks;
  return finish(w, report, "superposition_report.json");
}

RunReport two_slit(const ScenarioConfig& c) {
  if (c.packets.size() != 2) throw ConfigError("two_slit needs exactly two packets");
  Writer w(c.output_dir);
  const auto params = strategy_params(c);
  const auto e = evolve_packets(c, params);
  for (std::size_t g = 0; g < e.fields.size(); ++g) w.csv("two_slit_g" + std::to_string(g) + ".csv", e.fields[g]);
  w.csv("two_slit_phi.csv", e.fields.back());
  w.csv("two_slit_phi_L.csv", e.partials[0]);
  w.csv("two_slit_phi_R.csv", e.partials[1]);

  const auto& phi = e.fields.back().values;
  const auto& left = e.partials[0].values;
  const auto& right = e.partials[1].values;
  double mismatch = 0, cross_max = 0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double lhs = std::norm(phi[i]) - std::norm(left[i]) - std::norm(right[i]);
    const double cross = 2 * (std::conj(left[i]) * right[i]).real();
    mismatch = std::max(mismatch, std::abs(lhs - cross));
    cross_max = std::max(cross_max, std::abs(cross));
  }
  json report = base_report("scenario", c);
  report["cross_term_max"] = cross_max;
  report["process_strength"] = strengths(e.history, params.spacing);
  json checks = evaluate_checks(c, e.fields, packet_reference(c, params), json{{"generations", c.strategy.generations}});
  checks.push_back(oracle::error_report("cross_term_identity", mismatch, 1e-10, json::object(), mismatch <= 1e-10));
  checks.push_back(
      oracle::error_report("interference_present", cross_max, 1e-8, json::object(), cross_max > 1e-8));
  report["checks"] = checks;
  return finish(w, report, "two_slit_report.json");
}

/// Factor grids for a configuration run: the lattice sites of the nascent generation.
std::vector<std::vector<interp::Point>> factor_grids(std::size_t factors, const dynamics::StrategyParams& params,
                                                     int generation) {
  const auto sites = params.box.sites(generation);
  return std::vector<std::vector<interp::Point>>(factors, interp::site_grid(sites, params.spacing));
}

json config_field_json(const algebra::ConfigFieldSet& set, std::span<const LatticeSite> sites) {
  json fields = json::array();
  const std::size_t n = sites.size();
  for (const auto& values : set.fields) {
    json points = json::array();
    for (std::size_t flat = 0; flat < values.size(); ++flat) {
      json coords = json::array();
      std::size_t rest = flat;
      std::vector<std::size_t> idx(set.factor_grids.size());
      for (std::size_t f = idx.size(); f-- > 0;) {
        idx[f] = rest % n;
        rest /= n;
      }
      for (auto i : idx) coords.push_back(sites[i].coords);
      points.push_back({{"coords", coords}, {"re", values[flat].real()}, {"im", values[flat].imag()}});
    }
    fields.push_back(points);
  }
  return fields;
}

RunReport entanglement(const ScenarioConfig& c) {
  Writer w(c.output_dir);
  const auto params = strategy_params(c);
  const auto initial = process_tapestry(c, params);
  const auto ctx = process_context(c, params);
  const auto expr = process_expr(c);

  algebra::Expr core = expr;
  while (core->kind == algebra::Kind::Scalar) core = core->children[0];
  if (!algebra::is_product(core->kind) || core->children.size() != 2)
    throw ConfigError("entanglement needs a two-factor product process");
  const int generation = initial.generation() + 1;
  const auto grids = factor_grids(2, params, generation);
  const auto set = algebra::config_pcm(expr, initial, ctx, grids);
  w.text("entanglement_tree.dot", algebra::build_sequence_tree(core, initial, ctx).to_dot());

  // Cross pairs: a site of a factor-0 primitive in one state with a site of a
  // factor-1 primitive in another.
  std::vector<std::map<std::vector<int>, std::set<std::string>>> states_at(2);
  for (std::size_t f = 0; f < 2; ++f)
    for (const auto& id : algebra::primitive_ids(core->children[f])) {
      const auto it = c.process.primitives.find(id);
      if (it == c.process.primitives.end()) continue;
      for (const auto& s : it->second.sites) states_at[f][s].insert(it->second.state);
    }
  const auto sites = params.box.sites(generation);
  double cross = 0, paired = 0;
  for (const auto& values : set.fields)
    for (std::size_t i = 0; i < sites.size(); ++i)
      for (std::size_t j = 0; j < sites.size(); ++j) {
        const auto a = states_at[0].find(sites[i].coords);
        const auto b = states_at[1].find(sites[j].coords);
        if (a == states_at[0].end() || b == states_at[1].end()) continue;
        std::vector<std::string> common;
        std::set_intersection(a->second.begin(), a->second.end(), b->second.begin(), b->second.end(),
                              std::back_inserter(common));
        const std::size_t flat = set.flat_index(std::vector<std::size_t>{i, j});
        const double amp = std::abs(values[flat]);
        if (common.empty()) cross = std::max(cross, amp);
        else paired = std::max(paired, amp);
      }

  json report = base_report("scenario", c);
  report["maximal_tapestries"] = set.maximal.size();
  report["fields"] = config_field_json(set, sites);
  report["cross_pair_max"] = cross;
  report["paired_max"] = paired;
  json checks = json::array();
  checks.push_back(oracle::error_report("cross_pair_amplitude", cross, 1e-14, json::object(), cross <= 1e-14));
  checks.push_back(oracle::error_report("paired_amplitude_present", paired, 1e-14, json::object(), paired > 1e-14));
  report["checks"] = checks;
  return finish(w, report, "entanglement_report.json");
}

RunReport cat(const ScenarioConfig& c) {
  Writer w(c.output_dir);
  const auto params = strategy_params(c);
  const auto initial = process_tapestry(c, params);
  const auto ctx = process_context(c, params);
  const auto expr = process_expr(c);
  const std::set<std::string> dead(c.process.dead.begin(), c.process.dead.end());

  dynamics::Rng rng(c.rng_seed);
  std::size_t dead_to_alive = 0, alive_to_dead = 0, ever_dead = 0;
  std::map<std::string, std::size_t> histories;
  json log = json::array();
  for (std::size_t run = 0; run < c.process.runs; ++run) {
    const auto path = algebra::sample_path(expr, initial, ctx, rng);
    std::string history;
    for (const auto& round : path.rounds) {
      const bool is_dead =
          std::any_of(round.begin(), round.end(), [&](const algebra::Placement& p) { return dead.count(p.tag) > 0; });
      history += is_dead ? 'd' : 'a';
    }
    for (std::size_t i = 1; i < history.size(); ++i) {
      if (history[i - 1] == 'd' && history[i] == 'a') ++dead_to_alive;
      if (history[i - 1] == 'a' && history[i] == 'd') ++alive_to_dead;
    }
    if (history.find('d') != std::string::npos) ++ever_dead;
    ++histories[history];
    log.push_back(history);
  }
  w.json_file("cat_transitions.json", json{{"schema_version", 1}, {"runs", log}});

  // The mismatched detector/cat pairings belong to the null subalgebra.
  json null_products = json::array();
  for (const auto& [a, b] : c.process.compat.incompatible_products) {
    auto pa = c.process.primitives.count(a) ? algebra::primitive(c.process.primitives.at(a)) : algebra::primitive(a);
    auto pb = c.process.primitives.count(b) ? algebra::primitive(c.process.primitives.at(b)) : algebra::primitive(b);
    const auto s = algebra::simplify(algebra::prod_excl({pa, pb}), c.process.compat);
    null_products.push_back({{"product", a + " (x) " + b}, {"zero", s->kind == algebra::Kind::Zero}});
  }

  json report = base_report("scenario", c);
  report["runs"] = c.process.runs;
  report["dead_to_alive"] = dead_to_alive;
  report["alive_to_dead"] = alive_to_dead;
  report["runs_ending_dead"] = ever_dead;
  report["histories"] = histories;
  report["null_products"] = null_products;
  json checks = json::array();
  checks.push_back(oracle::error_report("dead_to_alive_transitions", static_cast<double>(dead_to_alive), 0.0,
                                        json{{"runs", c.process.runs}}, dead_to_alive == 0));
  report["checks"] = checks;
  return finish(w, report, "cat_report.json");
}

/// Per-axis sup norms of the first packet at t = 0 on a fine grid: ||Psi||,
/// ||Psi'|| and M = sup |x - x0|^gamma |Psi|.
void packet_sups(const oracle::PacketSpec& p, double gamma, double& psi_sup, double& dpsi_sup, double& m) {
  const double reach = 12 * p.sigma0;
  const int n = 24001;
  const double h = 1e-6 * p.sigma0;
  psi_sup = dpsi_sup = m = 0;
  for (int i = 0; i < n; ++i) {
    const double x = p.x0 - reach + 2 * reach * i / (n - 1);
    const Complex v = oracle::exact_free_packet(p, x, 0.0);
    const Complex d = (oracle::exact_free_packet(p, x + h, 0.0) - oracle::exact_free_packet(p, x - h, 0.0)) / (2 * h);
    psi_sup = std::max(psi_sup, std::abs(v));
    dpsi_sup = std::max(dpsi_sup, std::abs(d));
    m = std::max(m, std::pow(std::abs(x - p.x0), gamma) * std::abs(v));
  }
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const CapExceeded*>(&e)) return kCapExceeded;
  if (dynamic_cast<const Error*>(&e)) return kConfigInvalid;
  return kUnexpected;
}

CausalTapestry packet_tapestry(const ScenarioConfig& c, const dynamics::StrategyParams& params) {
  if (c.packets.empty()) throw ConfigError("this run needs at least one packet");
  CausalTapestry t(0);
  const auto sites = params.box.sites(0);
  for (const auto& wp : c.packets) {
    try {
      interp::require_below_nyquist(oracle::packet_band_limit(wp.packet), params.spacing);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("packet ") + wp.tag + ": " + e.what());
    }
    for (const auto& s : sites) {
      const auto z = interp::embedding(s, params.spacing);
      Informon inf;
      inf.site = s;
      inf.label = make_label(s, wp.tag);
      inf.strength = wp.weight * oracle::exact_free_packet(wp.packet, z, params.spacing.dim);
      inf.props.potential = params.potential_at(s);
      inf.props.subprocess = wp.tag;
      t.insert(std::move(inf));
    }
  }
  t.seal();
  return t;
}

oracle::Reference packet_reference(const ScenarioConfig& c, const dynamics::StrategyParams& params) {
  std::vector<std::pair<double, oracle::PacketSpec>> parts;
  for (const auto& wp : c.packets)
    parts.emplace_back(wp.weight, oracle::lattice_reference(wp.packet, params, c.strategy.potential));
  const int dim = params.spacing.dim;
  return [parts, dim](const interp::Point& z) {
    Complex v = 0;
    for (const auto& [weight, p] : parts) v += weight * oracle::exact_free_packet(p, z, dim);
    return v;
  };
}

CausalTapestry process_tapestry(const ScenarioConfig& c, const dynamics::StrategyParams& params) {
  if (c.process.initial.empty()) return packet_tapestry(c, params);
  CausalTapestry t(0);
  for (const auto& i : c.process.initial) {
    Informon inf;
    inf.site = LatticeSite{0, i.coords};
    inf.label = make_label(inf.site, i.tag);
    inf.strength = i.gamma;
    inf.props.potential = params.potential_at(inf.site);
    inf.props.subprocess = i.tag;
    inf.props.character = i.character;
    inf.props.state = i.state;
    t.insert(std::move(inf));
  }
  t.seal();
  return t;
}

algebra::Expr process_expr(const ScenarioConfig& c) {
  if (c.process.expr.empty()) throw ConfigError("process.expr is empty");
  return algebra::bind_primitives(algebra::parse_process_expr(c.process.expr), c.process.primitives);
}

RunReport run_evolve(const ScenarioConfig& c) {
  Writer w(c.output_dir);
  const auto params = strategy_params(c);
  dynamics::Rng rng(c.rng_seed);
  const auto history = dynamics::evolve(packet_tapestry(c, params), c.strategy.generations, params, rng);
  const auto fields = fields_of(history, c, params.spacing);
  for (std::size_t g = 0; g < history.size(); ++g) {
    w.csv("evolve_g" + std::to_string(g) + ".csv", fields[g]);
    w.json_file("tapestry_g" + std::to_string(g) + ".json", to_json(history[g]));
  }
  json report = base_report("evolve", c);
  report["generations"] = c.strategy.generations;
  report["sites"] = params.box.size();
  report["process_strength"] = strengths(history, params.spacing);
  report["boundary_magnitude"] = interp::boundary_magnitude(history.back(), params.box);
  report["checks"] = evaluate_checks(c, fields, packet_reference(c, params), json{{"l_P", c.strategy.l_P}});
  return finish(w, report, "evolve_report.json");
}

RunReport run_reconstruct(const ScenarioConfig& c) {
  Writer w(c.output_dir);
  const auto params = strategy_params(c);
  const auto initial = packet_tapestry(c, params);
  const auto grid = grid_at(c, 0.0);
  const auto field = interp::global_field(initial, grid, params.spacing);
  w.csv("reconstruct.csv", field);

  oracle::Reference ref = [&](const interp::Point& z) {
    Complex v = 0;
    for (const auto& wp : c.packets) v += wp.weight * oracle::exact_free_packet(wp.packet, z, params.spacing.dim);
    return v;
  };
  const auto sites = params.box.sites(0);
  const auto sample_grid = interp::site_grid(sites, params.spacing);
  const auto at_sites = interp::global_field(initial, sample_grid, params.spacing);
  oracle::DiscrepancySpec spec;
  const double at_samples = oracle::discrepancy(at_sites, ref, spec);
  json report = base_report("reconstruct", c);
  report["linf_grid"] = oracle::discrepancy(field, ref, spec);
  report["linf_samples"] = at_samples;
  report["terms"] = sites.size();
  report["checks"] = evaluate_checks(c, std::vector{field}, ref, json{{"l_P", c.strategy.l_P}});
  return finish(w, report, "reconstruct_report.json");
}

RunReport run_pcm(const ScenarioConfig& c) {
  Writer w(c.output_dir);
  const auto params = strategy_params(c);
  const auto initial = process_tapestry(c, params);
  const auto ctx = process_context(c, params);
  const auto expr = process_expr(c);
  json report = base_report("pcm", c);
  report["expr"] = algebra::to_string(expr);
  if (expr->kind == algebra::Kind::Concat) {
    // Covering maps are not defined for concatenations; run them once instead.
    dynamics::Rng rng(c.rng_seed);
    const auto result = algebra::evaluate(expr, initial, ctx, rng);
    const auto grid = grid_at(c, result.generation() * params.spacing.t_P);
    w.csv("evaluate.csv", interp::global_field(result, grid, params.spacing));
    w.json_file("evaluate_tapestry.json", to_json(result));
    report["mode"] = "evaluate";
    report["informons"] = result.size();
    return finish(w, report, "pcm_report.json");
  }
  const auto tree = algebra::build_sequence_tree(expr, initial, ctx);
  w.text("sequence_tree.dot", tree.to_dot());
  const auto grid = grid_at(c, (initial.generation() + 1) * params.spacing.t_P);
  algebra::FieldSet set(grid, params.spacing);
  for (const auto& path : tree.paths()) set.insert(interp::global_field(path.tapestry, grid, params.spacing).values);
  for (std::size_t i = 0; i < set.size(); ++i) w.csv("pcm_field_" + std::to_string(i) + ".csv", set.field(i));
  report["mode"] = "pcm";
  report["paths"] = tree.leaf_count();
  report["fields"] = set.size();
  return finish(w, report, "pcm_report.json");
}

RunReport run_bounds(const ScenarioConfig& c) {
  Writer w(c.output_dir);
  json report = base_report("bounds", c);
  json checks = json::array();
  const auto& b = c.bounds;

  oracle::ButzerParams anchor = b.butzer;
  report["butzer_envelope"] = oracle::butzer_envelope(anchor.l_P);
  report["butzer_constant"] = oracle::butzer_constant(anchor);
  report["butzer_bound"] = oracle::butzer_bound(anchor);
  report["yao_thomas_bound"] = oracle::yao_thomas_bound(b.psi_max, b.c);

  if (!c.packets.empty()) {
    // Desk-scale check: one lattice step against the exact packet.
    const auto params = strategy_params(c);
    dynamics::Rng rng(c.rng_seed);
    const auto history = dynamics::evolve(packet_tapestry(c, params), std::max(1, c.strategy.generations), params, rng);
    const auto fields = fields_of(history, c, params.spacing);
    oracle::DiscrepancySpec spec;
    const double measured = oracle::discrepancy(fields.back(), packet_reference(c, params), spec);

    oracle::ButzerParams desk = b.butzer;
    desk.l_P = params.spacing.l_P;
    desk.epsilon = measured;
    desk.delta = 0;
    if (desk.psi_sup == 0 && desk.dpsi_sup == 0 && desk.M == 0)
      packet_sups(c.packets.front().packet, desk.gamma, desk.psi_sup, desk.dpsi_sup, desk.M);
    const double bound = oracle::butzer_bound(desk);
    checks.push_back(oracle::error_report("Linf", measured, bound,
                                          json{{"l_P", desk.l_P},
                                               {"epsilon", desk.epsilon},
                                               {"delta", desk.delta},
                                               {"gamma", desk.gamma},
                                               {"psi_sup", desk.psi_sup},
                                               {"dpsi_sup", desk.dpsi_sup},
                                               {"M", desk.M}},
                                          measured <= bound));
  }
  report["checks"] = checks;
  return finish(w, report, "bounds_report.json");
}

RunReport run_parse(const std::string& text) {
  const auto expr = algebra::parse_process_expr(text);
  RunReport r;
  r.report = {{"schema_version", 1}, {"command", "parse"}, {"input", text}, {"printed", algebra::to_string(expr)},
              {"tree", expr_json(expr)}, {"pass", true}};
  return r;
}

RunReport run_scenario(const ScenarioConfig& c) {
  if (c.scenario == "free_packet") return free_packet(c);
  if (c.scenario == "superposition") return superposition(c);
  if (c.scenario == "two_slit") return two_slit(c);
  if (c.scenario == "entanglement") return entanglement(c);
  if (c.scenario == "cat") return cat(c);
  if (c.scenario == "custom") return run_pcm(c);
  throw ConfigError("config has no scenario");
}

}  // namespace informon::cli
