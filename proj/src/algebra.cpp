#include "informon/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "informon/errors.hpp"

namespace informon::algebra {

namespace {

Expr make(Kind kind, std::vector<Expr> children, std::string rule = {}, bool free = false) {
  auto e = std::make_shared<ProcessExpr>();
  e->kind = kind;
  e->children = std::move(children);
  e->rule = std::move(rule);
  e->free = free;
  for (const auto& c : e->children)
    if (!c) throw InvalidArgument("process expression has a null child");
  return e;
}

Expr make_nary(Kind kind, std::vector<Expr> children, std::string rule = {}, bool free = false) {
  if (children.empty()) throw InvalidArgument("sums and products need at least one operand");
  if (is_interactive(kind) && rule.empty()) throw InvalidArgument("interactive couplings need an explicit rule");
  return make(kind, std::move(children), std::move(rule), free);
}

}  // namespace

Expr primitive(PrimitiveSpec spec) {
  if (spec.id.empty()) throw InvalidArgument("primitive process needs an id");
  auto e = std::make_shared<ProcessExpr>();
  e->kind = Kind::Primitive;
  e->primitive = std::move(spec);
  return e;
}

Expr primitive(const std::string& id) {
  PrimitiveSpec spec;
  spec.id = id;
  return primitive(std::move(spec));
}

Expr zero() { return make(Kind::Zero, {}); }

Expr scalar(Complex weight, Expr child) {
  if (!std::isfinite(weight.real()) || !std::isfinite(weight.imag()))
    throw InvalidArgument("scalar weight must be finite");
  auto e = std::const_pointer_cast<ProcessExpr>(make(Kind::Scalar, {std::move(child)}));
  e->weight = weight;
  return e;
}

Expr sum_excl(std::vector<Expr> children) { return make_nary(Kind::SumExcl, std::move(children)); }
Expr sum_free(std::vector<Expr> children) { return make_nary(Kind::SumFree, std::move(children)); }
Expr sum_inter(std::vector<Expr> children, const std::string& rule, bool free) {
  return make_nary(Kind::SumInter, std::move(children), rule, free);
}
Expr prod_excl(std::vector<Expr> children) { return make_nary(Kind::ProdExcl, std::move(children)); }
Expr prod_free(std::vector<Expr> children) { return make_nary(Kind::ProdFree, std::move(children)); }
Expr prod_inter(std::vector<Expr> children, const std::string& rule, bool free) {
  return make_nary(Kind::ProdInter, std::move(children), rule, free);
}
Expr concat(Expr first, Expr second) { return make(Kind::Concat, {std::move(first), std::move(second)}); }

bool is_sum(Kind k) noexcept { return k == Kind::SumExcl || k == Kind::SumFree || k == Kind::SumInter; }
bool is_product(Kind k) noexcept { return k == Kind::ProdExcl || k == Kind::ProdFree || k == Kind::ProdInter; }
bool is_interactive(Kind k) noexcept { return k == Kind::SumInter || k == Kind::ProdInter; }
bool is_free(const ProcessExpr& e) noexcept {
  return e.kind == Kind::SumFree || e.kind == Kind::ProdFree || (is_interactive(e.kind) && e.free);
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->children.size() != b->children.size()) return false;
  switch (a->kind) {
    case Kind::Primitive:
      if (!(a->primitive == b->primitive)) return false;
      break;
    case Kind::Scalar:
      if (a->weight != b->weight) return false;
      break;
    case Kind::SumInter:
    case Kind::ProdInter:
      if (a->rule != b->rule || a->free != b->free) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a->children.size(); ++i)
    if (!structurally_equal(a->children[i], b->children[i])) return false;
  return true;
}

namespace {

std::string operator_text(const ProcessExpr& e) {
  switch (e.kind) {
    case Kind::SumExcl: return "(+)";
    case Kind::SumFree: return "(^+)";
    case Kind::SumInter: return (e.free ? "[^+]@" : "[+]@") + e.rule;
    case Kind::ProdExcl: return "(x)";
    case Kind::ProdFree: return "(^x)";
    case Kind::ProdInter: return (e.free ? "[^x]@" : "[x]@") + e.rule;
    case Kind::Concat: return ".";
    default: return "?";
  }
}

void print(std::ostringstream& os, const Expr& e);

void print_wrapped(std::ostringstream& os, const Expr& e, bool wrap) {
  if (wrap) os << '(';
  print(os, e);
  if (wrap) os << ')';
}

void print(std::ostringstream& os, const Expr& e) {
  switch (e->kind) {
    case Kind::Primitive: os << e->primitive.id; return;
    case Kind::Zero: os << 'O'; return;
    case Kind::Scalar: {
      if (e->weight.imag() != 0) throw InvalidArgument("only real scalar weights have a surface syntax");
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", e->weight.real());
      os << buf << '*';
      const Kind ck = e->children[0]->kind;
      print_wrapped(os, e->children[0], ck != Kind::Primitive && ck != Kind::Zero && ck != Kind::Scalar);
      return;
    }
    default: break;
  }
  const bool in_product = is_product(e->kind);
  const bool in_concat = e->kind == Kind::Concat;
  for (std::size_t i = 0; i < e->children.size(); ++i) {
    if (i) os << ' ' << operator_text(*e) << ' ';
    const Kind ck = e->children[i]->kind;
    bool wrap = ck == Kind::Concat;
    if (!in_concat) wrap = wrap || is_sum(ck) || (in_product && is_product(ck));
    print_wrapped(os, e->children[i], wrap);
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::ostringstream os;
  print(os, e);
  return os.str();
}

Expr bind_primitives(const Expr& e, const std::map<std::string, PrimitiveSpec>& table) {
  if (e->kind == Kind::Primitive) {
    auto it = table.find(e->primitive.id);
    if (it == table.end()) return e;
    PrimitiveSpec spec = it->second;
    spec.id = e->primitive.id;
    return primitive(std::move(spec));
  }
  if (e->children.empty()) return e;
  auto copy = std::make_shared<ProcessExpr>(*e);
  for (auto& c : copy->children) c = bind_primitives(c, table);
  return copy;
}

std::vector<std::string> primitive_ids(const Expr& e) {
  if (e->kind == Kind::Primitive) return {e->primitive.id};
  std::vector<std::string> ids;
  for (const auto& c : e->children) {
    auto sub = primitive_ids(c);
    ids.insert(ids.end(), sub.begin(), sub.end());
  }
  return ids;
}

// Coupling rules.

namespace {

std::map<std::string, CouplingRule>& registry() {
  static std::map<std::string, CouplingRule> rules = [] {
    std::map<std::string, CouplingRule> r;
    r["entangle"] = {"entangle", [](const std::optional<RoundRecord>&, const RoundRecord& proposed) {
                       return std::adjacent_find(proposed.states.begin(), proposed.states.end(),
                                                 std::not_equal_to<>()) == proposed.states.end();
                     }};
    auto one_way = [](const std::optional<RoundRecord>& previous, const RoundRecord& proposed) {
      if (!previous || previous->active_children.empty() || proposed.active_children.empty()) return true;
      return proposed.active_children.front() >= previous->active_children.front();
    };
    r["cat"] = {"cat", one_way};
    r["oneway"] = {"oneway", one_way};
    return r;
  }();
  return rules;
}

}  // namespace

void register_rule(CouplingRule rule) {
  if (rule.name.empty() || !rule.allows) throw InvalidArgument("coupling rule needs a name and a predicate");
  registry()[rule.name] = std::move(rule);
}

bool has_rule(const std::string& name) { return registry().count(name) > 0; }

const CouplingRule& find_rule(const std::string& name) {
  auto it = registry().find(name);
  if (it == registry().end()) throw UnknownRule(name);
  return it->second;
}

// Simplification.

namespace {

bool contains_pair(const std::set<std::pair<std::string, std::string>>& s, const std::string& a, const std::string& b) {
  return s.count({a, b}) > 0 || s.count({b, a}) > 0;
}

const PrimitiveSpec* as_primitive(const Expr& e) {
  const ProcessExpr* p = e.get();
  while (p->kind == Kind::Scalar) p = p->children[0].get();
  return p->kind == Kind::Primitive ? &p->primitive : nullptr;
}

Expr with_children(const Expr& e, std::vector<Expr> children) {
  auto copy = std::make_shared<ProcessExpr>(*e);
  copy->children = std::move(children);
  return copy;
}

}  // namespace

bool CompatTable::summable(const std::string& a, const std::string& b) const {
  return a == b || contains_pair(summable_characters, a, b);
}

bool CompatTable::product_forbidden(const std::string& a, const std::string& b) const {
  return a != b && contains_pair(incompatible_product_characters, a, b);
}

bool CompatTable::ids_incompatible(const std::string& a, const std::string& b) const {
  return contains_pair(incompatible_products, a, b);
}

std::optional<std::string> character_of(const Expr& e) {
  switch (e->kind) {
    case Kind::Primitive: return e->primitive.character;
    case Kind::Zero: return std::nullopt;
    case Kind::Scalar: return character_of(e->children[0]);
    case Kind::Concat: return character_of(e->children[1]);
    default: break;
  }
  std::vector<std::string> chars;
  for (const auto& c : e->children)
    if (auto ch = character_of(c)) chars.push_back(*ch);
  if (chars.empty()) return std::nullopt;
  if (is_product(e->kind)) {
    std::string joined = chars[0];
    for (std::size_t i = 1; i < chars.size(); ++i) joined += "*" + chars[i];
    return joined;
  }
  std::sort(chars.begin(), chars.end());
  chars.erase(std::unique(chars.begin(), chars.end()), chars.end());
  std::string joined = chars[0];
  for (std::size_t i = 1; i < chars.size(); ++i) joined += "|" + chars[i];
  return joined;
}

Expr simplify(const Expr& e, const CompatTable& compat) {
  switch (e->kind) {
    case Kind::Primitive:
    case Kind::Zero:
      return e;
    case Kind::Concat:
      return concat(simplify(e->children[0], compat), simplify(e->children[1], compat));
    case Kind::Scalar: {
      Expr child = simplify(e->children[0], compat);
      Complex w = e->weight;
      if (child->kind == Kind::Zero) return child;
      if (child->kind == Kind::Scalar) {
        w *= child->weight;
        child = child->children[0];
      }
      if (w == Complex(1.0, 0.0)) return child;
      if (child->kind == Kind::SumExcl) {
        std::vector<Expr> parts;
        for (const auto& c : child->children) parts.push_back(simplify(scalar(w, c), compat));
        return with_children(child, std::move(parts));
      }
      return scalar(w, child);
    }
    default:
      break;
  }

  if (is_interactive(e->kind)) find_rule(e->rule);
  std::vector<Expr> children;
  for (const auto& c : e->children) children.push_back(simplify(c, compat));

  if (is_sum(e->kind)) {
    std::erase_if(children, [](const Expr& c) { return c->kind == Kind::Zero; });
    if (children.empty()) return zero();
    if (children.size() == 1) return children[0];
    std::vector<std::string> chars;
    for (const auto& c : children)
      if (auto ch = character_of(c)) chars.push_back(*ch);
    for (std::size_t i = 0; i < chars.size(); ++i)
      for (std::size_t j = i + 1; j < chars.size(); ++j)
        if (!compat.summable(chars[i], chars[j])) return zero();
    return with_children(e, std::move(children));
  }

  // Products.
  for (const auto& c : children)
    if (c->kind == Kind::Zero) return zero();
  if (children.size() == 1) return children[0];
  for (std::size_t i = 0; i < children.size(); ++i) {
    for (std::size_t j = i + 1; j < children.size(); ++j) {
      const auto ci = character_of(children[i]);
      const auto cj = character_of(children[j]);
      if (ci && cj && compat.product_forbidden(*ci, *cj)) return zero();
      const PrimitiveSpec* pi = as_primitive(children[i]);
      const PrimitiveSpec* pj = as_primitive(children[j]);
      if (!pi || !pj) continue;
      if (compat.ids_incompatible(pi->id, pj->id)) return zero();
      if (pi->character == pj->character && pi->state == pj->state && compat.fermionic_characters.count(pi->character))
        return zero();
    }
  }
  return with_children(e, std::move(children));
}

// Sequence-tree engine.

namespace {

struct FlatNode {
  const ProcessExpr* expr = nullptr;
  int parent = -1;
  std::vector<int> children;
  int agent = -1;
};

struct Agent {
  int node = -1;
  const PrimitiveSpec* spec = nullptr;
  Complex weight{1.0, 0.0};
  std::size_t factor = 0;
  std::vector<LatticeSite> sites;
  std::vector<std::optional<Complex>> gamma;  // strategy strength, empty when the site is not admissible
  std::vector<std::vector<std::size_t>> sources;
};

struct Frag {
  std::vector<std::pair<std::size_t, std::size_t>> placements;  // (agent, site index)
  std::vector<std::pair<int, RoundRecord>> records;
  std::vector<std::string> states;
};

struct Slot {
  std::vector<int> coords;
  std::vector<std::size_t> agents;
  std::vector<Complex> parts;  // per agent
  Complex gamma;
};

struct State {
  std::vector<std::size_t> budget;
  std::vector<std::vector<char>> used;
  std::vector<Slot> slots;
  std::vector<std::optional<RoundRecord>> last;
  std::vector<Round> rounds;
};

std::string slot_tag(const std::vector<std::size_t>& agents, const std::vector<Agent>& all) {
  std::vector<std::string> ids;
  for (auto a : agents) ids.push_back(all[a].spec->id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::string tag = ids[0];
  for (std::size_t i = 1; i < ids.size(); ++i) tag += "^" + ids[i];
  return tag;
}

class Engine {
 public:
  Engine(const Expr& expr, const CausalTapestry& initial, const Context& ctx)
      : initial_(initial), ctx_(ctx), generation_(initial.generation() + 1) {
    ctx.params.validate();
    const ProcessExpr* top = expr.get();
    while (top->kind == Kind::Scalar) top = top->children[0].get();
    product_root_ = is_product(top->kind) ? top : nullptr;
    flatten(expr.get(), -1, Complex(1.0, 0.0), 0);
    for (auto& a : agents_) prepare(a);
    free_pair_.assign(agents_.size(), std::vector<char>(agents_.size(), 0));
    for (std::size_t a = 0; a < agents_.size(); ++a)
      for (std::size_t b = 0; b < agents_.size(); ++b)
        free_pair_[a][b] = a != b && is_free(*flat_[static_cast<std::size_t>(lca(agents_[a].node, agents_[b].node))].expr);
  }

  State start() const {
    State s;
    s.budget.assign(agents_.size(), ctx_.rounds);
    for (const auto& a : agents_) s.used.emplace_back(a.sites.size(), 0);
    s.last.resize(flat_.size());
    return s;
  }

  std::vector<Frag> moves(const State& s) const {
    auto all = node_moves(0, s);
    std::vector<Frag> feasible;
    for (auto& f : all) {
      auto slots = s.slots;
      bool ok = true;
      for (auto [a, i] : f.placements) ok = ok && place(slots, a, i);
      if (ok) feasible.push_back(std::move(f));
    }
    return feasible;
  }

  void apply(State& s, const Frag& f) const {
    Round round;
    for (auto [a, i] : f.placements) {
      place(s.slots, a, i);
      --s.budget[a];
      s.used[a][i] = 1;
      const Agent& ag = agents_[a];
      round.push_back(Placement{a, ag.factor, ag.spec->id, ag.spec->character, ag.spec->state, ag.sites[i].coords,
                                ag.weight * *ag.gamma[i]});
    }
    for (const auto& [node, rec] : f.records) s.last[static_cast<std::size_t>(node)] = rec;
    s.rounds.push_back(std::move(round));
  }

  CausalTapestry tapestry(const State& s) const {
    CausalTapestry t(generation_);
    const auto prior = initial_.informons();
    for (const auto& slot : s.slots) {
      Informon inf;
      inf.site = LatticeSite{generation_, slot.coords};
      const std::string tag = slot_tag(slot.agents, agents_);
      inf.label = make_label(inf.site, tag);
      inf.strength = slot.gamma;
      const Agent& first = agents_[slot.agents[0]];
      inf.props.potential = ctx_.params.potential_at(inf.site);
      inf.props.subprocess = tag;
      inf.props.character = first.spec->character;
      inf.props.state = first.spec->state;
      if (tag.find('^') != std::string::npos) {
        std::map<std::string, Complex> parts;
        for (std::size_t k = 0; k < slot.agents.size(); ++k) parts[agents_[slot.agents[k]].spec->id] += slot.parts[k];
        inf.props.contributions.assign(parts.begin(), parts.end());
      }
      std::vector<std::size_t> sources;
      for (auto a : slot.agents) {
        const Agent& ag = agents_[a];
        const auto site_index = site_of(ag, slot.coords);
        sources.insert(sources.end(), ag.sources[site_index].begin(), ag.sources[site_index].end());
      }
      std::sort(sources.begin(), sources.end());
      sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
      for (auto src : sources) {
        inf.content.ancestors.push_back(prior[src].label);
        inf.content.ancestor_generations.push_back(prior[src].site.generation);
      }
      t.insert(std::move(inf));
    }
    t.seal();
    return t;
  }

 private:
  void flatten(const ProcessExpr* e, int parent, Complex weight, std::size_t factor) {
    const int id = static_cast<int>(flat_.size());
    flat_.push_back(FlatNode{e, parent, {}, -1});
    if (parent >= 0) flat_[static_cast<std::size_t>(parent)].children.push_back(id);
    switch (e->kind) {
      case Kind::Concat:
        throw InvalidArgument("sequence trees are not defined for concatenations; evaluate them instead");
      case Kind::Primitive: {
        flat_.back().agent = static_cast<int>(agents_.size());
        Agent a;
        a.node = id;
        a.spec = &e->primitive;
        a.weight = weight;
        a.factor = factor;
        agents_.push_back(std::move(a));
        return;
      }
      case Kind::Scalar:
        flatten(e->children[0].get(), id, weight * e->weight, factor);
        return;
      default:
        break;
    }
    if (is_interactive(e->kind)) find_rule(e->rule);
    for (std::size_t i = 0; i < e->children.size(); ++i)
      flatten(e->children[i].get(), id, weight, e == product_root_ ? i : factor);
  }

  void prepare(Agent& a) {
    const auto& spec = *a.spec;
    if (spec.sites.empty()) {
      a.sites = ctx_.params.box.sites(generation_);
    } else {
      for (const auto& c : spec.sites) {
        if (static_cast<int>(c.size()) != ctx_.params.spacing.dim)
          throw InvalidArgument("primitive " + spec.id + " lists a site of the wrong dimension");
        a.sites.push_back(LatticeSite{generation_, c});
      }
    }
    const std::string tag = spec.source_tag.value_or("");
    const auto prior = initial_.informons();
    const bool any_source = std::any_of(prior.begin(), prior.end(), [&](const Informon& inf) {
      return tag.empty() || inf.props.subprocess == tag;
    });
    if (!any_source) throw EmptyPrior();
    for (const auto& site : a.sites) {
      std::optional<Complex> g;
      std::vector<std::size_t> src;
      if (spec.strategy == Strategy::Identity) {
        if (const Informon* inf = initial_.find_at(site.coords, tag)) {
          g = inf->strength;
          src.push_back(static_cast<std::size_t>(inf - prior.data()));
        }
      } else {
        src = dynamics::admissible_sources(initial_, site, ctx_.params, tag);
        if (!src.empty()) {
          Complex sum = 0;
          for (auto i : src) sum += dynamics::propagator(prior[i].site, site, ctx_.params) * prior[i].strength;
          g = sum;
        }
      }
      a.gamma.push_back(g);
      a.sources.push_back(std::move(src));
    }
  }

  int lca(int a, int b) const {
    std::vector<int> up;
    for (int n = a; n >= 0; n = flat_[static_cast<std::size_t>(n)].parent) up.push_back(n);
    for (int n = b; n >= 0; n = flat_[static_cast<std::size_t>(n)].parent)
      if (std::find(up.begin(), up.end(), n) != up.end()) return n;
    return 0;
  }

  static std::size_t site_of(const Agent& a, const std::vector<int>& coords) {
    for (std::size_t i = 0; i < a.sites.size(); ++i)
      if (a.sites[i].coords == coords) return i;
    throw Error("internal: placement at a site the agent does not own");
  }

  bool place(std::vector<Slot>& slots, std::size_t a, std::size_t i) const {
    const Agent& ag = agents_[a];
    const auto& coords = ag.sites[i].coords;
    const Complex part = ag.weight * *ag.gamma[i];
    int merge = -1;
    bool same_id = false;
    for (std::size_t k = 0; k < slots.size(); ++k) {
      if (slots[k].coords != coords) continue;
      const bool all_free = std::all_of(slots[k].agents.begin(), slots[k].agents.end(),
                                        [&](std::size_t b) { return free_pair_[a][b] != 0; });
      if (all_free && merge < 0) merge = static_cast<int>(k);
      for (auto b : slots[k].agents) same_id = same_id || agents_[b].spec->id == ag.spec->id;
    }
    std::vector<std::size_t> members{a};
    if (merge >= 0) {
      members = slots[static_cast<std::size_t>(merge)].agents;
      members.push_back(a);
    } else if (same_id) {
      return false;
    }
    const std::string tag = slot_tag(members, agents_);
    for (std::size_t k = 0; k < slots.size(); ++k)
      if (static_cast<int>(k) != merge && slots[k].coords == coords && slot_tag(slots[k].agents, agents_) == tag)
        return false;
    if (merge >= 0) {
      auto& slot = slots[static_cast<std::size_t>(merge)];
      slot.agents.push_back(a);
      slot.parts.push_back(part);
      slot.gamma += part;
    } else {
      slots.push_back(Slot{coords, {a}, {part}, part});
    }
    return true;
  }

  std::vector<Frag> node_moves(int n, const State& s) const {
    const FlatNode& node = flat_[static_cast<std::size_t>(n)];
    const ProcessExpr& e = *node.expr;
    std::vector<Frag> out;
    switch (e.kind) {
      case Kind::Primitive: {
        const auto a = static_cast<std::size_t>(node.agent);
        if (s.budget[a] == 0) return out;
        const Agent& ag = agents_[a];
        for (std::size_t i = 0; i < ag.sites.size(); ++i)
          if (ag.gamma[i] && !s.used[a][i]) out.push_back(Frag{{{a, i}}, {}, {ag.spec->state}});
        return out;
      }
      case Kind::Zero: return out;
      case Kind::Scalar: return node_moves(node.children[0], s);
      default: break;
    }
    const bool interactive = is_interactive(e.kind);
    const CouplingRule* rule = interactive ? &find_rule(e.rule) : nullptr;
    const auto& previous = s.last[static_cast<std::size_t>(n)];
    auto keep = [&](Frag& f, RoundRecord rec) {
      if (rule) {
        if (!rule->allows(previous, rec)) return;
        f.records.emplace_back(n, std::move(rec));
      }
      out.push_back(std::move(f));
    };

    if (is_sum(e.kind)) {
      for (std::size_t ci = 0; ci < node.children.size(); ++ci)
        for (auto& f : node_moves(node.children[ci], s)) {
          RoundRecord rec{{ci}, f.states};
          keep(f, std::move(rec));
        }
      return out;
    }

    // Every child of a product acts in the same round.
    std::vector<Frag> partial{Frag{}};
    for (int child : node.children) {
      auto child_moves = node_moves(child, s);
      if (child_moves.empty()) return out;
      if (partial.size() * child_moves.size() > ctx_.cap) throw CapExceeded("product moves in one round", ctx_.cap);
      std::vector<Frag> next;
      for (const auto& p : partial)
        for (const auto& c : child_moves) {
          Frag f = p;
          f.placements.insert(f.placements.end(), c.placements.begin(), c.placements.end());
          f.records.insert(f.records.end(), c.records.begin(), c.records.end());
          f.states.insert(f.states.end(), c.states.begin(), c.states.end());
          next.push_back(std::move(f));
        }
      partial = std::move(next);
    }
    std::vector<std::size_t> all(node.children.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    for (auto& f : partial) {
      RoundRecord rec{all, f.states};
      keep(f, std::move(rec));
    }
    return out;
  }

  const CausalTapestry& initial_;
  const Context& ctx_;
  int generation_;
  const ProcessExpr* product_root_ = nullptr;
  std::vector<FlatNode> flat_;
  std::vector<Agent> agents_;
  std::vector<std::vector<char>> free_pair_;
};

void grow(const Engine& engine, const State& state, int node, std::vector<SequenceTree::Node>& nodes, std::vector<Path>& paths, std::size_t cap) {
  auto moves = engine.moves(state);
  if (moves.empty()) {
    if (paths.size() >= cap) throw CapExceeded("sequence tree paths", cap);
    paths.push_back(Path{state.rounds, engine.tapestry(state)});
    return;
  }
  for (const auto& f : moves) {
    State next = state;
    engine.apply(next, f);
    const int id = static_cast<int>(nodes.size());
    nodes.push_back(SequenceTree::Node{node, nodes[static_cast<std::size_t>(node)].depth + 1, next.rounds.back(), {}});
    nodes[static_cast<std::size_t>(node)].children.push_back(id);
    grow(engine, next, id, nodes, paths, cap);
  }
}

}  // namespace

SequenceTree build_sequence_tree(const Expr& expr, const CausalTapestry& initial, const Context& ctx) {
  Engine engine(expr, initial, ctx);
  SequenceTree tree;
  tree.nodes_.push_back(SequenceTree::Node{});
  grow(engine, engine.start(), 0, tree.nodes_, tree.paths_, ctx.cap);
  return tree;
}

std::string SequenceTree::to_dot() const {
  std::ostringstream os;
  os << "digraph sequence_tree {\n";
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    os << "  n" << i << " [label=\"" << nodes_[i].depth << "\"];\n";
    if (nodes_[i].parent < 0) continue;
    os << "  n" << nodes_[i].parent << " -> n" << i << " [label=\"";
    for (std::size_t k = 0; k < nodes_[i].edge.size(); ++k) {
      const auto& p = nodes_[i].edge[k];
      if (k) os << ", ";
      os << p.tag << "@[";
      for (std::size_t c = 0; c < p.coords.size(); ++c) os << (c ? "," : "") << p.coords[c];
      os << ']';
    }
    os << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

Path sample_path(const Expr& expr, const CausalTapestry& initial, const Context& ctx, dynamics::Rng& rng) {
  Engine engine(expr, initial, ctx);
  State s = engine.start();
  while (true) {
    auto moves = engine.moves(s);
    if (moves.empty()) break;
    std::uniform_int_distribution<std::size_t> pick(0, moves.size() - 1);
    engine.apply(s, moves[pick(rng)]);
  }
  return Path{s.rounds, engine.tapestry(s)};
}

CausalTapestry evaluate(const Expr& expr, const CausalTapestry& initial, const Context& ctx, dynamics::Rng& rng) {
  if (expr->kind == Kind::Concat) {
    const CausalTapestry middle = evaluate(expr->children[0], initial, ctx, rng);
    return evaluate(expr->children[1], middle, ctx, rng);
  }
  if (initial.empty() && expr->kind != Kind::Zero) throw EmptyPrior();
  return sample_path(expr, initial, ctx, rng).tapestry;
}

// Covering maps.

bool FieldSet::insert(std::vector<Complex> values) {
  if (values.size() != grid_.size()) throw InvalidArgument("field does not match the set's grid");
  for (const auto& f : fields_) {
    bool same = true;
    for (std::size_t i = 0; i < values.size() && same; ++i) same = std::abs(f[i] - values[i]) <= tolerance_;
    if (same) return false;
  }
  fields_.push_back(std::move(values));
  return true;
}

interp::WaveField FieldSet::field(std::size_t i) const { return interp::WaveField{grid_, fields_.at(i), spacing_}; }

FieldSet scale(const FieldSet& set, Complex w) {
  FieldSet out(set.grid(), set.spacing(), set.tolerance());
  for (const auto& f : set.fields()) {
    std::vector<Complex> v(f);
    for (auto& x : v) x *= w;
    out.insert(std::move(v));
  }
  return out;
}

FieldSet minkowski_sum(const FieldSet& a, const FieldSet& b) {
  if (a.grid().size() != b.grid().size()) throw InvalidArgument("field sets live on different grids");
  FieldSet out(a.grid(), a.spacing(), a.tolerance());
  for (const auto& f : a.fields())
    for (const auto& g : b.fields()) {
      std::vector<Complex> v(f.size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = f[i] + g[i];
      out.insert(std::move(v));
    }
  return out;
}

bool set_equal(const FieldSet& a, const FieldSet& b, double tolerance) {
  if (a.grid().size() != b.grid().size()) return false;
  auto covered = [&](const FieldSet& x, const FieldSet& y) {
    for (const auto& f : x.fields()) {
      bool found = false;
      for (const auto& g : y.fields()) {
        bool same = true;
        for (std::size_t i = 0; i < f.size() && same; ++i) same = std::abs(f[i] - g[i]) <= tolerance;
        if (same) {
          found = true;
          break;
        }
      }
      if (!found) return false;
    }
    return true;
  };
  return covered(a, b) && covered(b, a);
}

FieldSet pcm(const Expr& expr, const CausalTapestry& initial, const Context& ctx, std::span<const interp::Point> grid) {
  const auto tree = build_sequence_tree(expr, initial, ctx);
  FieldSet set({grid.begin(), grid.end()}, ctx.params.spacing);
  for (const auto& path : tree.paths()) set.insert(interp::global_field(path.tapestry, grid, ctx.params.spacing).values);
  return set;
}

// Configuration space.

bool admissible(const InformonTuple& t, const TupleTapestry& k, double tolerance) {
  for (std::size_t f = 0; f < t.size(); ++f) {
    const auto& c = t[f];
    for (const auto& s : k) {
      if (f >= s.size()) continue;
      const auto& o = s[f];
      if (o.coords == c.coords && o.tag == c.tag && o.character == c.character && o.state == c.state &&
          std::abs(o.gamma - c.gamma) > tolerance)
        return false;
    }
  }
  return true;
}

TupleTapestry consistent_union(const TupleTapestry& k1, const TupleTapestry& k2, double tolerance) {
  TupleTapestry out = k1;
  for (const auto& t : k2) {
    if (std::find(out.begin(), out.end(), t) != out.end()) continue;
    if (admissible(t, k1, tolerance)) out.push_back(t);
  }
  return out;
}

TupleTapestry configuration_tapestry(const Path& path, std::size_t factors) {
  TupleTapestry k;
  for (const auto& round : path.rounds) {
    InformonTuple t(factors);
    std::vector<int> filled(factors, 0);
    for (const auto& p : round) {
      if (p.factor >= factors) throw InvalidArgument("placement outside the configuration factors");
      ++filled[p.factor];
      t[p.factor] = TupleComponent{p.coords, p.tag, p.character, p.state, p.gamma};
    }
    if (std::any_of(filled.begin(), filled.end(), [](int n) { return n != 1; }))
      throw InvalidArgument("each configuration factor must place exactly one informon per round");
    k.push_back(std::move(t));
  }
  return k;
}

std::size_t ConfigFieldSet::grid_size() const {
  std::size_t n = 1;
  for (const auto& g : factor_grids) n *= g.size();
  return n;
}

std::size_t ConfigFieldSet::flat_index(std::span<const std::size_t> indices) const {
  if (indices.size() != factor_grids.size()) throw InvalidArgument("one index per factor is required");
  std::size_t flat = 0;
  for (std::size_t k = 0; k < indices.size(); ++k) flat = flat * factor_grids[k].size() + indices[k];
  return flat;
}

namespace {

bool component_less(const TupleComponent& a, const TupleComponent& b) {
  if (a.coords != b.coords) return a.coords < b.coords;
  if (a.tag != b.tag) return a.tag < b.tag;
  if (a.state != b.state) return a.state < b.state;
  if (a.character != b.character) return a.character < b.character;
  if (a.gamma.real() != b.gamma.real()) return a.gamma.real() < b.gamma.real();
  return a.gamma.imag() < b.gamma.imag();
}

bool tuple_less(const InformonTuple& a, const InformonTuple& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), component_less);
}

}  // namespace

ConfigFieldSet config_pcm(const Expr& expr, const CausalTapestry& initial, const Context& ctx,
                          const std::vector<std::vector<interp::Point>>& factor_grids) {
  Complex w{1.0, 0.0};
  Expr core = expr;
  while (core->kind == Kind::Scalar) {
    w *= core->weight;
    core = core->children[0];
  }
  if (!is_product(core->kind)) throw InvalidArgument("configuration covering maps need a product process");
  const std::size_t factors = core->children.size();
  if (factor_grids.size() != factors) throw InvalidArgument("one evaluation grid per product factor is required");

  const auto tree = build_sequence_tree(core, initial, ctx);
  std::vector<TupleTapestry> leaves;
  for (const auto& path : tree.paths()) leaves.push_back(configuration_tapestry(path, factors));

  ConfigFieldSet out;
  out.factor_grids = factor_grids;
  const Spacing& spacing = ctx.params.spacing;
  const int generation = initial.generation() + 1;
  std::vector<TupleTapestry> seen;
  for (const auto& start : leaves) {
    TupleTapestry k = start;
    for (bool grew = true; grew;) {
      grew = false;
      for (const auto& other : leaves) {
        auto u = consistent_union(k, other);
        if (u.size() > k.size()) {
          k = std::move(u);
          grew = true;
        }
      }
    }
    std::sort(k.begin(), k.end(), tuple_less);
    if (std::find(seen.begin(), seen.end(), k) != seen.end()) continue;
    seen.push_back(k);

    // kernel[f][t][i]: Gamma times kernel of tuple t's factor-f component at grid point i.
    std::vector<std::vector<std::vector<Complex>>> kernel(factors);
    for (std::size_t f = 0; f < factors; ++f) {
      kernel[f].resize(k.size());
      for (std::size_t t = 0; t < k.size(); ++t) {
        const LatticeSite site{generation, k[t][f].coords};
        for (const auto& z : factor_grids[f]) kernel[f][t].push_back(k[t][f].gamma * interp::sinc_kernel(site, z, spacing));
      }
    }
    std::vector<Complex> values(out.grid_size());
    std::vector<std::size_t> idx(factors, 0);
    for (std::size_t flat = 0; flat < values.size(); ++flat) {
      std::size_t rest = flat;
      for (std::size_t f = factors; f-- > 0;) {
        idx[f] = rest % factor_grids[f].size();
        rest /= factor_grids[f].size();
      }
      Complex sum = 0;
      for (std::size_t t = 0; t < k.size(); ++t) {
        Complex term = w;
        for (std::size_t f = 0; f < factors; ++f) term *= kernel[f][t][idx[f]];
        sum += term;
      }
      values[flat] = sum;
    }
    bool duplicate = false;
    for (const auto& existing : out.fields) {
      bool same = true;
      for (std::size_t i = 0; i < values.size() && same; ++i) same = std::abs(existing[i] - values[i]) <= 1e-12;
      duplicate = duplicate || same;
    }
    if (duplicate) continue;
    out.fields.push_back(std::move(values));
    out.maximal.push_back(std::move(k));
  }
  return out;
}

}  // namespace informon::algebra
