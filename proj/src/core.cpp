#include "informon/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include <nlohmann/json.hpp>

#include "informon/errors.hpp"

namespace informon {

namespace {

std::string coords_string(std::span<const int> coords) {
  std::string s = "[";
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(coords[i]);
  }
  return s + "]";
}

void check_dim(int dim) {
  if (dim < 1 || dim > 3) throw InvalidArgument("lattice dimension must be 1, 2 or 3, got " + std::to_string(dim));
}

}  // namespace

std::string LatticeSite::to_string() const { return "(" + std::to_string(generation) + "," + coords_string(coords) + ")"; }

LatticeBox::LatticeBox(std::vector<int> extent, Boundary boundary) : extent_(std::move(extent)), boundary_(boundary) {
  check_dim(dim());
  for (int e : extent_)
    if (e < 1) throw InvalidArgument("lattice extent components must be >= 1");
}

bool LatticeBox::contains(std::span<const int> coords) const {
  if (coords.size() != extent_.size()) return false;
  for (std::size_t a = 0; a < coords.size(); ++a)
    if (coords[a] < lower(a) || coords[a] > upper(a)) return false;
  return true;
}

std::vector<int> LatticeBox::displacement(std::span<const int> a, std::span<const int> b) const {
  std::vector<int> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    int delta = b[i] - a[i];
    if (boundary_ == Boundary::Periodic && i < extent_.size()) {
      const int e = extent_[i];
      delta = ((delta % e) + e) % e;
      if (delta > e / 2) delta -= e;
    }
    d[i] = delta;
  }
  return d;
}

std::size_t LatticeBox::size() const {
  std::size_t n = 1;
  for (int e : extent_) n *= static_cast<std::size_t>(e);
  return n;
}

std::vector<LatticeSite> LatticeBox::sites(int generation) const {
  std::vector<LatticeSite> out;
  out.reserve(size());
  std::vector<int> c(extent_.size());
  for (std::size_t a = 0; a < c.size(); ++a) c[a] = lower(a);
  // Odometer over the box, last axis fastest, giving lexicographic order.
  while (true) {
    out.push_back({generation, c});
    int axis = static_cast<int>(c.size()) - 1;
    while (axis >= 0 && c[axis] == upper(axis)) {
      c[axis] = lower(axis);
      --axis;
    }
    if (axis < 0) break;
    ++c[axis];
  }
  return out;
}

std::vector<LatticeSite> make_lattice(int dim, std::span<const int> extent, int generation) {
  check_dim(dim);
  if (static_cast<int>(extent.size()) != dim) throw InvalidArgument("extent length must equal dim");
  return LatticeBox(std::vector<int>(extent.begin(), extent.end())).sites(generation);
}

LatticeBox box_for_half_width(int dim, double half_width, double l_P, Boundary boundary) {
  check_dim(dim);
  if (!(l_P > 0) || !(half_width >= 0)) throw InvalidArgument("box half-width must be >= 0 and l_P > 0");
  const int n = static_cast<int>(std::floor(half_width / l_P + 1e-9));
  return LatticeBox(std::vector<int>(static_cast<std::size_t>(dim), 2 * n + 1), boundary);
}

std::string make_label(const LatticeSite& site, const std::string& tag) {
  return "g" + std::to_string(site.generation) + ":" + coords_string(site.coords) + ":" + tag;
}

void CausalTapestry::insert(Informon informon) {
  if (sealed_) throw SealedTapestry();
  if (informon.site.generation != generation_) throw GenerationMismatch(generation_, informon.site.generation);
  if (by_label_.contains(informon.label)) throw DuplicateLabel(informon.label);
  auto key = std::make_pair(informon.props.subprocess, informon.site.coords);
  if (by_tag_site_.contains(key))
    throw DuplicateSite(informon.site.to_string() + " tag '" + informon.props.subprocess + "'");
  by_label_.emplace(informon.label, informons_.size());
  by_tag_site_.emplace(std::move(key), informons_.size());
  informons_.push_back(std::move(informon));
}

const Informon* CausalTapestry::find(const std::string& label) const {
  auto it = by_label_.find(label);
  return it == by_label_.end() ? nullptr : &informons_[it->second];
}

const Informon* CausalTapestry::find_at(std::span<const int> coords, const std::string& tag) const {
  for (const auto& inf : informons_) {
    if (!tag.empty() && inf.props.subprocess != tag) continue;
    if (std::equal(coords.begin(), coords.end(), inf.site.coords.begin(), inf.site.coords.end())) return &inf;
  }
  return nullptr;
}

std::vector<Complex> CausalTapestry::strengths() const {
  std::vector<Complex> g;
  g.reserve(informons_.size());
  for (const auto& inf : informons_) g.push_back(inf.strength);
  return g;
}

CausalTapestry insert_informon(CausalTapestry tapestry, Informon informon) {
  tapestry.insert(std::move(informon));
  return tapestry;
}

ValidationReport validate_tapestry(const CausalTapestry& tapestry) {
  ValidationReport report;

  // Graph over every label mentioned: tapestry informons and their ancestors.
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<std::size_t>> succ;
  auto node = [&](const std::string& label) {
    auto [it, inserted] = index.try_emplace(label, succ.size());
    if (inserted) succ.emplace_back();
    return it->second;
  };

  for (const auto& inf : tapestry.informons()) {
    if (inf.site.generation != tapestry.generation()) {
      report.antichain = false;
      report.problems.push_back(inf.label + " lies outside generation " + std::to_string(tapestry.generation()));
    }
    const auto& c = inf.content;
    const std::size_t self = node(inf.label);
    for (std::size_t i = 0; i < c.ancestors.size(); ++i) {
      const int g = i < c.ancestor_generations.size() ? c.ancestor_generations[i] : inf.site.generation - 1;
      if (g >= inf.site.generation) {
        report.ancestors_precede = false;
        report.problems.push_back(inf.label + " lists ancestor " + c.ancestors[i] + " from generation " +
                                  std::to_string(g));
      }
      succ[node(c.ancestors[i])].push_back(self);
    }
    for (auto [from, to] : c.edges) {
      if (from >= c.ancestors.size() || to >= c.ancestors.size()) {
        report.acyclic = false;
        report.problems.push_back(inf.label + " has a content edge outside its ancestor set");
        continue;
      }
      succ[node(c.ancestors[from])].push_back(node(c.ancestors[to]));
    }
  }

  // Iterative three-colour DFS.
  std::vector<int> colour(succ.size(), 0);
  for (std::size_t root = 0; root < succ.size() && report.acyclic; ++root) {
    if (colour[root]) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    colour[root] = 1;
    while (!stack.empty() && report.acyclic) {
      auto& [v, next] = stack.back();
      if (next < succ[v].size()) {
        const std::size_t w = succ[v][next++];
        if (colour[w] == 1) {
          report.acyclic = false;
          report.problems.push_back("content edges contain a cycle");
        } else if (colour[w] == 0) {
          colour[w] = 1;
          stack.emplace_back(w, 0);
        }
      } else {
        colour[v] = 2;
        stack.pop_back();
      }
    }
  }
  return report;
}

nlohmann::json to_json(const CausalTapestry& tapestry) {
  auto arr = nlohmann::json::array();
  for (const auto& inf : tapestry.informons()) {
    nlohmann::json props = {{"potential", inf.props.potential},
                            {"subprocess", inf.props.subprocess},
                            {"character", inf.props.character},
                            {"state", inf.props.state}};
    if (!inf.props.contributions.empty()) {
      auto parts = nlohmann::json::array();
      for (const auto& [tag, g] : inf.props.contributions) parts.push_back({{"tag", tag}, {"re", g.real()}, {"im", g.imag()}});
      props["contributions"] = std::move(parts);
    }
    arr.push_back({{"label", inf.label},
                   {"gen", inf.site.generation},
                   {"coords", inf.site.coords},
                   {"gamma_re", inf.strength.real()},
                   {"gamma_im", inf.strength.imag()},
                   {"props", std::move(props)},
                   {"content_labels", inf.content.ancestors}});
  }
  return arr;
}

CausalTapestry tapestry_from_json(const nlohmann::json& j, int generation, bool seal) {
  CausalTapestry t(generation);
  for (const auto& item : j) {
    Informon inf;
    inf.label = item.at("label").get<std::string>();
    inf.site.generation = item.at("gen").get<int>();
    inf.site.coords = item.at("coords").get<std::vector<int>>();
    inf.strength = {item.at("gamma_re").get<double>(), item.at("gamma_im").get<double>()};
    const auto& p = item.at("props");
    inf.props.potential = p.value("potential", 0.0);
    inf.props.subprocess = p.value("subprocess", std::string{});
    inf.props.character = p.value("character", std::string{"scalar"});
    inf.props.state = p.value("state", std::string{});
    if (p.contains("contributions"))
      for (const auto& c : p["contributions"])
        inf.props.contributions.emplace_back(c.at("tag").get<std::string>(),
                                             Complex{c.at("re").get<double>(), c.at("im").get<double>()});
    inf.content.ancestors = item.at("content_labels").get<std::vector<std::string>>();
    inf.content.ancestor_generations.assign(inf.content.ancestors.size(), inf.site.generation - 1);
    t.insert(std::move(inf));
  }
  if (seal) t.seal();
  return t;
}

}  // namespace informon
