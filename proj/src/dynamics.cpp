#include "informon/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "informon/errors.hpp"

namespace informon::dynamics {

namespace {

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

std::string join_tags(const std::set<std::string>& tags) {
  std::string out;
  for (const auto& t : tags) {
    if (!out.empty()) out += '^';
    out += t;
  }
  return out;
}

}  // namespace

double StrategyParams::nyquist() const { return std::numbers::pi / spacing.l_P; }

void StrategyParams::validate() const {
  if (!(spacing.t_P > 0) || !(spacing.l_P > 0)) throw InvalidArgument("t_P and l_P must be positive");
  if (spacing.dim < 1 || spacing.dim > 3) throw InvalidArgument("dim must be 1, 2 or 3");
  if (!(mass > 0) || !(hbar > 0)) throw InvalidArgument("mass and hbar must be positive");
  if (!(distance_bound > spacing.t_P))
    throw InvalidArgument("distance bound must exceed t_P, the shortest causal distance");
  if (max_sources < 1) throw InvalidArgument("r must be >= 1");
  if (informons_per_round != 1) throw InvalidArgument("only primitive rounds (R = 1) are supported");
  if (band_limit < 0 || band_limit > nyquist() * (1 + 1e-12))
    throw InvalidArgument("band limit exceeds the lattice Nyquist rate pi/l_P");
  if (box.dim() != spacing.dim) throw InvalidArgument("lattice box dimension does not match dim");
}

double distance_squared(const LatticeSite& src, const LatticeSite& dst, const StrategyParams& params) {
  if (dst.generation != src.generation + 1)
    throw InvalidArgument("sites " + src.to_string() + " and " + dst.to_string() + " are not in adjacent generations");
  if (src.coords.size() != dst.coords.size()) throw InvalidArgument("site dimensions differ");
  const auto delta = params.box.dim() == src.dim() ? params.box.displacement(src.coords, dst.coords)
                                                    : LatticeBox(std::vector<int>(src.coords.size(), 1))
                                                          .displacement(src.coords, dst.coords);
  double hops = 0;
  for (int d : delta) hops += static_cast<double>(d) * d;
  const double t = params.spacing.t_P, l = params.spacing.l_P;
  return t * t + hops * l * l;
}

double lagrangian(const LatticeSite& src, const LatticeSite& dst, const StrategyParams& params) {
  const double t = params.spacing.t_P;
  return params.mass * distance_squared(src, dst, params) / (2 * t * t) + params.potential_at(src);
}

Complex normalisation(const StrategyParams& params) {
  return std::sqrt(Complex(0.0, 2 * std::numbers::pi * params.hbar * params.spacing.t_P / params.mass));
}

Complex propagator(const LatticeSite& src, const LatticeSite& dst, const StrategyParams& params) {
  const double action = lagrangian(src, dst, params) * params.spacing.t_P;
  const Complex ratio = params.spacing.l_P / normalisation(params);
  Complex prefactor = 1.0;
  for (int a = 0; a < src.dim(); ++a) prefactor *= ratio;
  return prefactor * std::polar(1.0, action / params.hbar);
}

CausalTapestry init_from_samples(const std::function<Complex(const LatticeSite&)>& reference,
                                 std::span<const LatticeSite> sites, const std::string& tag, const Properties& props) {
  const int gen = sites.empty() ? 0 : sites.front().generation;
  CausalTapestry t(gen);
  for (const auto& s : sites) {
    if (s.generation != gen) throw InvalidArgument("init_from_samples: sites span several generations");
    Informon inf;
    inf.site = s;
    inf.label = make_label(s, tag);
    inf.strength = reference(s);
    inf.props = props;
    inf.props.subprocess = tag;
    t.insert(std::move(inf));
  }
  t.seal();
  return t;
}

std::vector<std::size_t> admissible_sources(const CausalTapestry& prior, const LatticeSite& target,
                                            const StrategyParams& params, const std::string& tag) {
  struct Candidate {
    double d2;
    std::size_t index;
  };
  std::vector<Candidate> candidates;
  const auto informons = prior.informons();
  const double bound2 = params.distance_bound * params.distance_bound;
  for (std::size_t i = 0; i < informons.size(); ++i) {
    if (!tag.empty() && informons[i].props.subprocess != tag) continue;
    const double d2 = distance_squared(informons[i].site, target, params);
    if (!(d2 < bound2)) continue;
    candidates.push_back({d2, i});
  }
  if (candidates.size() > params.max_sources) {
    std::stable_sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
      if (a.d2 != b.d2) return a.d2 < b.d2;
      return informons[a.index].site.coords < informons[b.index].site.coords;
    });
    candidates.resize(params.max_sources);
  }
  std::vector<std::size_t> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) out.push_back(c.index);
  std::sort(out.begin(), out.end());
  return out;
}

NascentTapestry::NascentTapestry(const CausalTapestry& prior, const StrategyParams& params)
    : prior_(&prior), params_(&params), generation_(prior.generation() + 1) {
  if (!prior.sealed()) throw InvalidArgument("prior tapestry must be sealed");
  params.validate();

  std::set<std::string> tags;
  for (const auto& inf : prior.informons()) tags.insert(inf.props.subprocess);

  for (auto& site : params.box.sites(generation_)) {
    if (params.coupling == Coupling::Free) {
      Target t{site, {}, {}, admissible_sources(prior, site, params), {}, {}, false};
      std::set<std::string> fed;
      for (auto s : t.sources) fed.insert(prior[s].props.subprocess);
      t.tag = join_tags(fed);
      if (!t.sources.empty()) targets_.push_back(std::move(t));
    } else {
      for (const auto& tag : tags) {
        Target t{site, tag, {}, admissible_sources(prior, site, params, tag), {}, {}, false};
        if (!t.sources.empty()) targets_.push_back(std::move(t));
      }
    }
  }

  targets_of_source_.resize(prior.size());
  uncreated_count_.assign(prior.size(), 0);
  for (std::size_t i = 0; i < targets_.size(); ++i) {
    auto& t = targets_[i];
    t.label = make_label(t.site, t.tag);
    t.unplayed = t.sources;
    for (auto s : t.sources) {
      targets_of_source_[s].push_back(i);
      ++uncreated_count_[s];
    }
  }
  uncreated_targets_ = targets_.size();
}

bool NascentTapestry::has_moves() const {
  if (in_play_ && !targets_[*in_play_].unplayed.empty()) return true;
  return uncreated_targets_ > 0;
}

const Token& NascentTapestry::place(std::size_t target, std::size_t slot) {
  auto& t = targets_[target];
  const std::size_t src = t.unplayed[slot];
  t.unplayed[slot] = t.unplayed.back();
  t.unplayed.pop_back();

  const auto& source = (*prior_)[src];
  const Complex amplitude = propagator(source.site, t.site, *params_) * source.strength;
  t.tokens.emplace_back(src, amplitude);
  ++rounds_;
  tokens_.push_back({source.label, t.label, amplitude});
  return tokens_.back();
}

const Token& NascentTapestry::play_round(Rng& rng) {
  if (in_play_ && !targets_[*in_play_].unplayed.empty())
    return place(*in_play_, uniform_index(rng, targets_[*in_play_].unplayed.size()));
  in_play_.reset();

  // Player I: an informon that can still found a new target.
  std::vector<std::size_t> players;
  for (std::size_t s = 0; s < uncreated_count_.size(); ++s)
    if (uncreated_count_[s] > 0) players.push_back(s);
  if (players.empty()) throw NoAdmissibleTarget();
  const std::size_t src = players[uniform_index(rng, players.size())];

  // Player II: an unused site within the bound of that informon.
  std::vector<std::size_t> sites;
  for (auto t : targets_of_source_[src])
    if (!targets_[t].created) sites.push_back(t);
  const std::size_t target = sites[uniform_index(rng, sites.size())];

  auto& t = targets_[target];
  t.created = true;
  --uncreated_targets_;
  for (auto s : t.sources) --uncreated_count_[s];
  in_play_ = target;
  const auto slot = static_cast<std::size_t>(std::find(t.unplayed.begin(), t.unplayed.end(), src) - t.unplayed.begin());
  return place(target, slot);
}

Complex NascentTapestry::strength_at(std::span<const int> coords, const std::string& tag) const {
  Complex sum = 0;
  for (const auto& t : targets_) {
    if (!t.created || !std::equal(coords.begin(), coords.end(), t.site.coords.begin(), t.site.coords.end())) continue;
    if (!tag.empty() && t.tag != tag) continue;
    auto tokens = t.tokens;
    std::sort(tokens.begin(), tokens.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [s, a] : tokens) sum += a;
  }
  return sum;
}

CausalTapestry NascentTapestry::seal() const {
  CausalTapestry out(generation_);
  for (const auto& t : targets_) {
    if (!t.created) continue;
    auto tokens = t.tokens;
    // Fixed summation order: prior order, which is site order.
    std::sort(tokens.begin(), tokens.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    Informon inf;
    inf.site = t.site;
    inf.label = t.label;
    const auto& first = (*prior_)[tokens.front().first];
    inf.props.character = first.props.character;
    inf.props.state = first.props.state;
    inf.props.subprocess = t.tag;
    inf.props.potential = params_->potential_at(t.site);

    std::map<std::string, Complex> parts;
    bool split = false;
    for (const auto& [s, amplitude] : tokens) {
      inf.strength += amplitude;
      const auto& src = (*prior_)[s];
      if (src.props.contributions.empty()) {
        parts[src.props.subprocess] += amplitude;
      } else {
        split = true;
        const Complex p = propagator(src.site, t.site, *params_);
        for (const auto& [tag, g] : src.props.contributions) parts[tag] += p * g;
      }
    }
    if (split || parts.size() > 1) inf.props.contributions.assign(parts.begin(), parts.end());

    auto& content = inf.content;
    std::map<std::string, std::size_t> position;
    auto add = [&](const std::string& label, int gen) {
      auto [it, inserted] = position.try_emplace(label, content.ancestors.size());
      if (inserted) {
        content.ancestors.push_back(label);
        content.ancestor_generations.push_back(gen);
      }
      return it->second;
    };
    for (const auto& [s, amplitude] : tokens) add((*prior_)[s].label, prior_->generation());
    if (params_->full_content) {
      for (const auto& [s, amplitude] : tokens) {
        const auto& src = (*prior_)[s];
        const std::size_t self = position.at(src.label);
        std::vector<std::size_t> remap;
        for (std::size_t k = 0; k < src.content.ancestors.size(); ++k) {
          const int g = k < src.content.ancestor_generations.size() ? src.content.ancestor_generations[k]
                                                                     : src.site.generation - 1;
          remap.push_back(add(src.content.ancestors[k], g));
          if (g == src.site.generation - 1) content.edges.emplace_back(remap.back(), self);
        }
        for (auto [a, b] : src.content.edges) content.edges.emplace_back(remap.at(a), remap.at(b));
      }
      std::sort(content.edges.begin(), content.edges.end());
      content.edges.erase(std::unique(content.edges.begin(), content.edges.end()), content.edges.end());
    }
    out.insert(std::move(inf));
  }
  out.seal();
  return out;
}

const Token& play_round(NascentTapestry& nascent, Rng& rng) { return nascent.play_round(rng); }

CausalTapestry evolve_generation(const CausalTapestry& prior, const StrategyParams& params, Rng& rng) {
  if (prior.empty()) throw EmptyPrior();
  NascentTapestry nascent(prior, params);
  const std::size_t cap = params.rounds_per_generation;
  while (nascent.has_moves() && (cap == 0 || nascent.rounds_played() < cap)) nascent.play_round(rng);
  return nascent.seal();
}

std::vector<CausalTapestry> evolve(const CausalTapestry& initial, int generations, const StrategyParams& params,
                                   Rng& rng) {
  if (generations < 0) throw InvalidArgument("generation count must be >= 0");
  std::vector<CausalTapestry> history{initial};
  history.reserve(static_cast<std::size_t>(generations) + 1);
  for (int g = 0; g < generations; ++g) history.push_back(evolve_generation(history.back(), params, rng));
  return history;
}

}  // namespace informon::dynamics
