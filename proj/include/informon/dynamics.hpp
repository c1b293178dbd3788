#pragma once

// Path-integral game strategy: one nascent generation is built token by token
// from a sealed prior generation.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "informon/core.hpp"

namespace informon::dynamics {

using Rng = std::mt19937_64;

/// Whether subprocesses with different tags may feed the same nascent informon.
enum class Coupling { Exclusive, Free };

inline constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

struct StrategyParams {
  Spacing spacing;
  double mass = 1.0;
  double hbar = 1.0;
  /// Distance bound; tokens travel only when d(n, n') < distance_bound.
  double distance_bound = std::numeric_limits<double>::infinity();
  /// r: contributing prior informons per nascent informon (nearest first).
  std::size_t max_sources = kUnbounded;
  /// R: informons per round. Only primitive play (R = 1) is implemented.
  std::size_t informons_per_round = 1;
  /// N: cap on rounds per generation; 0 plays until every site is saturated.
  std::size_t rounds_per_generation = 0;
  /// Band limit omega; 0 means the lattice Nyquist rate pi / l_P.
  double band_limit = 0.0;
  std::function<double(const LatticeSite&)> potential;  // V; empty means V = 0
  std::uint64_t rng_seed = 0;
  LatticeBox box{std::vector<int>{1}};
  Coupling coupling = Coupling::Exclusive;
  /// Store the full transitive ancestor set instead of the previous generation only.
  bool full_content = false;

  double potential_at(const LatticeSite& s) const { return potential ? potential(s) : 0.0; }
  double nyquist() const;
  void validate() const;
};

struct Token {
  std::string source;
  std::string target;
  Complex amplitude;
};

/// Squared causal distance between sites of adjacent generations.
double distance_squared(const LatticeSite& src, const LatticeSite& dst, const StrategyParams& params);
double lagrangian(const LatticeSite& src, const LatticeSite& dst, const StrategyParams& params);
/// Feynman-Hibbs normalisation A = sqrt(2 pi i hbar t_P / m) for one axis.
Complex normalisation(const StrategyParams& params);
Complex propagator(const LatticeSite& src, const LatticeSite& dst, const StrategyParams& params);

/// Sealed tapestry with strength reference(embedding) at each site.
CausalTapestry init_from_samples(const std::function<Complex(const LatticeSite&)>& reference,
                                 std::span<const LatticeSite> sites, const std::string& tag = "P",
                                 const Properties& props = {});

/// Indices (into prior.informons()) allowed to feed `target`: within the
/// distance bound, the r nearest, ties broken by coordinate order. Only
/// informons tagged `tag` are considered unless it is empty.
std::vector<std::size_t> admissible_sources(const CausalTapestry& prior, const LatticeSite& target,
                                            const StrategyParams& params, const std::string& tag = {});

/// A generation under construction, with the per-target token ledger that
/// the game needs between rounds.
class NascentTapestry {
 public:
  NascentTapestry(const CausalTapestry& prior, const StrategyParams& params);

  int generation() const noexcept { return generation_; }
  /// True while some round can still place a token.
  bool has_moves() const;
  std::size_t rounds_played() const noexcept { return rounds_; }
  std::span<const Token> tokens() const noexcept { return tokens_; }

  /// One round: Player I picks an unplayed prior informon, Player II picks or
  /// creates the target and a token is placed.
  const Token& play_round(Rng& rng);

  /// Strength of the target at `coords`/`tag` built so far.
  Complex strength_at(std::span<const int> coords, const std::string& tag = {}) const;

  CausalTapestry seal() const;

 private:
  struct Target {
    LatticeSite site;
    std::string tag;  // joined source tags under free coupling
    std::string label;
    std::vector<std::size_t> sources;   // admissible, in prior order
    std::vector<std::size_t> unplayed;  // remaining sources
    std::vector<std::pair<std::size_t, Complex>> tokens;
    bool created = false;
  };

  const Token& place(std::size_t target, std::size_t slot);

  const CausalTapestry* prior_;
  const StrategyParams* params_;
  int generation_;
  std::vector<Target> targets_;
  std::vector<std::vector<std::size_t>> targets_of_source_;
  std::vector<std::size_t> uncreated_count_;
  std::size_t uncreated_targets_ = 0;
  std::optional<std::size_t> in_play_;
  std::vector<Token> tokens_;
  std::size_t rounds_ = 0;
};

/// Free-function form of a single round.
const Token& play_round(NascentTapestry& nascent, Rng& rng);

CausalTapestry evolve_generation(const CausalTapestry& prior, const StrategyParams& params, Rng& rng);

/// initial followed by `generations` successors.
std::vector<CausalTapestry> evolve(const CausalTapestry& initial, int generations, const StrategyParams& params,
                                   Rng& rng);

}  // namespace informon::dynamics
