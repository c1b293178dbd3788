#pragma once

// Process expressions, coupling rules, sequence trees and covering maps.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "informon/core.hpp"
#include "informon/dynamics.hpp"
#include "informon/interpolation.hpp"

namespace informon::algebra {

enum class Kind { Primitive, Zero, Scalar, SumExcl, SumFree, SumInter, ProdExcl, ProdFree, ProdInter, Concat };

/// How a primitive assigns strength to the informon it places.
enum class Strategy {
  PathIntegral,  // sum of propagator * strength over admissible prior informons
  Identity,      // copies the prior strength at the same coordinates
};

struct PrimitiveSpec {
  std::string id;
  std::string character = "scalar";
  std::string state;
  Strategy strategy = Strategy::PathIntegral;
  /// Only prior informons with this subprocess tag act as sources.
  std::optional<std::string> source_tag;
  /// Allowed target coordinates; empty means every site of the strategy box.
  std::vector<std::vector<int>> sites;

  bool operator==(const PrimitiveSpec&) const = default;
};

struct ProcessExpr;
using Expr = std::shared_ptr<const ProcessExpr>;

struct ProcessExpr {
  Kind kind = Kind::Zero;
  PrimitiveSpec primitive;   // Primitive
  Complex weight{1.0, 0.0};  // Scalar
  std::string rule;          // SumInter, ProdInter
  bool free = false;         // SumInter, ProdInter: free rather than exclusive
  std::vector<Expr> children;
};

Expr primitive(PrimitiveSpec spec);
Expr primitive(const std::string& id);
Expr zero();
Expr scalar(Complex weight, Expr child);
Expr sum_excl(std::vector<Expr> children);
Expr sum_free(std::vector<Expr> children);
Expr sum_inter(std::vector<Expr> children, const std::string& rule, bool free = false);
Expr prod_excl(std::vector<Expr> children);
Expr prod_free(std::vector<Expr> children);
Expr prod_inter(std::vector<Expr> children, const std::string& rule, bool free = false);
Expr concat(Expr first, Expr second);

bool is_sum(Kind k) noexcept;
bool is_product(Kind k) noexcept;
bool is_interactive(Kind k) noexcept;
/// SumFree, ProdFree and the free interactive variants.
bool is_free(const ProcessExpr& e) noexcept;

bool structurally_equal(const Expr& a, const Expr& b);

/// Surface syntax accepted by parse_process_expr. Non-real weights throw.
std::string to_string(const Expr& e);

/// Replaces every primitive whose id appears in `table` by the table entry.
Expr bind_primitives(const Expr& e, const std::map<std::string, PrimitiveSpec>& table);

/// Primitive ids in left-to-right order, with repeats.
std::vector<std::string> primitive_ids(const Expr& e);

// Coupling rules.

/// What happened under an interactive node in one round: which children
/// acted and the states of the primitives that acted, left to right.
struct RoundRecord {
  std::vector<std::size_t> active_children;
  std::vector<std::string> states;

  bool operator==(const RoundRecord&) const = default;
};

using RulePredicate = std::function<bool(const std::optional<RoundRecord>& previous, const RoundRecord& proposed)>;

struct CouplingRule {
  std::string name;
  RulePredicate allows;
};

/// Built-ins: "entangle" (all acting states equal) and "cat" / "oneway"
/// (the active child index never decreases).
void register_rule(CouplingRule rule);
bool has_rule(const std::string& name);
const CouplingRule& find_rule(const std::string& name);

// Simplification.

struct CompatTable {
  /// Unordered character pairs that may be summed; other mixed sums vanish.
  std::set<std::pair<std::string, std::string>> summable_characters;
  /// Unordered character pairs that may not be multiplied.
  std::set<std::pair<std::string, std::string>> incompatible_product_characters;
  /// Unordered primitive-id pairs whose product vanishes.
  std::set<std::pair<std::string, std::string>> incompatible_products;
  /// Characters whose identical-state self-products vanish.
  std::set<std::string> fermionic_characters;

  bool summable(const std::string& a, const std::string& b) const;
  bool product_forbidden(const std::string& a, const std::string& b) const;
  bool ids_incompatible(const std::string& a, const std::string& b) const;
};

/// Character of an expression: primitives carry one, scalars pass theirs
/// through, products join their children with "*", uniform sums keep theirs.
/// Zero has none.
std::optional<std::string> character_of(const Expr& e);

Expr simplify(const Expr& e, const CompatTable& compat = {});

// Sequence trees.

struct Context {
  dynamics::StrategyParams params;
  /// Rounds each primitive occurrence may act.
  std::size_t rounds = 1;
  /// Maximum number of complete paths (and of product moves per round).
  std::size_t cap = 100000;
};

/// One informon placement inside a round.
struct Placement {
  std::size_t agent = 0;   // primitive occurrence, left to right
  std::size_t factor = 0;  // child of the top-level product containing the agent
  std::string tag;
  std::string character;
  std::string state;
  std::vector<int> coords;
  Complex gamma;  // weight * strategy strength

  bool operator==(const Placement&) const = default;
};

using Round = std::vector<Placement>;

struct Path {
  std::vector<Round> rounds;
  CausalTapestry tapestry;
};

class SequenceTree {
 public:
  struct Node {
    int parent = -1;
    int depth = 0;
    Round edge;
    std::vector<int> children;
  };

  std::span<const Node> nodes() const noexcept { return nodes_; }
  /// Complete root-to-leaf histories, in depth-first order.
  std::span<const Path> paths() const noexcept { return paths_; }
  std::size_t leaf_count() const noexcept { return paths_.size(); }

  std::string to_dot() const;

 private:
  friend SequenceTree build_sequence_tree(const Expr&, const CausalTapestry&, const Context&);
  std::vector<Node> nodes_;
  std::vector<Path> paths_;
};

/// Exhaustive enumeration. Every primitive occurrence acts up to
/// ctx.rounds times, never twice on the same site. In each round a sum lets
/// exactly one child act and a product lets every child act; interactive
/// nodes keep only moves their rule allows. Two placements at one site share
/// an informon when all their lowest common ancestors are free couplings;
/// otherwise they form separate informons, and two placements by the same
/// primitive id are refused. Throws CapExceeded past ctx.cap paths.
SequenceTree build_sequence_tree(const Expr& expr, const CausalTapestry& initial, const Context& ctx);

/// Uniform random walk down the sequence tree; returns one complete path.
Path sample_path(const Expr& expr, const CausalTapestry& initial, const Context& ctx, dynamics::Rng& rng);

/// Runs the process on `initial`, concatenations left to right, one sampled
/// path per non-concatenated stage.
CausalTapestry evaluate(const Expr& expr, const CausalTapestry& initial, const Context& ctx, dynamics::Rng& rng);

// Covering maps.

/// Fields sampled on one shared grid, coalesced under a pointwise tolerance.
class FieldSet {
 public:
  FieldSet(std::vector<interp::Point> grid, Spacing spacing, double tolerance = 1e-12)
      : grid_(std::move(grid)), spacing_(spacing), tolerance_(tolerance) {}

  /// Adds the field unless an existing one matches it pointwise.
  bool insert(std::vector<Complex> values);

  std::size_t size() const noexcept { return fields_.size(); }
  const std::vector<interp::Point>& grid() const noexcept { return grid_; }
  const Spacing& spacing() const noexcept { return spacing_; }
  double tolerance() const noexcept { return tolerance_; }
  std::span<const std::vector<Complex>> fields() const noexcept { return fields_; }
  interp::WaveField field(std::size_t i) const;

 private:
  std::vector<interp::Point> grid_;
  Spacing spacing_;
  double tolerance_;
  std::vector<std::vector<Complex>> fields_;
};

FieldSet scale(const FieldSet& set, Complex w);
/// {f + g : f in a, g in b}.
FieldSet minkowski_sum(const FieldSet& a, const FieldSet& b);
bool set_equal(const FieldSet& a, const FieldSet& b, double tolerance = 1e-12);

/// One global field per complete path of the sequence tree.
FieldSet pcm(const Expr& expr, const CausalTapestry& initial, const Context& ctx, std::span<const interp::Point> grid);

// Configuration space.

struct TupleComponent {
  std::vector<int> coords;
  std::string tag;
  std::string character;
  std::string state;
  Complex gamma;

  bool operator==(const TupleComponent&) const = default;
};

using InformonTuple = std::vector<TupleComponent>;
using TupleTapestry = std::vector<InformonTuple>;

/// True when every component of `t` agrees in strength with each component of
/// `k` that shares its factor, site and properties.
bool admissible(const InformonTuple& t, const TupleTapestry& k, double tolerance = 1e-12);
/// k1 followed by the tuples of k2 that are new and admissible in k1.
TupleTapestry consistent_union(const TupleTapestry& k1, const TupleTapestry& k2, double tolerance = 1e-12);

/// Rounds of a path as tuples, one component per top-level factor.
TupleTapestry configuration_tapestry(const Path& path, std::size_t factors);

struct ConfigFieldSet {
  std::vector<std::vector<interp::Point>> factor_grids;
  /// Values over the product grid, last factor fastest.
  std::vector<std::vector<Complex>> fields;
  std::vector<TupleTapestry> maximal;

  std::size_t size() const noexcept { return fields.size(); }
  std::size_t grid_size() const;
  /// Flat index of the grid point choosing `indices[k]` in factor k.
  std::size_t flat_index(std::span<const std::size_t> indices) const;
};

/// Fields w * sum over tuples of prod_k Gamma_k * kernel(site_k, z_k), one per
/// maximal consistent tapestry. `expr` must be a product, optionally scaled.
ConfigFieldSet config_pcm(const Expr& expr, const CausalTapestry& initial, const Context& ctx,
                          const std::vector<std::vector<interp::Point>>& factor_grids);

}  // namespace informon::algebra
