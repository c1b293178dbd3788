#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "informon/algebra.hpp"
#include "informon/errors.hpp"
#include "informon/parser.hpp"

using namespace informon;
using namespace informon::algebra;

namespace {

Context line_context(int extent = 3, std::size_t rounds = 1) {
  Context ctx;
  ctx.params = testing::line_params(extent);
  ctx.rounds = rounds;
  return ctx;
}

CausalTapestry line_initial(const Context& ctx, std::uint64_t seed = 1, const std::string& tag = "P") {
  auto sites = ctx.params.box.sites(0);
  auto g = testing::random_strengths(sites.size(), seed);
  std::size_t i = 0;
  return dynamics::init_from_samples([&](const LatticeSite&) { return g[i++]; }, sites, tag);
}

Informon seed_informon(std::vector<int> coords, const std::string& tag, Complex g, const std::string& character = "scalar",
                       const std::string& state = {}) {
  Informon inf;
  inf.site = {0, std::move(coords)};
  inf.label = make_label(inf.site, tag);
  inf.strength = g;
  inf.props.subprocess = tag;
  inf.props.character = character;
  inf.props.state = state;
  return inf;
}

Expr single_site(const std::string& id, int x) {
  PrimitiveSpec s;
  s.id = id;
  s.sites = {{x}};
  return primitive(s);
}

std::vector<interp::Point> line_grid(double t = 0.1) { return interp::uniform_grid(1, t, -0.3, 0.3, 13); }

Expr charactered(const std::string& id, const std::string& character, const std::string& state = {}) {
  PrimitiveSpec s;
  s.id = id;
  s.character = character;
  s.state = state;
  return primitive(s);
}

// Random expression trees over a handful of primitives, without
// concatenation (the sequence tree does not cover it).
class TreeGen {
 public:
  explicit TreeGen(std::uint64_t seed) : rng_(seed) {}

  Expr operator()(int depth) {
    const int pick = depth <= 0 ? leaf_choice() : std::uniform_int_distribution<int>(0, 9)(rng_);
    switch (pick) {
      case 0: return primitive("P" + std::to_string(std::uniform_int_distribution<int>(0, 4)(rng_)));
      case 1: return zero();
      case 2: return scalar(weight(), (*this)(depth - 1));
      case 3: return sum_excl(children(depth));
      case 4: return sum_free(children(depth));
      case 5: return prod_excl(children(depth));
      case 6: return prod_free(children(depth));
      case 7: return sum_inter(children(depth), "oneway", coin());
      case 8: return prod_inter(children(depth), "entangle", coin());
      default: return primitive("Q" + std::to_string(std::uniform_int_distribution<int>(0, 2)(rng_)));
    }
  }

 private:
  int leaf_choice() { return std::uniform_int_distribution<int>(0, 5)(rng_) == 0 ? 1 : 0; }
  bool coin() { return std::uniform_int_distribution<int>(0, 1)(rng_) == 1; }
  Complex weight() { return {std::uniform_int_distribution<int>(-8, 8)(rng_) / 4.0 + 0.125, 0.0}; }
  std::vector<Expr> children(int depth) {
    std::vector<Expr> out(std::uniform_int_distribution<std::size_t>(2, 3)(rng_));
    for (auto& c : out) c = (*this)(depth - 1);
    return out;
  }
  std::mt19937_64 rng_;
};

}  // namespace

TEST_CASE("constructors reject malformed nodes") {
  CHECK_THROWS_AS(primitive(""), InvalidArgument);
  CHECK_THROWS_AS(sum_excl({}), InvalidArgument);
  CHECK_THROWS_AS(prod_inter({primitive("A")}, ""), InvalidArgument);
  CHECK_THROWS_AS(scalar({NAN, 0}, primitive("A")), InvalidArgument);
  CHECK_THROWS_AS(sum_free({primitive("A"), nullptr}), InvalidArgument);
}

TEST_CASE("kind predicates") {
  CHECK(is_sum(Kind::SumFree));
  CHECK(is_product(Kind::ProdInter));
  CHECK_FALSE(is_product(Kind::Concat));
  CHECK(is_free(*sum_inter({primitive("A")}, "cat", true)));
  CHECK_FALSE(is_free(*sum_inter({primitive("A")}, "cat", false)));
  CHECK(is_free(*prod_free({primitive("A")})));
}

TEST_CASE("binding and primitive ids") {
  auto e = sum_excl({primitive("A"), prod_excl({primitive("B"), primitive("A")})});
  CHECK(primitive_ids(e) == std::vector<std::string>{"A", "B", "A"});
  PrimitiveSpec spec;
  spec.character = "fermion";
  spec.strategy = Strategy::Identity;
  auto bound = bind_primitives(e, {{"A", spec}});
  CHECK(bound->children[0]->primitive.id == "A");
  CHECK(bound->children[0]->primitive.character == "fermion");
  CHECK(bound->children[1]->children[1]->primitive.strategy == Strategy::Identity);
  CHECK(bound->children[1]->children[0]->primitive.character == "scalar");
  CHECK_FALSE(structurally_equal(e, bound));
}

TEST_CASE("coupling rules") {
  const auto& entangle = find_rule("entangle");
  CHECK(entangle.allows(std::nullopt, {{0, 1}, {"0", "0"}}));
  CHECK_FALSE(entangle.allows(std::nullopt, {{0, 1}, {"0", "1"}}));
  const auto& cat = find_rule("cat");
  CHECK(cat.allows(std::nullopt, {{1}, {}}));
  CHECK(cat.allows(RoundRecord{{0}, {}}, {{1}, {}}));
  CHECK_FALSE(cat.allows(RoundRecord{{1}, {}}, {{0}, {}}));
  CHECK_THROWS_AS(find_rule("no_such_rule"), UnknownRule);

  register_rule({"never", [](const auto&, const auto&) { return false; }});
  CHECK(has_rule("never"));
  CHECK_THROWS_AS(register_rule({"", nullptr}), InvalidArgument);
}

TEST_CASE("sequence tree sizes") {
  auto ctx = line_context();
  auto initial = line_initial(ctx);

  SUBCASE("a primitive has one leaf per site") {
    auto tree = build_sequence_tree(primitive("A"), initial, ctx);
    CHECK(tree.leaf_count() == 3);
    CHECK(tree.nodes().size() == 4);
  }
  SUBCASE("two rounds never revisit a site") {
    ctx.rounds = 2;
    auto tree = build_sequence_tree(primitive("A"), initial, ctx);
    CHECK(tree.leaf_count() == 6);
    for (const auto& p : tree.paths()) CHECK(p.tapestry.size() == 2);
  }
  SUBCASE("a sum lets one child act per round") {
    auto tree = build_sequence_tree(sum_excl({primitive("A"), primitive("B")}), initial, ctx);
    CHECK(tree.leaf_count() == 18);  // 6 first moves, then 3 for the other child
    for (const auto& p : tree.paths()) {
      CHECK(p.rounds.size() == 2);
      CHECK(p.rounds[0].size() == 1);
    }
  }
  SUBCASE("a product lets every child act together") {
    auto tree = build_sequence_tree(prod_excl({primitive("A"), primitive("B")}), initial, ctx);
    CHECK(tree.leaf_count() == 9);
    for (const auto& p : tree.paths()) {
      REQUIRE(p.rounds.size() == 1);
      CHECK(p.rounds[0].size() == 2);
      CHECK(p.tapestry.size() == 2);
    }
  }
  SUBCASE("the zero process only has the root") {
    auto tree = build_sequence_tree(zero(), initial, ctx);
    CHECK(tree.leaf_count() == 1);
    CHECK(tree.nodes().size() == 1);
    CHECK(tree.paths()[0].tapestry.empty());
  }
  SUBCASE("an interactive rule prunes moves") {
    auto tree = build_sequence_tree(sum_inter({primitive("A"), primitive("B")}, "never"), initial, ctx);
    CHECK(tree.leaf_count() == 1);
  }
}

TEST_CASE("free sums merge placements, exclusive sums keep them apart") {
  auto ctx = line_context();
  auto initial = line_initial(ctx);
  auto a = single_site("A", 0), b = single_site("B", 0);

  auto excl = build_sequence_tree(sum_excl({a, b}), initial, ctx);
  for (const auto& p : excl.paths()) CHECK(p.tapestry.size() == 2);

  auto free = build_sequence_tree(sum_free({a, b}), initial, ctx);
  for (const auto& p : free.paths()) {
    REQUIRE(p.tapestry.size() == 1);
    const auto& inf = p.tapestry[0];
    CHECK(inf.props.subprocess == "A^B");
    CHECK(inf.props.contributions.size() == 2);
    CHECK(std::abs(inf.strength - excl.paths()[0].tapestry[0].strength - excl.paths()[0].tapestry[1].strength) < 1e-15);
  }

  // The same primitive may not sit twice on one site.
  auto twice = build_sequence_tree(sum_excl({single_site("A", 0), single_site("A", 0)}), initial, ctx);
  for (const auto& p : twice.paths()) CHECK(p.tapestry.size() == 1);
}

TEST_CASE("placement strengths follow the strategy") {
  auto ctx = line_context();
  auto initial = line_initial(ctx, 3);
  auto tree = build_sequence_tree(scalar(0.5, single_site("A", 1)), initial, ctx);
  REQUIRE(tree.leaf_count() == 1);
  Complex expect = 0;
  for (const auto& inf : initial.informons()) expect += dynamics::propagator(inf.site, {1, {1}}, ctx.params) * inf.strength;
  CHECK(std::abs(tree.paths()[0].rounds[0][0].gamma - 0.5 * expect) < 1e-15);

  PrimitiveSpec id;
  id.id = "I";
  id.strategy = Strategy::Identity;
  id.sites = {{-1}};
  auto copy = build_sequence_tree(primitive(id), initial, ctx);
  CHECK(copy.paths()[0].tapestry[0].strength == initial.find_at(std::vector<int>{-1})->strength);

  PrimitiveSpec missing;
  missing.id = "M";
  missing.source_tag = "nobody";
  CHECK_THROWS_AS(build_sequence_tree(primitive(missing), initial, ctx), EmptyPrior);
}

TEST_CASE("sum law for the covering map") {
  auto ctx = line_context();
  auto initial = line_initial(ctx, 5);
  auto grid = line_grid();
  const Complex w1(0.6, 0.2), w2(-0.3, 0.9);
  auto p1 = primitive("A"), p2 = primitive("B");
  auto parts = minkowski_sum(scale(pcm(p1, initial, ctx, grid), w1), scale(pcm(p2, initial, ctx, grid), w2));
  CHECK(parts.size() == 9);

  auto excl = pcm(sum_excl({scalar(w1, p1), scalar(w2, p2)}), initial, ctx, grid);
  CHECK(set_equal(excl, parts, 1e-12));
  auto free = pcm(sum_free({scalar(w1, p1), scalar(w2, p2)}), initial, ctx, grid);
  CHECK(set_equal(free, parts, 1e-12));
}

TEST_CASE("distinct processes with one covering map") {
  auto ctx = line_context();
  auto initial = line_initial(ctx, 6);
  auto grid = line_grid();
  auto ab = pcm(sum_excl({primitive("A"), primitive("B")}), initial, ctx, grid);
  auto ba = pcm(sum_excl({primitive("B"), primitive("A")}), initial, ctx, grid);
  auto free = pcm(sum_free({primitive("A"), primitive("B")}), initial, ctx, grid);
  CHECK(set_equal(ab, ba));
  CHECK(set_equal(ab, free));
  auto one = pcm(primitive("A"), initial, ctx, grid);
  CHECK_FALSE(set_equal(ab, one));
}

TEST_CASE("field sets coalesce near-identical fields") {
  FieldSet s(line_grid(), {0.1, 0.1, 1});
  std::vector<Complex> f(13, 1.0);
  CHECK(s.insert(f));
  f[3] += 1e-13;
  CHECK_FALSE(s.insert(f));
  f[3] += 1e-6;
  CHECK(s.insert(f));
  CHECK(s.size() == 2);
  CHECK(s.field(1).values[3] == f[3]);
  CHECK_THROWS_AS(s.insert({1.0}), InvalidArgument);
}

TEST_CASE("consistent union") {
  auto comp = [](int x, Complex g) { return TupleComponent{{x}, "A", "scalar", "", g}; };
  TupleTapestry k1{{comp(0, 1.0)}};
  TupleTapestry agree{{comp(0, 1.0)}, {comp(1, 2.0)}};
  TupleTapestry clash{{comp(0, 3.0)}};

  CHECK(consistent_union(k1, agree).size() == 2);
  CHECK(consistent_union(k1, clash) == k1);
  CHECK(admissible({comp(2, 5.0)}, k1));
  CHECK_FALSE(admissible({comp(0, 1.5)}, k1));
  // Differing properties do not constrain each other.
  TupleTapestry other{{TupleComponent{{0}, "B", "scalar", "", 7.0}}};
  CHECK(consistent_union(k1, other).size() == 2);
}

TEST_CASE("configuration tapestry needs one placement per factor") {
  Path p;
  p.rounds = {{Placement{0, 0, "A", "scalar", "", {0}, 1.0}, Placement{1, 1, "B", "scalar", "", {1}, 2.0}}};
  auto k = configuration_tapestry(p, 2);
  REQUIRE(k.size() == 1);
  CHECK(k[0][1].gamma == Complex(2.0));
  CHECK_THROWS_AS(configuration_tapestry(p, 3), InvalidArgument);
  CHECK_THROWS_AS(configuration_tapestry(p, 1), InvalidArgument);
}

TEST_CASE("single-factor configuration map is the full lattice field") {
  auto ctx = line_context(5);
  auto initial = line_initial(ctx, 9);
  auto grid = line_grid();
  auto set = config_pcm(prod_excl({primitive("A")}), initial, ctx, {grid});
  REQUIRE(set.size() == 1);
  CHECK(set.maximal[0].size() == 5);

  dynamics::Rng rng(0);
  auto next = dynamics::evolve_generation(initial, ctx.params, rng);
  auto expect = interp::global_field(next, grid, ctx.params.spacing);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(set.fields[0][i] - expect.values[i]) < 1e-13);
}

TEST_CASE("independent product factorises") {
  auto ctx = line_context(3);
  CausalTapestry initial(0);
  auto ga = testing::random_strengths(3, 1), gb = testing::random_strengths(3, 2);
  for (int x = -1; x <= 1; ++x) {
    initial.insert(seed_informon({x}, "A", ga[static_cast<std::size_t>(x + 1)]));
    initial.insert(seed_informon({x}, "B", gb[static_cast<std::size_t>(x + 1)]));
  }
  initial.seal();
  PrimitiveSpec a, b;
  a.id = "A";
  a.source_tag = "A";
  b.id = "B";
  b.source_tag = "B";
  auto grid = line_grid();
  auto set = config_pcm(scalar(0.5, prod_excl({primitive(a), primitive(b)})), initial, ctx, {grid, grid});
  REQUIRE(set.size() == 1);
  CHECK(set.grid_size() == grid.size() * grid.size());

  auto single = [&](const PrimitiveSpec& s) { return config_pcm(prod_excl({primitive(s)}), initial, ctx, {grid}).fields[0]; };
  auto psi_a = single(a), psi_b = single(b);
  double worst = 0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const std::size_t idx[] = {i, j};
      worst = std::max(worst, std::abs(set.fields[0][set.flat_index(idx)] - 0.5 * psi_a[i] * psi_b[j]));
    }
  CHECK(worst < 1e-13);
  CHECK_THROWS_AS(config_pcm(primitive(a), initial, ctx, {grid}), InvalidArgument);
  CHECK_THROWS_AS(config_pcm(prod_excl({primitive(a), primitive(b)}), initial, ctx, {grid}), InvalidArgument);
}

TEST_CASE("pairing rule removes cross-paired amplitudes") {
  auto ctx = line_context(3);
  ctx.params.box = LatticeBox({3});
  const double h = std::sqrt(0.5);
  CausalTapestry initial(0);
  for (int x : {0, 1}) {
    initial.insert(seed_informon({x}, "A", h, "A", std::to_string(x)));
    initial.insert(seed_informon({x}, "B", h, "B", std::to_string(x)));
  }
  initial.seal();
  auto make = [](const std::string& id, const std::string& tag, int x) {
    PrimitiveSpec s;
    s.id = id;
    s.character = tag;
    s.state = std::to_string(x);
    s.strategy = Strategy::Identity;
    s.source_tag = tag;
    s.sites = {{x}};
    return primitive(s);
  };
  auto expr = prod_inter({sum_excl({make("A0", "A", 0), make("A1", "A", 1)}), sum_excl({make("B0", "B", 0), make("B1", "B", 1)})},
                         "entangle");
  std::vector<interp::Point> sites{interp::Point{0.1, {0, 0, 0}}, interp::Point{0.1, {0.1, 0, 0}}};
  auto set = config_pcm(expr, initial, ctx, {sites, sites});
  REQUIRE(set.size() == 1);
  const std::size_t cross1[] = {0, 1}, cross2[] = {1, 0}, pair0[] = {0, 0}, pair1[] = {1, 1};
  CHECK(std::abs(set.fields[0][set.flat_index(cross1)]) <= 1e-14);
  CHECK(std::abs(set.fields[0][set.flat_index(cross2)]) <= 1e-14);
  CHECK(std::abs(set.fields[0][set.flat_index(pair0)]) == doctest::Approx(0.5));
  CHECK(std::abs(set.fields[0][set.flat_index(pair1)]) == doctest::Approx(0.5));

  // Without the rule the cross pairs are populated.
  auto loose = prod_excl({sum_excl({make("A0", "A", 0), make("A1", "A", 1)}), sum_excl({make("B0", "B", 0), make("B1", "B", 1)})});
  auto open = config_pcm(loose, initial, ctx, {sites, sites});
  double cross = 0;
  for (const auto& f : open.fields) cross = std::max(cross, std::abs(f[open.flat_index(cross1)]));
  CHECK(cross > 0.1);
}

TEST_CASE("simplification of null processes") {
  CompatTable compat;
  compat.incompatible_products = {{"Ca", "Dr"}};
  compat.incompatible_product_characters = {{"boson", "ghost"}};
  compat.fermionic_characters = {"fermion"};

  CHECK(simplify(sum_excl({charactered("A", "x"), charactered("B", "y")}), compat)->kind == Kind::Zero);
  compat.summable_characters = {{"x", "y"}};
  CHECK(simplify(sum_excl({charactered("A", "x"), charactered("B", "y")}), compat)->kind == Kind::SumExcl);

  CHECK(simplify(prod_excl({primitive("Ca"), primitive("Dr")}), compat)->kind == Kind::Zero);
  CHECK(simplify(prod_excl({primitive("Dr"), scalar(2.0, primitive("Ca"))}), compat)->kind == Kind::Zero);
  CHECK(simplify(prod_excl({charactered("A", "boson"), charactered("B", "ghost")}), compat)->kind == Kind::Zero);
  CHECK(simplify(prod_excl({charactered("A", "boson"), charactered("B", "other")}), compat)->kind == Kind::ProdExcl);

  CHECK(simplify(prod_free({charactered("F1", "fermion", "up"), charactered("F2", "fermion", "up")}), compat)->kind ==
        Kind::Zero);
  CHECK(simplify(prod_free({charactered("F1", "fermion", "up"), charactered("F2", "fermion", "down")}), compat)->kind ==
        Kind::ProdFree);
  CHECK(simplify(prod_free({charactered("B1", "boson", "up"), charactered("B2", "boson", "up")}), compat)->kind ==
        Kind::ProdFree);

  CHECK_THROWS_AS(simplify(sum_inter({primitive("A"), primitive("B")}, "missing_rule")), UnknownRule);
}

TEST_CASE("simplification of scalars") {
  auto a = primitive("A"), b = primitive("B");
  CHECK(structurally_equal(simplify(scalar(1.0, a)), a));
  auto merged = simplify(scalar(2.0, scalar(3.0, a)));
  CHECK(merged->kind == Kind::Scalar);
  CHECK(merged->weight == Complex(6.0));
  CHECK(simplify(scalar(2.0, zero()))->kind == Kind::Zero);
  auto spread = simplify(scalar(0.5, sum_excl({a, b})));
  REQUIRE(spread->kind == Kind::SumExcl);
  CHECK(structurally_equal(spread->children[1], scalar(0.5, b)));
  CHECK(structurally_equal(simplify(sum_excl({zero(), a})), a));
  CHECK(simplify(sum_free({zero(), zero()}))->kind == Kind::Zero);
}

TEST_CASE("characters") {
  CHECK(character_of(prod_excl({charactered("A", "x"), charactered("B", "y")})) == "x*y");
  CHECK(character_of(sum_excl({charactered("A", "y"), charactered("B", "x")})) == "x|y");
  CHECK(character_of(sum_excl({charactered("A", "x"), zero()})) == "x");
  CHECK_FALSE(character_of(zero()).has_value());
}

TEST_CASE("zero laws hold on random expression trees") {
  TreeGen gen(2024);
  for (int trial = 0; trial < 300; ++trial) {
    auto e = gen(3);
    auto s = simplify(e);
    CAPTURE(to_string(e));
    CHECK(simplify(prod_excl({e, zero()}))->kind == Kind::Zero);
    CHECK(simplify(prod_free({zero(), e}))->kind == Kind::Zero);
    CHECK(structurally_equal(simplify(sum_excl({e, zero()})), s));
    CHECK(structurally_equal(simplify(sum_free({zero(), e})), s));
    CHECK(simplify(scalar(2.5, zero()))->kind == Kind::Zero);
    CHECK(structurally_equal(simplify(s), s));
  }
}

TEST_CASE("parser round trip on random trees") {
  TreeGen gen(77);
  for (int trial = 0; trial < 300; ++trial) {
    auto e = gen(4);
    if (trial % 4 == 0) e = concat(e, gen(2));
    const auto text = to_string(e);
    CAPTURE(text);
    auto back = parse_process_expr(text);
    CHECK(structurally_equal(back, e));
    CHECK(to_string(back) == text);
  }
}

TEST_CASE("sampled paths are complete and seeded") {
  auto ctx = line_context(5, 2);
  auto initial = line_initial(ctx, 4);
  auto e = sum_excl({primitive("A"), primitive("B")});
  dynamics::Rng r1(8), r2(8);
  auto p1 = sample_path(e, initial, ctx, r1), p2 = sample_path(e, initial, ctx, r2);
  CHECK(p1.rounds == p2.rounds);
  CHECK(p1.rounds.size() == 4);
  auto tree = build_sequence_tree(e, initial, ctx);
  bool found = false;
  for (const auto& p : tree.paths()) found = found || p.rounds == p1.rounds;
  CHECK(found);
}

TEST_CASE("concatenation runs stages in order") {
  auto ctx = line_context(5);
  auto initial = line_initial(ctx, 12);
  dynamics::Rng rng(0);
  auto ab = evaluate(concat(single_site("A", 0), single_site("B", 1)), initial, ctx, rng);
  auto ba = evaluate(concat(single_site("B", 1), single_site("A", 0)), initial, ctx, rng);
  CHECK(ab.generation() == 2);
  REQUIRE(ab.size() == 1);
  REQUIRE(ba.size() == 1);
  CHECK(ab[0].site.coords != ba[0].site.coords);

  auto left = evaluate(concat(concat(single_site("A", 0), single_site("B", 1)), single_site("C", -1)), initial, ctx, rng);
  auto right = evaluate(concat(single_site("A", 0), concat(single_site("B", 1), single_site("C", -1))), initial, ctx, rng);
  REQUIRE(left.size() == 1);
  CHECK(left.generation() == right.generation());
  CHECK(std::abs(left[0].strength - right[0].strength) < 1e-15);

  CHECK_THROWS_AS(evaluate(concat(zero(), primitive("A")), initial, ctx, rng), EmptyPrior);
  CHECK_THROWS_AS(build_sequence_tree(concat(primitive("A"), primitive("B")), initial, ctx), InvalidArgument);
}

TEST_CASE("enumeration cap") {
  auto ctx = line_context(5, 2);
  ctx.cap = 10;
  auto initial = line_initial(ctx);
  CHECK_THROWS_AS(build_sequence_tree(primitive("A"), initial, ctx), CapExceeded);
  ctx.cap = 20;
  CHECK(build_sequence_tree(primitive("A"), initial, ctx).leaf_count() == 20);
}

TEST_CASE("dot output lists one edge per non-root node") {
  auto ctx = line_context();
  auto tree = build_sequence_tree(primitive("A"), line_initial(ctx), ctx);
  auto dot = tree.to_dot();
  CHECK(dot.rfind("digraph sequence_tree {", 0) == 0);
  std::size_t arrows = 0;
  for (std::size_t at = dot.find("->"); at != std::string::npos; at = dot.find("->", at + 1)) ++arrows;
  CHECK(arrows == tree.nodes().size() - 1);
  CHECK(dot.find("A@[-1]") != std::string::npos);
}
