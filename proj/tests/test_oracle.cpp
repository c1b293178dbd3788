#include <doctest.h>

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "informon/errors.hpp"
#include "informon/oracle.hpp"

using namespace informon;
using namespace informon::oracle;

namespace {

constexpr double kPlanckLength = 1.616255e-35;

interp::WaveField sampled(const PacketSpec& spec, double t, double lo, double hi, std::size_t n) {
  interp::WaveField f;
  f.spacing = {0.1, 0.1, 1};
  f.grid = interp::uniform_grid(1, t, lo, hi, n);
  for (const auto& z : f.grid) f.values.push_back(exact_free_packet(spec, z, 1));
  return f;
}

}  // namespace

TEST_CASE("packet amplitude at the centre") {
  PacketSpec spec;
  CHECK(std::abs(exact_free_packet(spec, 0.0, 0.0)) == doctest::Approx(std::pow(std::numbers::pi, -0.25)).epsilon(1e-15));
  spec.sigma0 = 2.0;
  CHECK(std::abs(exact_free_packet(spec, 0.0, 0.0)) ==
        doctest::Approx(std::pow(4 * std::numbers::pi, -0.25)).epsilon(1e-15));
}

TEST_CASE("packet stays normalised while it spreads") {
  PacketSpec spec;
  spec.k0 = 1.5;
  spec.x0 = -1.0;
  for (double t : {0.0, 0.2, 1.0, 3.0}) {
    double norm = integrate_abs2([&](double x) { return exact_free_packet(spec, x, t); }, -40, 40, 8000);
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("packet width grows as sigma0 sqrt(1 + (hbar t / m sigma0^2)^2)") {
  PacketSpec spec;
  const double t = 1.0;
  const double width = std::sqrt(1 + t * t);  // sqrt(2) sigma0 at t = m sigma0^2 / hbar
  auto second_moment = [&](double tt) {
    double m2 = 0, h = 0.01;
    for (double x = -20; x <= 20; x += h) m2 += x * x * std::norm(exact_free_packet(spec, x, tt)) * h;
    return m2;
  };
  // For |psi|^2 ~ exp(-x^2 / w^2) the second moment is w^2 / 2.
  CHECK(std::sqrt(2 * second_moment(t)) == doctest::Approx(width).epsilon(1e-8));
  CHECK(std::sqrt(2 * second_moment(0)) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("packet centre moves with group velocity") {
  PacketSpec spec;
  spec.k0 = 2.0;
  spec.mass = 0.5;
  const double t = 0.7;  // v = hbar k0 / m = 4
  CHECK(std::abs(exact_free_packet(spec, 2.8, t)) > std::abs(exact_free_packet(spec, 2.7, t)));
  CHECK(std::abs(exact_free_packet(spec, 2.8, t)) > std::abs(exact_free_packet(spec, 2.9, t)));
}

TEST_CASE("constant offset is a pure phase and applied once in several dimensions") {
  PacketSpec a, b;
  b.lagrangian_offset = 0.5;
  const double t = 0.3;
  CHECK(std::abs(exact_free_packet(b, 0.4, t) / exact_free_packet(a, 0.4, t) - std::polar(1.0, 0.15)) < 1e-15);
  interp::Point z{t, {0.4, -0.2, 0.1}};
  CHECK(std::abs(exact_free_packet(b, z, 3) / exact_free_packet(a, z, 3) - std::polar(1.0, 0.15)) < 1e-14);

  dynamics::StrategyParams p;
  p.mass = 2.0;
  CHECK(lattice_reference(a, p, 0.25).lagrangian_offset == 1.25);
}

TEST_CASE("invalid packets") {
  PacketSpec spec;
  spec.sigma0 = 0;
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);
  spec.sigma0 = 1;
  spec.hbar = -1;
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);
}

TEST_CASE("band limit") {
  PacketSpec spec;
  spec.k0 = -3;
  spec.sigma0 = 0.5;
  CHECK(packet_band_limit(spec) == 19.0);
  CHECK(packet_band_limit(spec, 4.0) == 11.0);
}

TEST_CASE("single-step chain by hand") {
  auto p = testing::line_params(3);
  auto g0 = p.box.sites(0), g1 = p.box.sites(1);
  std::vector<Complex> initial{1.0, Complex(0, 1), -0.5};
  auto out = brute_force_chain(initial, {g0, g1}, p);
  for (std::size_t j = 0; j < 3; ++j) {
    Complex expect = 0;
    for (std::size_t i = 0; i < 3; ++i) expect += dynamics::propagator(g0[i], g1[j], p) * initial[i];
    CHECK(std::abs(out[j] - expect) < 1e-15);
  }
}

TEST_CASE("brute force and nested sum agree on a three-step chain") {
  auto p = testing::line_params(6);
  std::vector<std::vector<LatticeSite>> gens;
  for (int g = 0; g < 4; ++g) gens.push_back(p.box.sites(g));
  auto initial = testing::random_strengths(6, 17);
  auto a = brute_force_chain(initial, gens, p);
  auto b = nested_sum_chain(initial, gens, p);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-14);
  CHECK(chain_path_count(gens) == 6 * 6 * 6 * 6);
}

TEST_CASE("chains of different widths") {
  auto p = testing::line_params(7);
  std::vector<std::vector<LatticeSite>> gens{LatticeBox({3}).sites(0), LatticeBox({7}).sites(1), LatticeBox({1}).sites(2)};
  auto initial = testing::random_strengths(3, 2);
  auto a = brute_force_chain(initial, gens, p);
  auto b = nested_sum_chain(initial, gens, p);
  REQUIRE(a.size() == 1);
  CHECK(std::abs(a[0] - b[0]) < 1e-15);
}

TEST_CASE("chain is linear in the initial strengths") {
  auto p = testing::line_params(4);
  std::vector<std::vector<LatticeSite>> gens{p.box.sites(0), p.box.sites(1), p.box.sites(2)};
  auto u = testing::random_strengths(4, 3), v = testing::random_strengths(4, 4);
  const Complex a(0.3, -1.2), b(-2.0, 0.5);
  std::vector<Complex> w(4);
  for (int i = 0; i < 4; ++i) w[i] = a * u[i] + b * v[i];
  auto fu = brute_force_chain(u, gens, p), fv = brute_force_chain(v, gens, p), fw = brute_force_chain(w, gens, p);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(fw[i] - (a * fu[i] + b * fv[i])) < 1e-14);
}

TEST_CASE("chain errors") {
  auto p = testing::line_params(4);
  std::vector<std::vector<LatticeSite>> gens{p.box.sites(0), p.box.sites(1), p.box.sites(2)};
  auto initial = testing::random_strengths(4, 3);
  CHECK_THROWS_AS(brute_force_chain(initial, gens, p, 63), CapExceeded);
  CHECK_NOTHROW(brute_force_chain(initial, gens, p, 64));
  CHECK_THROWS_AS(brute_force_chain(std::span(initial).first(2), gens, p), InvalidArgument);
  CHECK_THROWS_AS(nested_sum_chain(initial, {}, p), InvalidArgument);
  auto same = brute_force_chain(initial, {gens[0]}, p);
  CHECK(same == initial);
}

TEST_CASE("metric names") {
  for (auto m : {Metric::Linf, Metric::L2, Metric::SchrodingerResidual}) CHECK(metric_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(metric_from_string("L1"), InvalidArgument);
}

TEST_CASE("discrepancy is a pseudometric") {
  PacketSpec a, b, c;
  b.k0 = 0.3;
  c.x0 = 0.2;
  auto fa = sampled(a, 0.1, -4, 4, 81);
  auto fb = sampled(b, 0.1, -4, 4, 81);
  auto ref = [&](const PacketSpec& s) { return [s](const interp::Point& z) { return exact_free_packet(s, z, 1); }; };
  for (auto metric : {Metric::Linf, Metric::L2}) {
    DiscrepancySpec d{metric};
    CHECK(discrepancy(fa, ref(a), d) < 1e-15);
    const double ab = discrepancy(fa, ref(b), d), ba = discrepancy(fb, ref(a), d);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-14));
    CHECK(ab > 0);
    const double ac = discrepancy(fa, ref(c), d);
    const double bc = discrepancy(fb, ref(c), d);
    CHECK(ac <= ab + bc + 1e-15);
  }
  DiscrepancySpec linf{Metric::Linf}, l2{Metric::L2};
  CHECK(discrepancy(fa, ref(b), l2) <= discrepancy(fa, ref(b), linf));
}

TEST_CASE("schrodinger residual of the exact packet is small") {
  PacketSpec spec;
  spec.k0 = 1.0;
  const double dt = 1e-3;
  std::vector<interp::WaveField> history;
  for (int k = 0; k < 3; ++k) history.push_back(sampled(spec, 0.1 + k * dt, -5, 5, 1001));
  DiscrepancySpec d{Metric::SchrodingerResidual};
  const double r = discrepancy(history, nullptr, d);
  CHECK(r < 1e-3);

  // A wrong mass shows up immediately.
  d.mass = 2.0;
  CHECK(discrepancy(history, nullptr, d) > 10 * r);

  CHECK_THROWS_AS(discrepancy(std::span(history).first(2), nullptr, DiscrepancySpec{Metric::SchrodingerResidual}),
                  InvalidArgument);
  CHECK_THROWS_AS(discrepancy(history[0], nullptr, DiscrepancySpec{Metric::SchrodingerResidual}), InvalidArgument);
}

TEST_CASE("bound anchors") {
  const double envelope = butzer_envelope(kPlanckLength);
  CHECK(envelope == doctest::Approx(1.29e-33).epsilon(0.01));
  CHECK(yao_thomas_bound(1.0, 299792458.0) == doctest::Approx(1.19e-27).epsilon(0.01));
  BoundParams p;
  CHECK(error_bound(BoundKind::YaoThomas, p) == yao_thomas_bound(1.0, 299792458.0));
  p.butzer.l_P = kPlanckLength;
  CHECK(error_bound(BoundKind::Butzer, p) == doctest::Approx(butzer_constant(p.butzer) * envelope));
}

TEST_CASE("butzer bound is monotone in epsilon, delta and the sup norms") {
  ButzerParams p;
  p.l_P = 0.05;
  p.psi_sup = 0.75;
  p.dpsi_sup = 0.5;
  p.M = 1.0;
  double last = butzer_bound(p);
  for (double eps : {1e-6, 1e-4, 1e-2, 1.0}) {
    p.epsilon = eps;
    const double b = butzer_bound(p);
    CHECK(b > last);
    last = b;
  }
  auto q = p;
  q.delta = 0.01;
  CHECK(butzer_bound(q) > butzer_bound(p));
  q = p;
  q.gamma = 0.5;
  CHECK(butzer_bound(q) > butzer_bound(p));
}

TEST_CASE("butzer truncation number and consistency") {
  CHECK(butzer_truncation(0.0, 1.0) == 3);
  CHECK(butzer_truncation(2.0, 1.0) == 11);  // 2 [4 + 1] + 1
  CHECK(butzer_truncation(2.0, 0.5) == 19);  // 2 [8 + 1] + 1
  ButzerParams p;
  p.W = 2.0;
  p.r = 11;
  CHECK_NOTHROW(butzer_constant(p));
  p.r = 12;
  CHECK_THROWS_AS(butzer_constant(p), InvalidArgument);
  CHECK_THROWS_AS(butzer_truncation(1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(butzer_envelope(1.0), InvalidArgument);
  CHECK_THROWS_AS(yao_thomas_bound(1.0, 0.0), InvalidArgument);
}

TEST_CASE("error report layout") {
  auto r = error_report("Linf", 0.5, 1.0, {{"l_P", 0.1}}, true);
  CHECK(r["schema_version"] == 1);
  CHECK(r["metric"] == "Linf");
  CHECK(r["pass"] == true);
  CHECK(r["params"]["l_P"] == 0.1);
}

TEST_CASE("simpson integrates polynomials of degree three exactly") {
  auto v = integrate_abs2([](double x) { return Complex(x, 1.0); }, 0, 3, 3);  // |f|^2 = x^2 + 1
  CHECK(v == doctest::Approx(12.0).epsilon(1e-14));
}
