#include "informon/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <nlohmann/json.hpp>

#include "informon/errors.hpp"

namespace informon::oracle {

using interp::Point;
using interp::WaveField;

void PacketSpec::validate() const {
  if (!(sigma0 > 0)) throw InvalidArgument("packet sigma0 must be positive");
  if (!(mass > 0) || !(hbar > 0)) throw InvalidArgument("packet mass and hbar must be positive");
}

Complex exact_free_packet(const PacketSpec& spec, double x, double t) {
  const double s0 = spec.sigma0;
  const Complex spread(1.0, spec.hbar * t / (spec.mass * s0 * s0));
  const double v = spec.hbar * spec.k0 / spec.mass;
  const double u = x - spec.x0 - v * t;
  const Complex exponent = -u * u / (2 * s0 * s0 * spread) +
                           Complex(0, spec.k0 * (x - spec.x0) - spec.hbar * spec.k0 * spec.k0 * t / (2 * spec.mass)) +
                           Complex(0, spec.lagrangian_offset * t / spec.hbar);
  return std::pow(std::numbers::pi * s0 * s0, -0.25) / std::sqrt(spread) * std::exp(exponent);
}

Complex exact_free_packet(const PacketSpec& spec, const Point& z, int dim) {
  Complex v = exact_free_packet(spec, z.x[0], z.t);
  PacketSpec transverse = spec;
  transverse.lagrangian_offset = 0;  // the phase is global, apply once
  for (int a = 1; a < dim; ++a) v *= exact_free_packet(transverse, z.x[static_cast<std::size_t>(a)], z.t);
  return v;
}

double packet_band_limit(const PacketSpec& spec, double tail) { return std::abs(spec.k0) + tail / spec.sigma0; }

PacketSpec lattice_reference(PacketSpec spec, const dynamics::StrategyParams& params, double constant_potential) {
  spec.lagrangian_offset = params.mass / 2 + constant_potential;
  return spec;
}

std::size_t chain_path_count(const std::vector<std::vector<LatticeSite>>& generations) {
  std::size_t count = 1;
  for (const auto& g : generations) {
    if (!g.empty() && count > std::numeric_limits<std::size_t>::max() / g.size()) return std::numeric_limits<std::size_t>::max();
    count *= g.size();
  }
  return count;
}

namespace {

// steps[k][j * n_k + i]: propagator from generation k site i to generation k+1 site j.
std::vector<std::vector<Complex>> step_matrices(const std::vector<std::vector<LatticeSite>>& generations,
                                                const dynamics::StrategyParams& params) {
  std::vector<std::vector<Complex>> steps;
  for (std::size_t k = 0; k + 1 < generations.size(); ++k) {
    const auto& from = generations[k];
    const auto& to = generations[k + 1];
    std::vector<Complex> m(from.size() * to.size());
    for (std::size_t j = 0; j < to.size(); ++j)
      for (std::size_t i = 0; i < from.size(); ++i) m[j * from.size() + i] = dynamics::propagator(from[i], to[j], params);
    steps.push_back(std::move(m));
  }
  return steps;
}

void check_chain(std::span<const Complex> initial, const std::vector<std::vector<LatticeSite>>& generations) {
  if (generations.empty()) throw InvalidArgument("chain needs at least the initial generation");
  if (initial.size() != generations.front().size()) throw InvalidArgument("initial strengths do not match initial sites");
}

}  // namespace

std::vector<Complex> brute_force_chain(std::span<const Complex> initial,
                                       const std::vector<std::vector<LatticeSite>>& generations,
                                       const dynamics::StrategyParams& params, std::size_t cap) {
  check_chain(initial, generations);
  const std::size_t paths = chain_path_count(generations);
  if (paths > cap) throw CapExceeded("brute-force chain path count", cap);

  const auto steps = step_matrices(generations, params);
  const std::size_t m = steps.size();
  const auto& final_sites = generations.back();
  std::vector<Complex> out(final_sites.size());
  if (m == 0) {
    std::copy(initial.begin(), initial.end(), out.begin());
    return out;
  }

  // Walk every path backwards from the final site, carrying the running
  // product of propagators; each leaf adds product * Gamma(n^0).
  std::vector<std::size_t> choice(m + 1, 0);
  std::vector<Complex> product(m + 1);
  for (std::size_t f = 0; f < final_sites.size(); ++f) {
    Complex sum = 0;
    choice[m] = f;
    product[m] = 1.0;
    std::size_t level = m;  // next level to choose is level - 1
    choice[m - 1] = 0;
    while (true) {
      const std::size_t k = level - 1;
      const std::size_t width = generations[k].size();
      if (choice[k] == width) {
        if (level == m) break;
        ++level;
        ++choice[level - 1];
        continue;
      }
      product[k] = product[k + 1] * steps[k][choice[k + 1] * width + choice[k]];
      if (k == 0) {
        sum += product[0] * initial[choice[0]];
        ++choice[0];
      } else {
        --level;
        choice[level - 1] = 0;
      }
    }
    out[f] = sum;
  }
  return out;
}

std::vector<Complex> nested_sum_chain(std::span<const Complex> initial,
                                      const std::vector<std::vector<LatticeSite>>& generations,
                                      const dynamics::StrategyParams& params) {
  check_chain(initial, generations);
  const auto steps = step_matrices(generations, params);
  std::vector<Complex> gamma(initial.begin(), initial.end());
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const std::size_t width = generations[k].size();
    std::vector<Complex> next(generations[k + 1].size());
    for (std::size_t j = 0; j < next.size(); ++j)
      for (std::size_t i = 0; i < width; ++i) next[j] += steps[k][j * width + i] * gamma[i];
    gamma = std::move(next);
  }
  return gamma;
}

std::string to_string(Metric m) {
  switch (m) {
    case Metric::Linf: return "Linf";
    case Metric::L2: return "L2";
    case Metric::SchrodingerResidual: return "schrodinger_residual";
  }
  return "?";
}

Metric metric_from_string(const std::string& s) {
  if (s == "Linf") return Metric::Linf;
  if (s == "L2") return Metric::L2;
  if (s == "schrodinger_residual") return Metric::SchrodingerResidual;
  throw InvalidArgument("unknown discrepancy metric: " + s);
}

namespace {

double pointwise(const WaveField& field, const Reference& reference, const DiscrepancySpec& spec) {
  if (field.grid.empty()) throw InvalidArgument("discrepancy needs a non-empty grid");
  double worst = 0, sum2 = 0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double d = std::abs(field.values[i] - reference(field.grid[i]));
    worst = std::max(worst, d);
    sum2 += d * d;
  }
  return spec.metric == Metric::Linf ? worst : std::sqrt(sum2 / static_cast<double>(field.size()));
}

}  // namespace

double discrepancy(const WaveField& field, const Reference& reference, const DiscrepancySpec& spec) {
  if (spec.metric == Metric::SchrodingerResidual)
    throw InvalidArgument("the Schrodinger residual needs at least 3 stored generations");
  return pointwise(field, reference, spec);
}

double discrepancy(std::span<const WaveField> history, const Reference& reference, const DiscrepancySpec& spec) {
  if (history.empty()) throw InvalidArgument("discrepancy needs a non-empty history");
  if (spec.metric != Metric::SchrodingerResidual) return pointwise(history.back(), reference, spec);
  if (history.size() < 3) throw InvalidArgument("the Schrodinger residual needs at least 3 stored generations");

  const auto& before = history[history.size() - 3];
  const auto& now = history[history.size() - 2];
  const auto& after = history.back();
  if (now.spacing.dim != 1) throw InvalidArgument("the Schrodinger residual is implemented for 1D fields");
  const std::size_t n = now.size();
  if (n < 3 || before.size() != n || after.size() != n) throw InvalidArgument("residual fields must share a grid of >= 3 points");

  const double dt = after.grid[0].t - before.grid[0].t;
  const double h = now.grid[1].x[0] - now.grid[0].x[0];
  if (!(dt > 0) || !(h > 0)) throw InvalidArgument("residual needs increasing times and an ascending uniform grid");
  const Complex i_hbar(0, spec.hbar);
  double worst = 0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const Complex dt_phi = (after.values[k] - before.values[k]) / dt;
    const Complex lap = (now.values[k + 1] - 2.0 * now.values[k] + now.values[k - 1]) / (h * h);
    const double u = spec.potential ? spec.potential(now.grid[k]) : 0.0;
    const Complex r = i_hbar * dt_phi - (-spec.hbar * spec.hbar / (2 * spec.mass) * lap + u * now.values[k]);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

double butzer_envelope(double l_P) {
  if (!(l_P > 0) || !(l_P < 1)) throw InvalidArgument("Butzer envelope needs 0 < l_P < 1");
  return -l_P * std::log(l_P);
}

long butzer_truncation(double W, double gamma) {
  if (!(gamma > 0) || gamma > 1) throw InvalidArgument("Butzer gamma must lie in (0, 1]");
  if (!(W >= 0)) throw InvalidArgument("Butzer W must be >= 0");
  return 2 * static_cast<long>(std::floor(std::pow(W, 1 + 1 / gamma) + 1)) + 1;
}

double butzer_constant(const ButzerParams& p) {
  if (!(p.gamma > 0) || p.gamma > 1) throw InvalidArgument("Butzer gamma must lie in (0, 1]");
  if (p.epsilon < 0 || p.delta < 0 || p.psi_sup < 0 || p.dpsi_sup < 0 || p.M < 0)
    throw InvalidArgument("Butzer parameters must be non-negative");
  if (!(p.l_P > 0)) throw InvalidArgument("Butzer l_P must be positive");
  if (p.W && p.r && *p.r != butzer_truncation(*p.W, p.gamma))
    throw InvalidArgument("truncation number r is inconsistent with W and gamma");
  const double pi = std::numbers::pi, e = std::numbers::e, sqrt5 = std::sqrt(5.0);
  const double inner = (14 / pi + p.delta / p.l_P + 7 / (3 * sqrt5 * pi)) * p.dpsi_sup + p.epsilon / p.l_P;
  return (1 + 1 / p.gamma) * (sqrt5 * e * inner + 6 * e * (p.M + p.psi_sup));
}

double butzer_bound(const ButzerParams& p) { return butzer_constant(p) * butzer_envelope(p.l_P); }

double yao_thomas_bound(double psi_max, double c) {
  if (psi_max < 0) throw InvalidArgument("max |Psi| must be non-negative");
  if (c == 0) throw InvalidArgument("|c| must be non-zero");
  const double two_pi_c = 2 * std::numbers::pi * std::abs(c);
  return 8 * psi_max / (two_pi_c * two_pi_c * two_pi_c);
}

double error_bound(BoundKind kind, const BoundParams& p) {
  return kind == BoundKind::Butzer ? butzer_bound(p.butzer) : yao_thomas_bound(p.psi_max, p.c);
}

double integrate_abs2(const std::function<Complex(double)>& f, double lo, double hi, std::size_t intervals) {
  if (intervals < 2) intervals = 2;
  if (intervals % 2) ++intervals;
  const double h = (hi - lo) / static_cast<double>(intervals);
  double sum = std::norm(f(lo)) + std::norm(f(hi));
  for (std::size_t i = 1; i < intervals; ++i) sum += (i % 2 ? 4.0 : 2.0) * std::norm(f(lo + h * static_cast<double>(i)));
  return sum * h / 3;
}

nlohmann::json error_report(const std::string& metric, double value, double bound, const nlohmann::json& params,
                            bool pass) {
  return {{"schema_version", 1}, {"metric", metric}, {"value", value}, {"bound", bound}, {"params", params}, {"pass", pass}};
}

}  // namespace informon::oracle
