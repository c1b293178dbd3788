#pragma once

// Reference solutions and error machinery used to judge the lattice dynamics.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "informon/core.hpp"
#include "informon/dynamics.hpp"
#include "informon/interpolation.hpp"

namespace informon::oracle {

struct PacketSpec {
  double sigma0 = 1.0;
  double x0 = 0.0;
  double k0 = 0.0;
  double mass = 1.0;
  double hbar = 1.0;
  /// Constant added to the Lagrangian; contributes the phase exp(i c t / hbar).
  double lagrangian_offset = 0.0;

  void validate() const;
};

/// Closed-form free Gaussian packet, normalised to 1 on the line.
Complex exact_free_packet(const PacketSpec& spec, double x, double t);
/// Separable product of the 1D packet over the first `dim` axes, at time z.t.
Complex exact_free_packet(const PacketSpec& spec, const interp::Point& z, int dim);

/// Spectral radius holding all but exp(-tail^2 / 2) of the packet's spectrum.
double packet_band_limit(const PacketSpec& spec, double tail = 8.0);

/// The packet the lattice evolution should track: the lattice Lagrangian
/// carries the constant m/2 (from d^2 = t_P^2 + ...) plus any constant V0.
PacketSpec lattice_reference(PacketSpec spec, const dynamics::StrategyParams& params, double constant_potential = 0.0);

/// Exact nested sum over every inter-generation path:
///   Gamma'(f) = sum_{n^{m-1}} ... sum_{n^0} P(f, n^{m-1}) ... P(n^1, n^0) Gamma(n^0).
/// generations[0] holds the sites of `initial`; the result is indexed like
/// generations.back(). Throws CapExceeded when the path count passes `cap`.
std::vector<Complex> brute_force_chain(std::span<const Complex> initial,
                                       const std::vector<std::vector<LatticeSite>>& generations,
                                       const dynamics::StrategyParams& params, std::size_t cap = 10'000'000);

/// The same nested sum evaluated innermost first (one dense propagator
/// matrix per step). Used for instances beyond the enumeration cap.
std::vector<Complex> nested_sum_chain(std::span<const Complex> initial,
                                      const std::vector<std::vector<LatticeSite>>& generations,
                                      const dynamics::StrategyParams& params);

std::size_t chain_path_count(const std::vector<std::vector<LatticeSite>>& generations);

enum class Metric { Linf, L2, SchrodingerResidual };

std::string to_string(Metric m);
Metric metric_from_string(const std::string& s);

struct DiscrepancySpec {
  Metric metric = Metric::Linf;
  double tolerance = 1e-6;  // delta
  /// Hamiltonian potential U for the residual iħ∂tΦ - (-ħ²/2m ∂x² + U)Φ.
  std::function<double(const interp::Point&)> potential;
  double mass = 1.0;
  double hbar = 1.0;
};

using Reference = std::function<Complex(const interp::Point&)>;

/// Linf or root-mean-square difference on the field's grid. The residual metric needs
/// a history; use the span overload.
double discrepancy(const interp::WaveField& field, const Reference& reference, const DiscrepancySpec& spec);

/// As above on history.back(); the residual metric uses the last three
/// stored generations (second-order centred differences in t and x, 1D only)
/// and ignores `reference`.
double discrepancy(std::span<const interp::WaveField> history, const Reference& reference,
                   const DiscrepancySpec& spec);

struct ButzerParams {
  double gamma = 1.0;   // decay exponent in |Psi| <= M |t|^-gamma
  double epsilon = 0.0; // kernel-integral accuracy
  double delta = 0.0;   // embedding jitter
  double l_P = 0.1;
  double psi_sup = 0.0;   // ||Psi||_inf
  double dpsi_sup = 0.0;  // ||Psi'||_inf
  double M = 0.0;
  std::optional<double> W;
  std::optional<long> r;
};

/// -l_P ln l_P.
double butzer_envelope(double l_P);
/// The constant K(Psi, gamma, epsilon/l_P, delta/l_P).
double butzer_constant(const ButzerParams& p);
/// r = 2 [W^(1 + 1/gamma) + 1] + 1.
long butzer_truncation(double W, double gamma);
double butzer_bound(const ButzerParams& p);

double yao_thomas_bound(double psi_max, double c);

enum class BoundKind { Butzer, YaoThomas };

struct BoundParams {
  ButzerParams butzer;
  double psi_max = 1.0;
  double c = 299792458.0;
};

double error_bound(BoundKind kind, const BoundParams& p);

/// Composite Simpson rule of |f|^2 on [lo, hi].
double integrate_abs2(const std::function<Complex(double)>& f, double lo, double hi, std::size_t intervals);

/// {schema_version, metric, value, bound, params, pass}.
nlohmann::json error_report(const std::string& metric, double value, double bound, const nlohmann::json& params,
                            bool pass);

}  // namespace informon::oracle
