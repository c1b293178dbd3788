#pragma once

// Informons, lattice geometry and causal tapestries.

#include <compare>
#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace informon {

using Complex = std::complex<double>;

/// Lattice spacings shared by the dynamics and the interpolation layer.
struct Spacing {
  double t_P = 0.1;
  double l_P = 0.1;
  int dim = 1;
};

struct LatticeSite {
  int generation = 0;
  std::vector<int> coords;

  auto operator<=>(const LatticeSite&) const = default;
  bool operator==(const LatticeSite&) const = default;

  int dim() const noexcept { return static_cast<int>(coords.size()); }
  /// Embedding point (generation*t_P, coords*l_P); spatial part padded to 3.
  double time(const Spacing& s) const noexcept { return generation * s.t_P; }
  double position(std::size_t axis, const Spacing& s) const { return coords.at(axis) * s.l_P; }
  std::string to_string() const;
};

enum class Boundary { Absorbing, Periodic };

/// Finite box of spatial coordinates. Centered convention: an extent e covers
/// coords -(e-1)/2 ... -(e-1)/2 + e - 1 on each axis.
class LatticeBox {
 public:
  LatticeBox() = default;
  LatticeBox(std::vector<int> extent, Boundary boundary = Boundary::Absorbing);

  int dim() const noexcept { return static_cast<int>(extent_.size()); }
  const std::vector<int>& extent() const noexcept { return extent_; }
  Boundary boundary() const noexcept { return boundary_; }
  int lower(std::size_t axis) const { return -((extent_.at(axis) - 1) / 2); }
  int upper(std::size_t axis) const { return lower(axis) + extent_.at(axis) - 1; }

  bool contains(std::span<const int> coords) const;
  /// Spatial displacement b - a, using the minimum image when periodic.
  std::vector<int> displacement(std::span<const int> a, std::span<const int> b) const;
  std::vector<LatticeSite> sites(int generation) const;
  std::size_t size() const;

 private:
  std::vector<int> extent_;
  Boundary boundary_ = Boundary::Absorbing;
};

std::vector<LatticeSite> make_lattice(int dim, std::span<const int> extent, int generation);

/// Box of half-width `half_width` (in length units) on every axis.
LatticeBox box_for_half_width(int dim, double half_width, double l_P, Boundary boundary = Boundary::Absorbing);

struct Properties {
  double potential = 0.0;   // V(n)
  std::string subprocess;   // generating subprocess tag
  std::string character = "scalar";
  std::string state;
  // Per-subprocess share of the strength when free couplings merge tokens.
  std::vector<std::pair<std::string, Complex>> contributions;

  bool operator==(const Properties&) const = default;
};

/// Ancestors of an informon plus causal-order edges (i precedes j) among them.
struct ContentSet {
  std::vector<std::string> ancestors;
  std::vector<int> ancestor_generations;
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  bool empty() const noexcept { return ancestors.empty(); }
  bool operator==(const ContentSet&) const = default;
};

struct Informon {
  std::string label;
  LatticeSite site;
  Complex strength{};
  Properties props;
  ContentSet content;
};

/// Default composite label: generation, coordinates and subprocess tag.
std::string make_label(const LatticeSite& site, const std::string& tag);

/// One generation of informons. Mutable until sealed.
class CausalTapestry {
 public:
  explicit CausalTapestry(int generation = 0) : generation_(generation) {}

  int generation() const noexcept { return generation_; }
  bool sealed() const noexcept { return sealed_; }
  std::size_t size() const noexcept { return informons_.size(); }
  bool empty() const noexcept { return informons_.empty(); }
  std::span<const Informon> informons() const noexcept { return informons_; }
  const Informon& operator[](std::size_t i) const { return informons_.at(i); }

  void insert(Informon informon);
  void seal() noexcept { sealed_ = true; }
  const Informon* find(const std::string& label) const;
  /// Informons at `coords` carrying `tag` (any tag when empty).
  const Informon* find_at(std::span<const int> coords, const std::string& tag = {}) const;

  std::vector<Complex> strengths() const;

 private:
  int generation_;
  bool sealed_ = false;
  std::vector<Informon> informons_;
  std::map<std::string, std::size_t> by_label_;
  std::map<std::pair<std::string, std::vector<int>>, std::size_t> by_tag_site_;
};

CausalTapestry insert_informon(CausalTapestry tapestry, Informon informon);

struct ValidationReport {
  bool antichain = true;
  bool acyclic = true;
  bool ancestors_precede = true;
  std::vector<std::string> problems;

  bool passed() const noexcept { return antichain && acyclic && ancestors_precede; }
};

ValidationReport validate_tapestry(const CausalTapestry& tapestry);

nlohmann::json to_json(const CausalTapestry& tapestry);
CausalTapestry tapestry_from_json(const nlohmann::json& j, int generation, bool seal = true);

}  // namespace informon
