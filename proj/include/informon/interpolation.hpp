#pragma once

// Sinc-kernel interpretations of tapestries on the embedding manifold.

#include <array>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "informon/core.hpp"

namespace informon::interp {

/// A point (t, x, y, z); only the first `dim` spatial axes are used.
struct Point {
  double t = 0.0;
  std::array<double, 3> x{};
};

/// Sampled global interpretation on an evaluation grid.
struct WaveField {
  std::vector<Point> grid;
  std::vector<Complex> values;
  Spacing spacing;

  std::size_t size() const noexcept { return values.size(); }
};

/// sin(pi u) / (pi u), exact at integers and series-evaluated near zero.
double sinc_pi(double u);

/// Product of sinc(pi (z_axis - site_axis) / spacing) over the time axis and
/// the site's spatial axes.
double sinc_kernel(const LatticeSite& site, const Point& z, const Spacing& spacing);

Point embedding(const LatticeSite& site, const Spacing& spacing);

/// Uniform 1D-3D grid on the slice t = time: `per_axis` points per axis in
/// [lo, hi] (inclusive).
std::vector<Point> uniform_grid(int dim, double time, double lo, double hi, std::size_t per_axis);
/// Embedding points of `sites`.
std::vector<Point> site_grid(std::span<const LatticeSite> sites, const Spacing& spacing);

/// Phi(z) = sum_n Gamma_n * sinc_kernel(n, z).
WaveField global_field(const CausalTapestry& tapestry, std::span<const Point> grid, const Spacing& spacing);
/// As global_field, summing only the share of subprocess `tag` (falls back
/// to whole strengths of informons tagged `tag` when no split is recorded).
WaveField partial_field(const CausalTapestry& tapestry, const std::string& tag, std::span<const Point> grid,
                        const Spacing& spacing);

/// Truncated cardinal series at z from samples on a uniform lattice.
Complex parzen_reconstruct(std::span<const Complex> samples, std::span<const LatticeSite> sites, const Point& z,
                           const Spacing& spacing);

/// ||P||^2 = sum l_P^dim |Gamma|^2.
double process_strength(const CausalTapestry& tapestry, const Spacing& spacing);

/// Largest |Gamma| among informons on the faces of `box`, a proxy for the
/// cardinal-series truncation error.
double boundary_magnitude(const CausalTapestry& tapestry, const LatticeBox& box);

/// Throws InvalidArgument when `band_limit` reaches the lattice Nyquist rate.
void require_below_nyquist(double band_limit, const Spacing& spacing);

/// CSV with header t,x[,y,z],re,im,abs2.
void write_csv(std::ostream& os, const WaveField& field);

}  // namespace informon::interp
