#include "informon/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

#include "informon/errors.hpp"

namespace informon::interp {

double sinc_pi(double u) {
  if (std::abs(u) < 1e-6) {
    const double x = std::numbers::pi * u;
    return 1.0 - x * x / 6.0;
  }
  // sin(pi u) via reduction to r in [-1/2, 1/2] so integers give exact zeros.
  const double k = std::nearbyint(u);
  double r = u - k;
  // Lattice points reached through (n * spacing) / spacing land a few ulps
  // off the integer; treat them as exact nodes.
  if (std::abs(r) <= 8 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(u))) r = 0;
  const double s = std::sin(std::numbers::pi * r);
  const double signed_s = std::fmod(std::abs(k), 2.0) == 1.0 ? -s : s;
  return signed_s / (std::numbers::pi * u);
}

Point embedding(const LatticeSite& site, const Spacing& spacing) {
  Point p;
  p.t = site.generation * spacing.t_P;
  for (std::size_t a = 0; a < site.coords.size() && a < 3; ++a) p.x[a] = site.coords[a] * spacing.l_P;
  return p;
}

double sinc_kernel(const LatticeSite& site, const Point& z, const Spacing& spacing) {
  double k = sinc_pi(z.t / spacing.t_P - site.generation);
  for (std::size_t a = 0; a < site.coords.size() && a < 3; ++a) k *= sinc_pi(z.x[a] / spacing.l_P - site.coords[a]);
  return k;
}

std::vector<Point> uniform_grid(int dim, double time, double lo, double hi, std::size_t per_axis) {
  if (dim < 1 || dim > 3) throw InvalidArgument("grid dimension must be 1, 2 or 3");
  if (per_axis == 0) return {};
  const double step = per_axis > 1 ? (hi - lo) / static_cast<double>(per_axis - 1) : 0.0;
  std::size_t total = 1;
  for (int a = 0; a < dim; ++a) total *= per_axis;
  std::vector<Point> grid;
  grid.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    Point p;
    p.t = time;
    std::size_t rest = i;
    for (int a = dim - 1; a >= 0; --a) {
      p.x[static_cast<std::size_t>(a)] = lo + step * static_cast<double>(rest % per_axis);
      rest /= per_axis;
    }
    grid.push_back(p);
  }
  return grid;
}

std::vector<Point> site_grid(std::span<const LatticeSite> sites, const Spacing& spacing) {
  std::vector<Point> grid;
  grid.reserve(sites.size());
  for (const auto& s : sites) grid.push_back(embedding(s, spacing));
  return grid;
}

WaveField global_field(const CausalTapestry& tapestry, std::span<const Point> grid, const Spacing& spacing) {
  WaveField f{{grid.begin(), grid.end()}, std::vector<Complex>(grid.size()), spacing};
  const auto informons = tapestry.informons();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Complex sum = 0;
    for (const auto& inf : informons) {
      if (inf.strength == Complex{}) continue;
      sum += inf.strength * sinc_kernel(inf.site, grid[i], spacing);
    }
    f.values[i] = sum;
  }
  return f;
}

WaveField partial_field(const CausalTapestry& tapestry, const std::string& tag, std::span<const Point> grid,
                        const Spacing& spacing) {
  WaveField f{{grid.begin(), grid.end()}, std::vector<Complex>(grid.size()), spacing};
  std::vector<std::pair<const Informon*, Complex>> shares;
  for (const auto& inf : tapestry.informons()) {
    if (inf.props.contributions.empty()) {
      if (inf.props.subprocess == tag) shares.emplace_back(&inf, inf.strength);
      continue;
    }
    for (const auto& [t, g] : inf.props.contributions)
      if (t == tag) shares.emplace_back(&inf, g);
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Complex sum = 0;
    for (const auto& [inf, g] : shares) sum += g * sinc_kernel(inf->site, grid[i], spacing);
    f.values[i] = sum;
  }
  return f;
}

Complex parzen_reconstruct(std::span<const Complex> samples, std::span<const LatticeSite> sites, const Point& z,
                           const Spacing& spacing) {
  if (samples.size() != sites.size()) throw InvalidArgument("parzen_reconstruct: samples and sites differ in length");
  Complex sum = 0;
  for (std::size_t i = 0; i < sites.size(); ++i) sum += samples[i] * sinc_kernel(sites[i], z, spacing);
  return sum;
}

double process_strength(const CausalTapestry& tapestry, const Spacing& spacing) {
  double sum = 0;
  for (const auto& inf : tapestry.informons()) sum += std::norm(inf.strength);
  return sum * std::pow(spacing.l_P, spacing.dim);
}

double boundary_magnitude(const CausalTapestry& tapestry, const LatticeBox& box) {
  double worst = 0;
  for (const auto& inf : tapestry.informons()) {
    bool face = false;
    for (std::size_t a = 0; a < inf.site.coords.size() && a < static_cast<std::size_t>(box.dim()); ++a)
      face = face || inf.site.coords[a] == box.lower(a) || inf.site.coords[a] == box.upper(a);
    if (face) worst = std::max(worst, std::abs(inf.strength));
  }
  return worst;
}

void require_below_nyquist(double band_limit, const Spacing& spacing) {
  const double nyquist = std::numbers::pi / spacing.l_P;
  if (!(band_limit < nyquist)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "initial state band limit %.6g is not below the lattice Nyquist rate %.6g", band_limit,
                  nyquist);
    throw InvalidArgument(buf);
  }
}

void write_csv(std::ostream& os, const WaveField& field) {
  static constexpr const char* axes[] = {"x", "y", "z"};
  const int dim = field.spacing.dim;
  os << 't';
  for (int a = 0; a < dim; ++a) os << ',' << axes[a];
  os << ",re,im,abs2\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  };
  for (std::size_t i = 0; i < field.size(); ++i) {
    put(field.grid[i].t);
    for (int a = 0; a < dim; ++a) {
      os << ',';
      put(field.grid[i].x[static_cast<std::size_t>(a)]);
    }
    os << ',';
    put(field.values[i].real());
    os << ',';
    put(field.values[i].imag());
    os << ',';
    put(std::norm(field.values[i]));
    os << '\n';
  }
}

}  // namespace informon::interp
