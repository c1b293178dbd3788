#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "informon/dynamics.hpp"

namespace testing {

inline informon::dynamics::StrategyParams line_params(int extent, double spacing = 0.1) {
  informon::dynamics::StrategyParams p;
  p.spacing = {spacing, spacing, 1};
  p.box = informon::LatticeBox({extent});
  return p;
}

/// Random complex strengths with modulus below 1.
inline std::vector<informon::Complex> random_strengths(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  std::vector<informon::Complex> out(n);
  for (auto& z : out) z = {u(rng), u(rng)};
  return out;
}

}  // namespace testing
