#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dimshape/trajectory.hpp"

namespace dimshape {

enum class FractalKind { line, circle, square_uniform, sierpinski, koch, lorenz };

std::string to_string(FractalKind kind);
FractalKind parse_fractal(std::string_view name);

struct LorenzParams {
  double sigma = 10.0;
  double rho = 28.0;
  double beta = 8.0 / 3.0;
  double dt = 0.01;
  std::size_t burn_in = 1000;
};

struct FractalSpec {
  FractalKind kind = FractalKind::sierpinski;
  std::size_t n_points = 10000;
  std::uint64_t seed = 0;
  // Koch curve recursion depth; the point count is 4^level + 1.
  int koch_level = 7;
  std::size_t chaos_discard = 100;
  LorenzParams lorenz;
};

/// Box-counting dimension of the set sampled by each generator.
double reference_dimension(FractalKind kind);

std::vector<StateVector> generate(const FractalSpec& spec);

/// Chaos-game triangle vertices used by the sierpinski generator.
std::vector<StateVector> sierpinski_vertices();

}  // namespace dimshape
