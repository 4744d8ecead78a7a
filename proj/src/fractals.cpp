#include "dimshape/fractals.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace dimshape {

std::string to_string(FractalKind kind) {
  switch (kind) {
    case FractalKind::line: return "line";
    case FractalKind::circle: return "circle";
    case FractalKind::square_uniform: return "square_uniform";
    case FractalKind::sierpinski: return "sierpinski";
    case FractalKind::koch: return "koch";
    case FractalKind::lorenz: return "lorenz";
  }
  return "unknown";
}

FractalKind parse_fractal(std::string_view name) {
  for (auto kind : {FractalKind::line, FractalKind::circle, FractalKind::square_uniform,
                    FractalKind::sierpinski, FractalKind::koch, FractalKind::lorenz})
    if (to_string(kind) == name) return kind;
  if (name == "square") return FractalKind::square_uniform;
  throw std::invalid_argument("unknown fractal '" + std::string(name) + "'");
}

double reference_dimension(FractalKind kind) {
  switch (kind) {
    case FractalKind::line:
    case FractalKind::circle: return 1.0;
    case FractalKind::square_uniform: return 2.0;
    case FractalKind::sierpinski: return std::log(3.0) / std::log(2.0);
    case FractalKind::koch: return std::log(4.0) / std::log(3.0);
    case FractalKind::lorenz: return 2.06;
  }
  return 0.0;
}

std::vector<StateVector> sierpinski_vertices() {
  return {{0.0, 0.0}, {1.0, 0.0}, {0.5, std::sqrt(3.0) / 2.0}};
}

namespace {

std::vector<StateVector> koch(int level) {
  if (level < 0 || level > 12) throw std::invalid_argument("koch level must lie in [0, 12]");
  std::vector<std::array<double, 2>> pts{{0.0, 0.0}, {1.0, 0.0}};
  const double h = std::sqrt(3.0) / 2.0;
  for (int l = 0; l < level; ++l) {
    std::vector<std::array<double, 2>> next;
    next.reserve(4 * (pts.size() - 1) + 1);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const auto [ax, ay] = pts[i];
      const auto [bx, by] = pts[i + 1];
      const double dx = (bx - ax) / 3.0, dy = (by - ay) / 3.0;
      const std::array<double, 2> p1{ax + dx, ay + dy};
      const std::array<double, 2> p3{ax + 2 * dx, ay + 2 * dy};
      // Middle third rotated by +60 degrees gives the bump's apex.
      const std::array<double, 2> p2{p1[0] + 0.5 * dx - h * dy, p1[1] + h * dx + 0.5 * dy};
      next.push_back(pts[i]);
      next.push_back(p1);
      next.push_back(p2);
      next.push_back(p3);
    }
    next.push_back(pts.back());
    pts = std::move(next);
  }
  std::vector<StateVector> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back({p[0], p[1]});
  return out;
}

std::array<double, 3> lorenz_rhs(const std::array<double, 3>& v, const LorenzParams& p) {
  return {p.sigma * (v[1] - v[0]), v[0] * (p.rho - v[2]) - v[1], v[0] * v[1] - p.beta * v[2]};
}

std::array<double, 3> rk4(const std::array<double, 3>& v, const LorenzParams& p) {
  auto axpy = [](const std::array<double, 3>& a, const std::array<double, 3>& b, double h) {
    return std::array<double, 3>{a[0] + h * b[0], a[1] + h * b[1], a[2] + h * b[2]};
  };
  const auto k1 = lorenz_rhs(v, p);
  const auto k2 = lorenz_rhs(axpy(v, k1, p.dt / 2), p);
  const auto k3 = lorenz_rhs(axpy(v, k2, p.dt / 2), p);
  const auto k4 = lorenz_rhs(axpy(v, k3, p.dt), p);
  std::array<double, 3> out;
  for (int i = 0; i < 3; ++i) out[i] = v[i] + p.dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return out;
}

}  // namespace

std::vector<StateVector> generate(const FractalSpec& spec) {
  const std::size_t n = spec.n_points;
  if (n == 0 && spec.kind != FractalKind::koch)
    throw std::invalid_argument("fractal needs at least one point");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<StateVector> out;
  out.reserve(n);

  switch (spec.kind) {
    case FractalKind::line:
      for (std::size_t i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        out.push_back({t, 0.5 * t});
      }
      break;
    case FractalKind::circle:
      for (std::size_t i = 0; i < n; ++i) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        out.push_back({std::cos(a), std::sin(a)});
      }
      break;
    case FractalKind::square_uniform:
      for (std::size_t i = 0; i < n; ++i) {
        const double x = unit(rng);
        out.push_back({x, unit(rng)});
      }
      break;
    case FractalKind::sierpinski: {
      const auto v = sierpinski_vertices();
      std::uniform_int_distribution<int> pick(0, 2);
      double x = unit(rng), y = unit(rng) * x * std::sqrt(3.0) / 2.0;
      for (std::size_t i = 0; i < n + spec.chaos_discard; ++i) {
        const auto& target = v[static_cast<std::size_t>(pick(rng))];
        x = 0.5 * (x + target[0]);
        y = 0.5 * (y + target[1]);
        if (i >= spec.chaos_discard) out.push_back({x, y});
      }
      break;
    }
    case FractalKind::koch:
      return koch(spec.koch_level);
    case FractalKind::lorenz: {
      std::array<double, 3> v{1.0 + 1e-3 * unit(rng), 1.0 + 1e-3 * unit(rng), 1.0 + 1e-3 * unit(rng)};
      for (std::size_t i = 0; i < spec.lorenz.burn_in; ++i) v = rk4(v, spec.lorenz);
      for (std::size_t i = 0; i < n; ++i) {
        out.push_back({v[0], v[1], v[2]});
        v = rk4(v, spec.lorenz);
      }
      break;
    }
  }
  return out;
}

}  // namespace dimshape
