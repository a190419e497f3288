#include "dwt/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace dwt {

namespace {

constexpr std::uint32_t kNoNeighbor = std::numeric_limits<std::uint32_t>::max();

// Stencil of one free pixel: neighbors in (left, right, up, down) order.
struct StencilRow {
  std::uint32_t center;
  std::array<std::uint32_t, 4> neighbor;
  double inv_count;
};

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorKind::Domain, std::string(name) + " must be positive and finite");
  }
}

void run_sor(PotentialField& field, const SolverConfig& cfg) {
  const GridGeometry& g = field.geometry();
  std::array<std::vector<StencilRow>, 2> colors;
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      if (field.nodes(x, y) != Node::free) continue;
      StencilRow row{static_cast<std::uint32_t>(g.index(x, y)), {}, 0.0};
      const int offsets[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
      int count = 0;
      for (int k = 0; k < 4; ++k) {
        const int nx = x + offsets[k][0];
        const int ny = y + offsets[k][1];
        if (g.contains(nx, ny) && carries_value(field.nodes(nx, ny))) {
          row.neighbor[k] = static_cast<std::uint32_t>(g.index(nx, ny));
          ++count;
        } else {
          row.neighbor[k] = kNoNeighbor;
        }
      }
      // Floating pixel with no neighbors keeps its initial value.
      if (count == 0) continue;
      row.inv_count = 1.0 / count;
      colors[static_cast<std::size_t>((x + y) & 1)].push_back(row);
    }
  }

  const double omega = cfg.omega;
  const double tol = cfg.tolerance;
  std::span<double> u = field.unit.pixels();
  const auto pair_sum = [&u](std::uint32_t a, std::uint32_t b) {
    if (a == kNoNeighbor) return b == kNoNeighbor ? 0.0 : u[b];
    if (b == kNoNeighbor) return u[a];
    return u[a] + u[b];
  };

  double delta = 0.0;
  int iter = 0;
  bool converged = false;
  while (iter < cfg.max_iterations) {
    ++iter;
    delta = 0.0;
    for (const auto& color : colors) {
      for (const StencilRow& row : color) {
        // Horizontal and vertical pairs summed separately keeps the stencil
        // symmetric under transposition.
        const double sum =
            pair_sum(row.neighbor[0], row.neighbor[1]) + pair_sum(row.neighbor[2], row.neighbor[3]);
        const double old = u[row.center];
        const double change = omega * (sum * row.inv_count - old);
        u[row.center] = old + change;
        delta = std::max(delta, std::abs(change));
      }
    }
    if (delta <= tol) {
      converged = true;
      break;
    }
  }
  field.iterations_used = iter;
  field.final_delta = delta * (field.psi_inner - field.psi_outer);
  field.converged = converged;
}

}  // namespace

void SolverConfig::validate() const {
  require_positive(tolerance, "tolerance");
  if (max_iterations < 1) throw Error(ErrorKind::Domain, "max_iterations must be >= 1");
  if (!(omega > 0.0 && omega < 2.0)) {
    throw Error(ErrorKind::Domain, "omega must lie in the open interval (0, 2)");
  }
  require_positive(step, "step");
  if (max_steps < 1) throw Error(ErrorKind::Domain, "max_steps must be >= 1");
  require_positive(grad_epsilon, "grad_epsilon");
  if (fill_k < 1) throw Error(ErrorKind::Domain, "fill_k must be >= 1");
  require_positive(fill_lambda, "fill_lambda");
  require_positive(psi_inner, "psi_inner");
}

Image<float> PotentialField::psi_image() const {
  Image<float> out(geometry(), 0.0f);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      if (carries_value(nodes(x, y))) out(x, y) = static_cast<float>(psi(x, y));
    }
  }
  return out;
}

PotentialField solve_laplace(const RegionLabels& regions, const BoundaryConditions& bc,
                             const SolverConfig& cfg) {
  cfg.validate();
  if (!(bc.psi_inner > bc.psi_outer)) {
    throw Error(ErrorKind::Domain, "psi_inner must exceed psi_outer");
  }
  const GridGeometry& g = regions.geometry();
  PotentialField field;
  field.unit = Image<double>(g, 0.0);
  field.nodes = Image<Node>(g, Node::excluded);
  field.psi_inner = bc.psi_inner;
  field.psi_outer = bc.psi_outer;
  field.ghost_mode = true;

  std::size_t wall = 0;
  for (std::size_t i = 0; i < g.pixel_count(); ++i) {
    switch (regions.labels[i]) {
      case Region::wall:
        field.nodes[i] = Node::free;
        field.unit[i] = 0.5;
        ++wall;
        break;
      case Region::cavity:
        field.nodes[i] = Node::cavity;
        field.unit[i] = 1.0;
        break;
      case Region::exterior:
        field.nodes[i] = Node::exterior;
        field.unit[i] = 0.0;
        break;
    }
  }
  if (wall == 0) throw Error(ErrorKind::Domain, "wall region is empty");
  run_sor(field, cfg);
  return field;
}

PotentialField solve_laplace_pinned(const BinaryMask& mask, const Image<BoundaryLabel>& boundaries,
                                    const SolverConfig& cfg) {
  cfg.validate();
  const GridGeometry& g = mask.geometry();
  if (boundaries.width() != g.width || boundaries.height() != g.height) {
    throw Error(ErrorKind::BoundarySpec, "boundary label image size differs from the mask");
  }
  PotentialField field;
  field.unit = Image<double>(g, 0.0);
  field.nodes = Image<Node>(g, Node::excluded);
  field.psi_inner = cfg.psi_inner;
  field.psi_outer = 0.0;
  field.ghost_mode = false;

  std::size_t inner = 0;
  std::size_t outer = 0;
  for (std::size_t i = 0; i < g.pixel_count(); ++i) {
    const BoundaryLabel label = boundaries[i];
    if (!mask.is_wall(i)) {
      if (label != BoundaryLabel::none) {
        throw Error(ErrorKind::BoundarySpec,
                    "boundary label on background pixel " + std::to_string(i));
      }
      continue;
    }
    switch (label) {
      case BoundaryLabel::none:
        field.nodes[i] = Node::free;
        field.unit[i] = 0.5;
        break;
      case BoundaryLabel::inner:
        field.nodes[i] = Node::pinned_inner;
        field.unit[i] = 1.0;
        ++inner;
        break;
      case BoundaryLabel::outer:
        field.nodes[i] = Node::pinned_outer;
        field.unit[i] = 0.0;
        ++outer;
        break;
    }
  }
  if (inner == 0) throw Error(ErrorKind::BoundarySpec, "inner boundary set is empty");
  if (outer == 0) throw Error(ErrorKind::BoundarySpec, "outer boundary set is empty");
  run_sor(field, cfg);
  return field;
}

double residual(const PotentialField& field, const RegionLabels& regions) {
  const GridGeometry& g = field.geometry();
  double worst = 0.0;
  for (int y = 1; y + 1 < g.height; ++y) {
    for (int x = 1; x + 1 < g.width; ++x) {
      if (regions.labels(x, y) != Region::wall) continue;
      if (regions.labels(x - 1, y) != Region::wall || regions.labels(x + 1, y) != Region::wall ||
          regions.labels(x, y - 1) != Region::wall || regions.labels(x, y + 1) != Region::wall) {
        continue;
      }
      const double r = 4.0 * field.psi(x, y) - (field.psi(x - 1, y) + field.psi(x + 1, y)) -
                       (field.psi(x, y - 1) + field.psi(x, y + 1));
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

TangentField tangent_field(const PotentialField& field, const SolverConfig& cfg) {
  const GridGeometry& g = field.geometry();
  TangentField tf{Image<Vec2>(g), Image<std::uint8_t>(g, 0)};
  const auto available = [&](int x, int y) {
    return g.contains(x, y) && carries_value(field.nodes(x, y));
  };
  // Central difference, one-sided where a neighbor is unavailable.
  const auto derivative = [&](int x, int y, int dx, int dy) {
    const bool lo = available(x - dx, y - dy);
    const bool hi = available(x + dx, y + dy);
    if (lo && hi) return (field.unit(x + dx, y + dy) - field.unit(x - dx, y - dy)) / 2.0;
    if (hi) return field.unit(x + dx, y + dy) - field.unit(x, y);
    if (lo) return field.unit(x, y) - field.unit(x - dx, y - dy);
    return 0.0;
  };
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      if (!field.is_wall(x, y)) continue;
      const double gx = derivative(x, y, 1, 0);
      const double gy = derivative(x, y, 0, 1);
      const double norm = std::sqrt(gx * gx + gy * gy);
      if (norm < cfg.grad_epsilon) continue;
      tf.vectors(x, y) = {gx / norm, gy / norm};
      tf.defined(x, y) = 1;
    }
  }
  return tf;
}

}  // namespace dwt
