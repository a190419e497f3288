#pragma once

#include <array>
#include <cstdint>

#include "dwt/grid.hpp"
#include "dwt/image.hpp"

namespace dwt {

/// Every numeric knob of the thickness pipeline.
struct SolverConfig {
  /// Convergence threshold on the max per-sweep potential change, as a
  /// fraction of (psi_inner - psi_outer).
  double tolerance = 1e-11;
  int max_iterations = 20000;
  /// SOR relaxation factor, open interval (0, 2).
  double omega = 1.9;
  /// Euler step length in pixels.
  double step = 0.1;
  int max_steps = 100000;
  /// Gradients below this magnitude (normalized potential per pixel) leave
  /// the tangent undefined.
  double grad_epsilon = 1e-8;
  /// Nearest splatted pixels used to fill an unassigned pixel.
  int fill_k = 8;
  /// Penalty on normalized potential mismatch in the fill weights.
  double fill_lambda = 10.0;
  /// Potential of the inner contour; the outer contour is held at 0.
  double psi_inner = 1.0;
  std::uint64_t seed = 0;

  /// Throws DomainError naming the offending field.
  void validate() const;
};

/// Role of every pixel in the potential problem.
enum class Node : std::uint8_t {
  free,          ///< wall pixel, solved unknown
  pinned_inner,  ///< wall pixel held at psi_inner (manual boundaries)
  pinned_outer,  ///< wall pixel held at psi_outer (manual boundaries)
  cavity,        ///< ghost read as psi_inner
  exterior,      ///< ghost read as psi_outer
  excluded,      ///< not part of the stencil (zero-flux)
};

constexpr bool is_wall_node(Node n) {
  return n == Node::free || n == Node::pinned_inner || n == Node::pinned_outer;
}
constexpr bool carries_value(Node n) { return n != Node::excluded; }

/// Converged potential. Values are stored normalized to [0, 1]; psi() maps
/// them onto [psi_outer, psi_inner].
struct PotentialField {
  Image<double> unit;
  Image<Node> nodes;
  double psi_inner = 1.0;
  double psi_outer = 0.0;
  int iterations_used = 0;
  /// Max absolute psi change during the last sweep.
  double final_delta = 0.0;
  bool converged = false;
  /// True when cavity/exterior ghosts carry the boundary values, false for
  /// pinned (manual) boundaries.
  bool ghost_mode = true;

  const GridGeometry& geometry() const { return unit.geometry(); }
  bool is_wall(int x, int y) const { return is_wall_node(nodes(x, y)); }
  double psi(int x, int y) const { return psi_outer + unit(x, y) * (psi_inner - psi_outer); }
  /// Psi on wall and ghost pixels, 0 on excluded pixels.
  Image<float> psi_image() const;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Unit vectors along grad(psi), i.e. pointing towards increasing potential.
struct TangentField {
  Image<Vec2> vectors;
  Image<std::uint8_t> defined;

  const GridGeometry& geometry() const { return vectors.geometry(); }
};

/// Red-black SOR on the 5-point stencil with cavity/exterior ghost values.
/// Neighbors outside the image are dropped from the stencil.
PotentialField solve_laplace(const RegionLabels& regions, const BoundaryConditions& bc,
                             const SolverConfig& cfg);

/// Same solver with user-labeled wall pixels pinned to psi_inner/psi_outer
/// and zero flux across every other wall edge.
PotentialField solve_laplace_pinned(const BinaryMask& mask, const Image<BoundaryLabel>& boundaries,
                                    const SolverConfig& cfg);

/// Max |4 psi - sum of 4 neighbors| over wall pixels whose 4 neighbors are
/// all wall; 0 when no such pixel exists.
double residual(const PotentialField& field, const RegionLabels& regions);

TangentField tangent_field(const PotentialField& field, const SolverConfig& cfg);

}  // namespace dwt
