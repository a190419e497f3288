#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dwt/grid.hpp"
#include "dwt/laplace.hpp"

namespace dwt {

/// Sub-pixel position; pixel (i, j) has its center at (i, j).
struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

enum class Termination : std::uint8_t { reached_outer, left_wall, max_steps, undefined_field };

const char* to_string(Termination t);

struct Streamline {
  std::vector<Point> points;
  /// Sum of segment lengths, in mm.
  double arc_length = 0.0;
  Termination terminated_by = Termination::undefined_field;
};

enum class Assignment : std::uint8_t { zero, interpolated, splatted };

/// Per-pixel thickness in mm; exactly 0 off the wall.
struct ThicknessMap {
  Image<double> thickness;
  Image<Assignment> assigned;

  ThicknessMap() = default;
  explicit ThicknessMap(const GridGeometry& g)
      : thickness(g, 0.0), assigned(g, Assignment::zero) {}

  const GridGeometry& geometry() const { return thickness.geometry(); }
  Image<float> to_float() const;
  /// 0 = zero, 128 = interpolated, 255 = splatted.
  Image<std::uint8_t> flag_image() const;
  static ThicknessMap from_float(const Image<float>& values);
};

/// Arc length of a polyline in mm.
double polyline_length(std::span<const Point> points, double spacing);

/// Euler integration down the potential (along -N) from `start` until the
/// path enters the exterior, drops to psi_outer, or runs out of steps. The
/// final point is clipped back onto the crossing.
Streamline trace(const TangentField& tf, const PotentialField& psi, Point start,
                 const SolverConfig& cfg);

/// Full inner-to-outer streamline through `seed`: traced up the potential to
/// the inner contour and down to the outer one, joined into one path that
/// starts on the inner contour.
Streamline trace_across(const TangentField& tf, const PotentialField& psi, Point seed,
                        const SolverConfig& cfg);

/// Every wall pixel whose cell holds a point of a completed streamline gets
/// the mean arc length of all such streamlines.
ThicknessMap splat(std::span<const Streamline> streamlines, const BinaryMask& wall);

/// Fills unassigned wall pixels by a potential-aware inverse-distance mean of
/// the `fill_k` nearest splatted pixels. Throws InterpolationImpossible when
/// nothing was splatted.
ThicknessMap fill_missing(const ThicknessMap& partial, const PotentialField& psi,
                          const SolverConfig& cfg);

/// Wall-clock seconds per pipeline stage.
struct StageTimings {
  double labels = 0.0;
  double laplace = 0.0;
  double tangent = 0.0;
  double tracing = 0.0;
  double splat = 0.0;
  double fill = 0.0;
  double total() const { return labels + laplace + tangent + tracing + splat + fill; }
};

struct MeasureResult {
  PotentialField potential;
  ThicknessMap thickness;
  std::size_t streamlines = 0;
  std::size_t splatted = 0;
  std::size_t interpolated = 0;
  StageTimings timings;
};

/// Label regions, extract contours, solve, trace from every inner-contour
/// pixel center, splat, fill.
MeasureResult measure_detailed(const BinaryMask& mask, const SolverConfig& cfg);
MeasureResult measure_detailed(const BinaryMask& mask, const Image<BoundaryLabel>& boundaries,
                               const SolverConfig& cfg);

ThicknessMap measure(const BinaryMask& mask, const SolverConfig& cfg);
ThicknessMap measure_with_boundaries(const BinaryMask& mask,
                                     const Image<BoundaryLabel>& boundaries,
                                     const SolverConfig& cfg);

}  // namespace dwt
