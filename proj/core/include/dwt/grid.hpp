#pragma once

#include <cstdint>
#include <vector>

#include "dwt/image.hpp"

namespace dwt {

/// Default physical pixel spacing (mm) that masks are normalized to.
inline constexpr double kDefaultSpacingMm = 1.36;
inline constexpr int kDefaultImageSize = 192;

/// Binary wall/background shape with physical spacing.
class BinaryMask {
 public:
  BinaryMask() = default;
  explicit BinaryMask(GridGeometry geometry) : labels_(geometry, 0) { geometry.validate(); }

  const GridGeometry& geometry() const { return labels_.geometry(); }
  int width() const { return labels_.width(); }
  int height() const { return labels_.height(); }
  double spacing() const { return labels_.spacing(); }
  void set_spacing(double spacing) { labels_.set_spacing(spacing); }

  bool is_wall(int x, int y) const { return labels_(x, y) != 0; }
  bool is_wall(std::size_t i) const { return labels_[i] != 0; }
  void set_wall(int x, int y, bool wall = true) { labels_(x, y) = wall ? 1 : 0; }

  std::size_t wall_count() const;

  /// 1 = wall, 0 = background.
  const Image<std::uint8_t>& labels() const { return labels_; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  Image<std::uint8_t> labels_;
};

BinaryMask rotate90(const BinaryMask& mask);

enum class Region : std::uint8_t { exterior, cavity, wall };

struct RegionLabels {
  Image<Region> labels;
  int cavity_count = 0;

  const GridGeometry& geometry() const { return labels.geometry(); }
};

/// Dirichlet data for the auto (cavity/exterior) formulation. Pixel lists are
/// row-major ordered.
struct BoundaryConditions {
  std::vector<Pixel> inner;
  std::vector<Pixel> outer;
  double psi_inner = 1.0;
  double psi_outer = 0.0;
};

/// User-supplied boundary faces for shapes without a closed cavity.
enum class BoundaryLabel : std::uint8_t { none, inner, outer };

/// Partitions background into the border-connected exterior and enclosed
/// cavities (4-connectivity).
RegionLabels label_regions(const BinaryMask& mask);

/// Wall pixels 4-adjacent to a cavity form the inner set, those 4-adjacent to
/// the exterior the outer set. Throws NoInnerBoundary without a cavity.
BoundaryConditions extract_boundaries(const RegionLabels& regions, double psi_inner = 1.0);

/// Nearest-neighbor resample to `target_spacing`, then center crop / zero pad
/// to a square of `target_size` pixels.
BinaryMask normalize_grid(const BinaryMask& mask, double target_spacing, int target_size);

}  // namespace dwt
