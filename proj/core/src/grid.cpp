#include "dwt/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>

namespace dwt {

namespace {

constexpr std::array<std::array<int, 2>, 4> kNeighbors4{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};

// Flood fill background from `seed`, writing `region` into `out`.
void flood_background(const BinaryMask& mask, Image<Region>& out, Image<std::uint8_t>& seen,
                      Pixel seed, Region region) {
  std::deque<Pixel> queue{seed};
  seen(seed.x, seed.y) = 1;
  while (!queue.empty()) {
    const Pixel p = queue.front();
    queue.pop_front();
    out(p.x, p.y) = region;
    for (const auto& [dx, dy] : kNeighbors4) {
      const int nx = p.x + dx;
      const int ny = p.y + dy;
      if (!mask.geometry().contains(nx, ny) || seen(nx, ny) || mask.is_wall(nx, ny)) continue;
      seen(nx, ny) = 1;
      queue.push_back({nx, ny});
    }
  }
}

}  // namespace

std::size_t BinaryMask::wall_count() const {
  return static_cast<std::size_t>(
      std::count_if(labels_.pixels().begin(), labels_.pixels().end(), [](auto v) { return v != 0; }));
}

BinaryMask rotate90(const BinaryMask& mask) {
  const Image<std::uint8_t> rotated = rotate90(mask.labels());
  BinaryMask out(rotated.geometry());
  for (int y = 0; y < rotated.height(); ++y) {
    for (int x = 0; x < rotated.width(); ++x) out.set_wall(x, y, rotated(x, y) != 0);
  }
  return out;
}

RegionLabels label_regions(const BinaryMask& mask) {
  const GridGeometry& g = mask.geometry();
  RegionLabels result{Image<Region>(g, Region::wall), 0};
  Image<std::uint8_t> seen(g, 0);

  // Exterior: everything reachable from a border background pixel.
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const bool border = x == 0 || y == 0 || x == g.width - 1 || y == g.height - 1;
      if (border && !mask.is_wall(x, y) && !seen(x, y)) {
        flood_background(mask, result.labels, seen, {x, y}, Region::exterior);
      }
    }
  }
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      if (!mask.is_wall(x, y) && !seen(x, y)) {
        flood_background(mask, result.labels, seen, {x, y}, Region::cavity);
        ++result.cavity_count;
      }
    }
  }
  return result;
}

BoundaryConditions extract_boundaries(const RegionLabels& regions, double psi_inner) {
  if (regions.cavity_count < 1) {
    throw Error(ErrorKind::NoInnerBoundary,
                "shape has no enclosed cavity; supply manual inner/outer boundary labels");
  }
  if (!(psi_inner > 0.0) || !std::isfinite(psi_inner)) {
    throw Error(ErrorKind::Domain, "psi_inner must be positive and finite");
  }
  BoundaryConditions bc;
  bc.psi_inner = psi_inner;
  bc.psi_outer = 0.0;
  const GridGeometry& g = regions.geometry();
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      if (regions.labels(x, y) != Region::wall) continue;
      bool touches_cavity = false;
      bool touches_exterior = false;
      for (const auto& [dx, dy] : kNeighbors4) {
        const int nx = x + dx;
        const int ny = y + dy;
        if (!g.contains(nx, ny)) continue;
        const Region r = regions.labels(nx, ny);
        touches_cavity |= r == Region::cavity;
        touches_exterior |= r == Region::exterior;
      }
      if (touches_cavity) bc.inner.push_back({x, y});
      if (touches_exterior) bc.outer.push_back({x, y});
    }
  }
  if (bc.outer.empty()) {
    throw Error(ErrorKind::Domain, "shape has no wall pixel adjacent to the exterior");
  }
  return bc;
}

BinaryMask normalize_grid(const BinaryMask& mask, double target_spacing, int target_size) {
  if (!(target_spacing > 0.0) || !std::isfinite(target_spacing)) {
    throw Error(ErrorKind::Domain, "target spacing must be positive");
  }
  if (target_size < 1) throw Error(ErrorKind::Domain, "target size must be >= 1");

  const double factor = mask.spacing() / target_spacing;
  const auto resampled = [factor](int n) {
    return std::max(1, static_cast<int>(std::lround(n * factor)));
  };
  const int rw = resampled(mask.width());
  const int rh = resampled(mask.height());

  // Crop removes floor(excess/2) from the left/top; pad adds floor(deficit/2)
  // there. The odd pixel goes right/bottom in both cases.
  const auto offset = [target_size](int n) {
    return n >= target_size ? (n - target_size) / 2 : -((target_size - n) / 2);
  };
  const int ox = offset(rw);
  const int oy = offset(rh);

  const auto source_index = [factor](int r, int n) {
    const int s = static_cast<int>(std::floor((r + 0.5) / factor));
    return std::clamp(s, 0, n - 1);
  };

  BinaryMask out(GridGeometry{target_size, target_size, target_spacing});
  for (int y = 0; y < target_size; ++y) {
    const int ry = y + oy;
    if (ry < 0 || ry >= rh) continue;
    const int sy = source_index(ry, mask.height());
    for (int x = 0; x < target_size; ++x) {
      const int rx = x + ox;
      if (rx < 0 || rx >= rw) continue;
      out.set_wall(x, y, mask.is_wall(source_index(rx, mask.width()), sy));
    }
  }
  return out;
}

}  // namespace dwt
