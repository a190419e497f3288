#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dwt/grid.hpp"
#include "dwt/laplace.hpp"

namespace dwt {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Parameter ranges for random annular shapes. All lengths in pixels.
struct ShapeRecipe {
  int image_size = kDefaultImageSize;
  double spacing = kDefaultSpacingMm;
  Range r_inner{6.0, 40.0};
  Range wall_width{1.0, 30.0};
  double center_jitter = 10.0;

  bool elastic = true;
  double elastic_alpha = 200.0;
  double elastic_sigma = 8.0;

  bool piecewise_affine = true;
  int pwa_grid = 4;
  double pwa_jitter = 6.0;

  /// Items whose measured maximum exceeds this (mm) are resampled; 0 keeps all.
  double max_thickness_mm = 64.0;

  /// Throws RecipeInfeasible when the ranges are empty or the largest
  /// annulus cannot fit inside the image.
  void validate() const;
};

/// Annulus with random center, inner radius and wall width; wall pixels
/// satisfy r_in <= |p - c| < r_in + width.
BinaryMask gen_annulus(const ShapeRecipe& recipe, std::uint64_t seed);

/// Random smooth displacement: two uniform(-1, 1) fields smoothed by a
/// Gaussian (truncated at 3 sigma), scaled by alpha, applied as a backward
/// nearest-neighbor warp.
BinaryMask elastic_transform(const BinaryMask& mask, double alpha, double sigma,
                             std::uint64_t seed);

/// Jitters a (grid_n + 1)^2 control lattice and warps each of its triangles
/// affinely. Folded or zero-area triangles are redrawn up to 16 times before
/// TransformDegenerate is thrown.
BinaryMask piecewise_affine(const BinaryMask& mask, int grid_n, double jitter,
                            std::uint64_t seed);

enum class SpecialShape { square_annulus, thick_cylinder, two_segments };

std::optional<SpecialShape> parse_special_shape(std::string_view name);

struct SpecialParams {
  int image_size = kDefaultImageSize;
  double spacing = 1.0;
  /// Outer side of the square annulus.
  int side = 60;
  /// Wall width for all shapes.
  double width = 10.0;
  /// Outer radius of the cylinder and of the two arcs.
  double r_out = 40.0;
};

struct SpecialShapeResult {
  BinaryMask mask;
  /// Inner/outer faces; present for shapes without an enclosed cavity.
  std::optional<Image<BoundaryLabel>> boundaries;
};

SpecialShapeResult gen_special(SpecialShape kind, const SpecialParams& params,
                               std::uint64_t seed = 0);

struct ManifestEntry {
  std::string id;
  std::string mask_path;
  std::string thickness_path;
  double max_thickness_mm = 0.0;
  std::uint64_t seed = 0;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  ShapeRecipe recipe;
  std::uint64_t master_seed = 0;
};

/// CSV with header `id,mask,thickness,max_thickness_mm,seed`.
std::string encode_manifest(const DatasetManifest& manifest);
DatasetManifest parse_manifest(std::string_view csv);

/// Generates `count` (mask, thickness) pairs into out_dir/masks and
/// out_dir/thickness and writes out_dir/manifest.csv. Output does not depend
/// on `jobs`.
DatasetManifest gen_dataset(int count, const ShapeRecipe& recipe,
                            const std::filesystem::path& out_dir, std::uint64_t master_seed,
                            const SolverConfig& cfg, int jobs = 1);

}  // namespace dwt
