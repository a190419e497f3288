#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dwt/grid.hpp"
#include "dwt/streamline.hpp"
#include "dwt/synth.hpp"

namespace dwt {

/// Pixels to average over: the wall pixels of a mask, or every pixel.
struct EvalRegion {
  const BinaryMask* mask = nullptr;

  static EvalRegion whole() { return {}; }
  static EvalRegion of(const BinaryMask& m) { return {&m}; }
  bool is_whole() const { return mask == nullptr; }
};

struct ErrorValue {
  double value = 0.0;
  /// Set when the region held no pixels; value is then 0.
  bool empty_region = false;
};

ErrorValue mae(const ThicknessMap& pred, const ThicknessMap& gt, EvalRegion region);
ErrorValue mse(const ThicknessMap& pred, const ThicknessMap& gt, EvalRegion region);

double max_thickness(const ThicknessMap& map);

/// Counts per half-open bin [lo + k w, lo + (k+1) w); values outside
/// [lo, hi) land in the first or last bin.
std::vector<std::size_t> histogram(const std::vector<double>& values, double bin_width, double lo,
                                   double hi);

/// `bin_lo,bin_hi,count` rows.
std::string histogram_csv(const std::vector<std::size_t>& counts, double bin_width, double lo);

struct ImageScore {
  std::string id;
  double mae_mm = 0.0;
  double mse_mm = 0.0;
  double max_thickness_mm = 0.0;
};

struct EvalReport {
  std::vector<ImageScore> per_image;
  double mae_mean = 0.0;
  double mae_std = 0.0;
  double mse_mean = 0.0;
  double mse_std = 0.0;
  bool whole_image = false;

  std::string mae_summary() const;
  std::string mse_summary() const;
};

/// "mean(std)" with three decimals, e.g. 0.321(0.060).
std::string format_mean_std(double mean, double std);

/// Scores every manifest entry of pred_dir against gt_dir. Maps are looked
/// up by the entry's thickness path. The region is the ground-truth support
/// (gt > 0) unless whole_image is set. Standard deviations are population.
EvalReport eval_dataset(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir,
                        const DatasetManifest& manifest, bool whole_image = false, int jobs = 1);

std::string report_json(const EvalReport& report);
/// `id,mae_mm,mse_mm,max_thickness_mm` rows plus summary rows.
std::string report_csv(const EvalReport& report);

}  // namespace dwt
