#include "dwt/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <thread>

#include "dwt/io.hpp"

namespace dwt {

namespace {

void require_same_geometry(const ThicknessMap& a, const ThicknessMap& b) {
  const GridGeometry& ga = a.geometry();
  const GridGeometry& gb = b.geometry();
  if (ga.width != gb.width || ga.height != gb.height) {
    throw Error(ErrorKind::Dimension, fmt::format("maps are {}x{} and {}x{}", ga.width, ga.height,
                                                  gb.width, gb.height));
  }
}

template <typename F>
ErrorValue mean_error(const ThicknessMap& pred, const ThicknessMap& gt, EvalRegion region, F&& f) {
  require_same_geometry(pred, gt);
  if (!region.is_whole()) {
    const GridGeometry& g = region.mask->geometry();
    if (g.width != gt.geometry().width || g.height != gt.geometry().height) {
      throw Error(ErrorKind::Dimension, "region mask does not match the maps");
    }
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < gt.thickness.size(); ++i) {
    if (!region.is_whole() && !region.mask->is_wall(i)) continue;
    sum += f(pred.thickness[i] - gt.thickness[i]);
    ++n;
  }
  if (n == 0) return {0.0, true};
  return {sum / static_cast<double>(n), false};
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd population_stats(const std::vector<double>& v) {
  if (v.empty()) return {};
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size()))};
}

ThicknessMap load_map(const std::filesystem::path& path, const std::string& id) {
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("id {}: {}", id, e.detail()));
  }
  return ThicknessMap::from_float(parse_pfm(bytes));
}

}  // namespace

ErrorValue mae(const ThicknessMap& pred, const ThicknessMap& gt, EvalRegion region) {
  return mean_error(pred, gt, region, [](double d) { return std::abs(d); });
}

ErrorValue mse(const ThicknessMap& pred, const ThicknessMap& gt, EvalRegion region) {
  return mean_error(pred, gt, region, [](double d) { return d * d; });
}

double max_thickness(const ThicknessMap& map) {
  double best = 0.0;
  for (double v : map.thickness.pixels()) best = std::max(best, v);
  return best;
}

std::vector<std::size_t> histogram(const std::vector<double>& values, double bin_width, double lo,
                                   double hi) {
  if (!(bin_width > 0.0)) throw Error(ErrorKind::Domain, "bin width must be positive");
  if (!(lo < hi)) throw Error(ErrorKind::Range, "histogram range needs lo < hi");
  const auto bins = static_cast<std::size_t>(std::ceil((hi - lo) / bin_width));
  std::vector<std::size_t> counts(std::max<std::size_t>(bins, 1), 0);
  for (double v : values) {
    const double k = std::floor((v - lo) / bin_width);
    const auto idx = static_cast<std::size_t>(
        std::clamp(k, 0.0, static_cast<double>(counts.size() - 1)));
    ++counts[idx];
  }
  return counts;
}

std::string histogram_csv(const std::vector<std::size_t>& counts, double bin_width, double lo) {
  std::string out = "bin_lo,bin_hi,count\n";
  for (std::size_t k = 0; k < counts.size(); ++k) {
    out += fmt::format("{},{},{}\n", lo + static_cast<double>(k) * bin_width,
                       lo + static_cast<double>(k + 1) * bin_width, counts[k]);
  }
  return out;
}

std::string format_mean_std(double mean, double std) {
  return fmt::format("{:.3f}({:.3f})", mean, std);
}

std::string EvalReport::mae_summary() const { return format_mean_std(mae_mean, mae_std); }
std::string EvalReport::mse_summary() const { return format_mean_std(mse_mean, mse_std); }

EvalReport eval_dataset(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir,
                        const DatasetManifest& manifest, bool whole_image, int jobs) {
  const std::size_t n = manifest.entries.size();
  EvalReport report;
  report.whole_image = whole_image;
  report.per_image.resize(n);
  std::vector<std::exception_ptr> errors(n);

  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      const ManifestEntry& e = manifest.entries[i];
      try {
        const ThicknessMap gt = load_map(gt_dir / e.thickness_path, e.id);
        const ThicknessMap pred = load_map(pred_dir / e.thickness_path, e.id);
        BinaryMask support(gt.geometry());
        const int w = gt.geometry().width;
        for (int y = 0; y < gt.geometry().height; ++y) {
          for (int x = 0; x < w; ++x) support.set_wall(x, y, gt.thickness(x, y) > 0.0);
        }
        const EvalRegion region = whole_image ? EvalRegion::whole() : EvalRegion::of(support);
        ImageScore& s = report.per_image[i];
        s.id = e.id;
        s.mae_mm = mae(pred, gt, region).value;
        s.mse_mm = mse(pred, gt, region).value;
        s.max_thickness_mm = max_thickness(gt);
      } catch (const Error& err) {
        if (err.kind() == ErrorKind::Dimension) {
          errors[i] = std::make_exception_ptr(
              Error(err.kind(), fmt::format("id {}: {}", e.id, err.detail())));
        } else {
          errors[i] = std::current_exception();
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::clamp<int>(jobs, 1, std::max<int>(1, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<double> maes;
  std::vector<double> mses;
  for (const ImageScore& s : report.per_image) {
    maes.push_back(s.mae_mm);
    mses.push_back(s.mse_mm);
  }
  const MeanStd a = population_stats(maes);
  const MeanStd b = population_stats(mses);
  report.mae_mean = a.mean;
  report.mae_std = a.std;
  report.mse_mean = b.mean;
  report.mse_std = b.std;
  return report;
}

std::string report_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["region"] = report.whole_image ? "whole" : "wall";
  j["std"] = "population";
  j["mae"] = report.mae_summary();
  j["mse"] = report.mse_summary();
  j["mae_mean"] = report.mae_mean;
  j["mae_std"] = report.mae_std;
  j["mse_mean"] = report.mse_mean;
  j["mse_std"] = report.mse_std;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const ImageScore& s : report.per_image) {
    rows.push_back({{"id", s.id},
                    {"mae_mm", s.mae_mm},
                    {"mse_mm", s.mse_mm},
                    {"max_thickness_mm", s.max_thickness_mm}});
  }
  j["per_image"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string report_csv(const EvalReport& report) {
  std::string out = "id,mae_mm,mse_mm,max_thickness_mm\n";
  for (const ImageScore& s : report.per_image) {
    out += fmt::format("{},{:.6f},{:.6f},{:.6f}\n", s.id, s.mae_mm, s.mse_mm, s.max_thickness_mm);
  }
  out += fmt::format("# mae {} mse {} (population std, {} region)\n", report.mae_summary(),
                     report.mse_summary(), report.whole_image ? "whole" : "wall");
  return out;
}

}  // namespace dwt
