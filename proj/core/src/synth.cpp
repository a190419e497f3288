#include "dwt/synth.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <fmt/format.h>
#include <mutex>
#include <sstream>
#include <thread>

#include "dwt/io.hpp"
#include "dwt/rng.hpp"
#include "dwt/streamline.hpp"

namespace dwt {

namespace {

constexpr int kMaxAttempts = 16;

// Stage keys under an attempt seed.
enum Stage : std::uint64_t { kStageAnnulus = 1, kStageElastic = 2, kStagePwa = 3 };

[[noreturn]] void infeasible(const std::string& what) {
  throw Error(ErrorKind::RecipeInfeasible, what);
}

int reflect_index(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
  }
  return i;
}

// Separable Gaussian blur, kernel truncated at 3 sigma and normalized,
// mirror-reflected at the borders.
Image<double> gaussian_blur(const Image<double>& src, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double v = std::exp(-0.5 * (k * k) / (sigma * sigma));
    kernel[static_cast<std::size_t>(k + radius)] = v;
    total += v;
  }
  for (double& v : kernel) v /= total;

  const int w = src.width();
  const int h = src.height();
  Image<double> tmp(src.geometry(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += kernel[static_cast<std::size_t>(k + radius)] * src(reflect_index(x + k, w), y);
      }
      tmp(x, y) = acc;
    }
  }
  Image<double> out(src.geometry(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += kernel[static_cast<std::size_t>(k + radius)] * tmp(x, reflect_index(y + k, h));
      }
      out(x, y) = acc;
    }
  }
  return out;
}

bool sample_nearest(const BinaryMask& mask, double x, double y) {
  const int sx = static_cast<int>(std::lround(x));
  const int sy = static_cast<int>(std::lround(y));
  return mask.geometry().contains(sx, sy) && mask.is_wall(sx, sy);
}

struct Vertex {
  double x;
  double y;
};

double signed_area(Vertex a, Vertex b, Vertex c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

std::string item_id(int index) { return fmt::format("{:06d}", index); }

struct ItemOutcome {
  ManifestEntry entry;
  int attempts = 0;
  std::exception_ptr error;
};

ItemOutcome generate_item(int index, const ShapeRecipe& recipe,
                          const std::filesystem::path& out_dir, std::uint64_t master_seed,
                          const SolverConfig& cfg) {
  ItemOutcome outcome;
  const std::uint64_t item_seed = derive_seed(master_seed, static_cast<std::uint64_t>(index));
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    ++outcome.attempts;
    const std::uint64_t seed = derive_seed(item_seed, static_cast<std::uint64_t>(attempt));
    BinaryMask mask = gen_annulus(recipe, derive_seed(seed, kStageAnnulus));
    if (recipe.elastic) {
      mask = elastic_transform(mask, recipe.elastic_alpha, recipe.elastic_sigma,
                               derive_seed(seed, kStageElastic));
    }
    if (recipe.piecewise_affine) {
      try {
        mask = piecewise_affine(mask, recipe.pwa_grid, recipe.pwa_jitter,
                                derive_seed(seed, kStagePwa));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::TransformDegenerate) throw;
        continue;
      }
    }
    if (label_regions(mask).cavity_count != 1) continue;

    ThicknessMap thickness;
    try {
      thickness = measure(mask, cfg);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::NoInnerBoundary || e.kind() == ErrorKind::InterpolationImpossible ||
          e.kind() == ErrorKind::Domain) {
        continue;
      }
      throw;
    }
    // Thickness must be positive exactly on the wall.
    bool consistent = true;
    double max_mm = 0.0;
    for (std::size_t i = 0; i < thickness.thickness.size(); ++i) {
      const float v = static_cast<float>(thickness.thickness[i]);
      if ((v > 0.0f) != mask.is_wall(i)) consistent = false;
      max_mm = std::max(max_mm, static_cast<double>(v));
    }
    if (!consistent) continue;
    if (recipe.max_thickness_mm > 0.0 && max_mm > recipe.max_thickness_mm) continue;

    ManifestEntry& entry = outcome.entry;
    entry.id = item_id(index);
    entry.mask_path = "masks/" + entry.id + ".pgm";
    entry.thickness_path = "thickness/" + entry.id + ".pfm";
    entry.max_thickness_mm = max_mm;
    entry.seed = seed;
    write_file(out_dir / entry.mask_path, encode_mask(mask));
    write_file(out_dir / entry.thickness_path, encode_pfm(thickness.to_float()));
    return outcome;
  }
  throw Error(ErrorKind::RecipeInfeasible,
              fmt::format("item {} rejected {} times in a row", item_id(index), kMaxAttempts));
}

}  // namespace

void ShapeRecipe::validate() const {
  if (image_size < 1) infeasible("image_size must be >= 1");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) infeasible("spacing must be positive");
  if (!(r_inner.lo <= r_inner.hi)) infeasible("r_inner range is empty");
  if (!(wall_width.lo <= wall_width.hi)) infeasible("wall_width range is empty");
  if (r_inner.lo < 1.0) infeasible("r_inner minimum must be >= 1");
  if (!(wall_width.lo > 0.0)) infeasible("wall_width minimum must be positive");
  if (!(center_jitter >= 0.0)) infeasible("center_jitter must be >= 0");
  const double max_extent = r_inner.hi + wall_width.hi + center_jitter;
  if (max_extent > image_size / 2.0 - 1.0) {
    infeasible(fmt::format("largest outer radius plus jitter ({}) does not fit a {} px image",
                           max_extent, image_size));
  }
  if (elastic && (!(elastic_alpha >= 0.0) || !(elastic_sigma > 0.0))) {
    infeasible("elastic transform needs alpha >= 0 and sigma > 0");
  }
  if (!(max_thickness_mm >= 0.0)) infeasible("max_thickness_mm must be >= 0");
  if (piecewise_affine && (pwa_grid < 1 || !(pwa_jitter >= 0.0))) {
    infeasible("piecewise affine needs grid >= 1 and jitter >= 0");
  }
}

BinaryMask gen_annulus(const ShapeRecipe& recipe, std::uint64_t seed) {
  recipe.validate();
  CounterRng rng(seed);
  const double center = (recipe.image_size - 1) / 2.0;
  const double cx = center + rng.uniform(-recipe.center_jitter, recipe.center_jitter);
  const double cy = center + rng.uniform(-recipe.center_jitter, recipe.center_jitter);
  const double r_in = rng.uniform(recipe.r_inner.lo, recipe.r_inner.hi);
  const double r_out = r_in + rng.uniform(recipe.wall_width.lo, recipe.wall_width.hi);

  BinaryMask mask(GridGeometry{recipe.image_size, recipe.image_size, recipe.spacing});
  for (int y = 0; y < recipe.image_size; ++y) {
    for (int x = 0; x < recipe.image_size; ++x) {
      const double d = std::hypot(x - cx, y - cy);
      if (d >= r_in && d < r_out) mask.set_wall(x, y);
    }
  }
  return mask;
}

BinaryMask elastic_transform(const BinaryMask& mask, double alpha, double sigma,
                             std::uint64_t seed) {
  if (!(alpha >= 0.0)) throw Error(ErrorKind::Domain, "elastic alpha must be >= 0");
  if (!(sigma > 0.0)) throw Error(ErrorKind::Domain, "elastic sigma must be > 0");
  if (alpha == 0.0) return mask;

  const GridGeometry& g = mask.geometry();
  Image<double> noise_x(g);
  Image<double> noise_y(g);
  const CounterRng rx(derive_seed(seed, 0));
  const CounterRng ry(derive_seed(seed, 1));
  for (std::size_t i = 0; i < g.pixel_count(); ++i) {
    noise_x[i] = 2.0 * rx.unit_at(i) - 1.0;
    noise_y[i] = 2.0 * ry.unit_at(i) - 1.0;
  }
  const Image<double> dx = gaussian_blur(noise_x, sigma);
  const Image<double> dy = gaussian_blur(noise_y, sigma);

  BinaryMask out(g);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      out.set_wall(x, y, sample_nearest(mask, x + alpha * dx(x, y), y + alpha * dy(x, y)));
    }
  }
  return out;
}

BinaryMask piecewise_affine(const BinaryMask& mask, int grid_n, double jitter,
                            std::uint64_t seed) {
  if (grid_n < 1) throw Error(ErrorKind::Domain, "piecewise affine grid must be >= 1");
  if (!(jitter >= 0.0)) throw Error(ErrorKind::Domain, "piecewise affine jitter must be >= 0");
  if (jitter == 0.0) return mask;

  const GridGeometry& g = mask.geometry();
  const int side = grid_n + 1;
  std::vector<Vertex> src(static_cast<std::size_t>(side * side));
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) {
      src[static_cast<std::size_t>(j * side + i)] = {i * (g.width - 1) / static_cast<double>(grid_n),
                                                     j * (g.height - 1) / static_cast<double>(grid_n)};
    }
  }
  // Two triangles per cell, counterclockwise in (x, y) with y down.
  std::vector<std::array<int, 3>> triangles;
  for (int j = 0; j < grid_n; ++j) {
    for (int i = 0; i < grid_n; ++i) {
      const int a = j * side + i;
      triangles.push_back({a, a + 1, a + side + 1});
      triangles.push_back({a, a + side + 1, a + side});
    }
  }

  std::vector<Vertex> dst;
  bool valid = false;
  for (int attempt = 0; attempt < kMaxAttempts && !valid; ++attempt) {
    CounterRng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    dst = src;
    for (Vertex& v : dst) {
      v.x += rng.uniform(-jitter, jitter);
      v.y += rng.uniform(-jitter, jitter);
    }
    valid = std::all_of(triangles.begin(), triangles.end(), [&](const auto& t) {
      const double before = signed_area(src[t[0]], src[t[1]], src[t[2]]);
      const double after = signed_area(dst[t[0]], dst[t[1]], dst[t[2]]);
      return after * before > 0.0 && std::abs(after) > 1e-9;
    });
  }
  if (!valid) {
    throw Error(ErrorKind::TransformDegenerate,
                fmt::format("jitter {} folds the {}x{} lattice in every one of {} draws", jitter,
                            grid_n, grid_n, kMaxAttempts));
  }

  BinaryMask out(g);
  Image<std::uint8_t> covered(g, 0);
  constexpr double kEdge = -1e-9;
  for (const auto& t : triangles) {
    const Vertex d0 = dst[t[0]], d1 = dst[t[1]], d2 = dst[t[2]];
    const Vertex s0 = src[t[0]], s1 = src[t[1]], s2 = src[t[2]];
    const double area = signed_area(d0, d1, d2);
    const int x_lo = std::max(0, static_cast<int>(std::floor(std::min({d0.x, d1.x, d2.x}))));
    const int x_hi = std::min(g.width - 1, static_cast<int>(std::ceil(std::max({d0.x, d1.x, d2.x}))));
    const int y_lo = std::max(0, static_cast<int>(std::floor(std::min({d0.y, d1.y, d2.y}))));
    const int y_hi = std::min(g.height - 1, static_cast<int>(std::ceil(std::max({d0.y, d1.y, d2.y}))));
    for (int y = y_lo; y <= y_hi; ++y) {
      for (int x = x_lo; x <= x_hi; ++x) {
        if (covered(x, y)) continue;
        const Vertex p{static_cast<double>(x), static_cast<double>(y)};
        const double b0 = signed_area(p, d1, d2) / area;
        const double b1 = signed_area(d0, p, d2) / area;
        const double b2 = 1.0 - b0 - b1;
        if (b0 < kEdge || b1 < kEdge || b2 < kEdge) continue;
        covered(x, y) = 1;
        const double sx = b0 * s0.x + b1 * s1.x + b2 * s2.x;
        const double sy = b0 * s0.y + b1 * s1.y + b2 * s2.y;
        out.set_wall(x, y, sample_nearest(mask, sx, sy));
      }
    }
  }
  return out;
}

std::optional<SpecialShape> parse_special_shape(std::string_view name) {
  if (name == "square_annulus") return SpecialShape::square_annulus;
  if (name == "thick_cylinder") return SpecialShape::thick_cylinder;
  if (name == "two_segments") return SpecialShape::two_segments;
  return std::nullopt;
}

SpecialShapeResult gen_special(SpecialShape kind, const SpecialParams& params,
                               std::uint64_t /*seed*/) {
  const int n = params.image_size;
  const GridGeometry g{n, n, params.spacing};
  g.validate();
  SpecialShapeResult result{BinaryMask(g), std::nullopt};
  BinaryMask& mask = result.mask;
  const double c = (n - 1) / 2.0;

  switch (kind) {
    case SpecialShape::square_annulus: {
      const int inner_side = params.side - 2 * static_cast<int>(std::lround(params.width));
      if (params.side > n - 2 || inner_side < 1 || params.width < 1.0) {
        infeasible("square annulus side/width do not fit");
      }
      const int x0 = (n - params.side) / 2;
      const int w = static_cast<int>(std::lround(params.width));
      for (int y = x0; y < x0 + params.side; ++y) {
        for (int x = x0; x < x0 + params.side; ++x) {
          const bool inside = x >= x0 + w && x < x0 + params.side - w && y >= x0 + w &&
                              y < x0 + params.side - w;
          if (!inside) mask.set_wall(x, y);
        }
      }
      break;
    }
    case SpecialShape::thick_cylinder: {
      const double r_in = params.r_out - params.width;
      if (params.width < 0.6 * params.r_out || r_in < 1.0 || params.r_out > n / 2.0 - 1.0) {
        infeasible("thick cylinder needs 0.6 r_out <= width < r_out - 1 inside the image");
      }
      for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
          const double d = std::hypot(x - c, y - c);
          if (d >= r_in && d < params.r_out) mask.set_wall(x, y);
        }
      }
      break;
    }
    case SpecialShape::two_segments: {
      const double r_in = params.r_out - params.width;
      if (params.width < 2.0 || r_in < 1.0 || params.r_out > n / 2.0 - 1.0) {
        infeasible("two segments need width >= 2 and r_out inside the image");
      }
      constexpr double kPi = 3.14159265358979323846;
      // Arcs over 20..160 and 200..340 degrees (y up), gaps on the horizontal axis.
      const auto in_arc = [&](int x, int y) {
        const double d = std::hypot(x - c, y - c);
        if (d < r_in || d >= params.r_out) return false;
        double deg = std::atan2(-(y - c), x - c) * 180.0 / kPi;
        if (deg < 0.0) deg += 360.0;
        return (deg >= 20.0 && deg <= 160.0) || (deg >= 200.0 && deg <= 340.0);
      };
      for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) mask.set_wall(x, y, in_arc(x, y));
      }
      Image<BoundaryLabel> labels(g, BoundaryLabel::none);
      const int offsets[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
      for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
          if (!mask.is_wall(x, y)) continue;
          bool inner = false;
          bool outer = false;
          for (const auto& o : offsets) {
            const int nx = x + o[0];
            const int ny = y + o[1];
            if (g.contains(nx, ny) && mask.is_wall(nx, ny)) continue;
            const double d = std::hypot(nx - c, ny - c);
            inner |= d < r_in;
            outer |= d >= params.r_out;
          }
          if (inner) {
            labels(x, y) = BoundaryLabel::inner;
          } else if (outer) {
            labels(x, y) = BoundaryLabel::outer;
          }
        }
      }
      result.boundaries = std::move(labels);
      break;
    }
  }
  return result;
}

std::string encode_manifest(const DatasetManifest& manifest) {
  std::string out = "id,mask,thickness,max_thickness_mm,seed\n";
  for (const ManifestEntry& e : manifest.entries) {
    out += fmt::format("{},{},{},{:.6f},{}\n", e.id, e.mask_path, e.thickness_path,
                       e.max_thickness_mm, e.seed);
  }
  return out;
}

DatasetManifest parse_manifest(std::string_view csv) {
  DatasetManifest manifest;
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line) || line.rfind("id,mask,thickness,max_thickness_mm,seed", 0) != 0) {
    throw Error(ErrorKind::Parse, "manifest header must be id,mask,thickness,max_thickness_mm,seed");
  }
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (fields.size() != 5) {
      throw Error(ErrorKind::Parse, fmt::format("manifest row {} has {} fields", row, fields.size()));
    }
    ManifestEntry e;
    e.id = fields[0];
    e.mask_path = fields[1];
    e.thickness_path = fields[2];
    try {
      e.max_thickness_mm = std::stod(fields[3]);
      e.seed = std::stoull(fields[4]);
    } catch (const std::exception&) {
      throw Error(ErrorKind::Parse, fmt::format("manifest row {} has a malformed number", row));
    }
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

DatasetManifest gen_dataset(int count, const ShapeRecipe& recipe,
                            const std::filesystem::path& out_dir, std::uint64_t master_seed,
                            const SolverConfig& cfg, int jobs) {
  recipe.validate();
  cfg.validate();
  if (count < 0) throw Error(ErrorKind::Domain, "count must be >= 0");

  DatasetManifest manifest;
  manifest.recipe = recipe;
  manifest.master_seed = master_seed;

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + out_dir.string() + ": " + ec.message());
  if (count > 0) {
    for (const char* sub : {"masks", "thickness"}) {
      std::filesystem::create_directories(out_dir / sub, ec);
      if (ec) throw Error(ErrorKind::Io, "cannot create " + (out_dir / sub).string());
    }
  }

  std::vector<ItemOutcome> outcomes(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  const auto worker = [&]() {
    for (int i = next++; i < count; i = next++) {
      try {
        outcomes[static_cast<std::size_t>(i)] = generate_item(i, recipe, out_dir, master_seed, cfg);
      } catch (...) {
        outcomes[static_cast<std::size_t>(i)].error = std::current_exception();
      }
    }
  };
  const int threads = std::clamp(jobs, 1, std::max(1, count));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  long attempts = 0;
  for (const ItemOutcome& o : outcomes) {
    if (o.error) std::rethrow_exception(o.error);
    attempts += o.attempts;
    manifest.entries.push_back(o.entry);
  }
  const long rejected = attempts - count;
  if (count > 0 && rejected * 2 > attempts) {
    throw Error(ErrorKind::RecipeInfeasible,
                fmt::format("{} of {} generated shapes were rejected", rejected, attempts));
  }
  write_file(out_dir / "manifest.csv", encode_manifest(manifest));
  return manifest;
}

}  // namespace dwt
