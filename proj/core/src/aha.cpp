#include "dwt/aha.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "dwt/error.hpp"
#include "dwt/grid.hpp"

namespace dwt {

namespace {

constexpr double kPi = 3.14159265358979323846;

constexpr double kCenter = 200.0;
// Ring radii in SVG units: apex disk, then apical, mid, basal.
constexpr double kRadii[] = {40.0, 80.0, 120.0, 160.0};

int first_id(Level level) {
  switch (level) {
    case Level::basal: return 1;
    case Level::mid: return 7;
    case Level::apical: return 13;
  }
  return 1;
}

const char* level_name(Level level) {
  switch (level) {
    case Level::basal: return "basal";
    case Level::mid: return "mid";
    case Level::apical: return "apical";
  }
  return "?";
}

double wrap_degrees(double a) {
  a = std::fmod(a, 360.0);
  if (a < 0.0) a += 360.0;
  // Keep values that round to 360 in the first sector.
  if (a >= 360.0 - 1e-9) a = 0.0;
  return a;
}

struct Centroid {
  double x = 0.0;
  double y = 0.0;
};

Centroid centroid_of(const ThicknessMap& map) {
  const GridGeometry& g = map.geometry();
  BinaryMask wall(g);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) wall.set_wall(x, y, map.thickness(x, y) > 0.0);
  }
  if (wall.wall_count() == 0) throw Error(ErrorKind::Domain, "map has no wall pixels");

  const RegionLabels regions = label_regions(wall);
  const Region target = regions.cavity_count > 0 ? Region::cavity : Region::wall;
  double sx = 0.0;
  double sy = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      if (regions.labels(x, y) != target) continue;
      sx += x;
      sy += y;
      ++n;
    }
  }
  return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

// Screen point at `deg` (counterclockwise, y up) and radius r.
std::string polar(double deg, double r) {
  const double rad = deg * kPi / 180.0;
  return fmt::format("{:.3f} {:.3f}", kCenter + r * std::cos(rad), kCenter - r * std::sin(rad));
}

std::string ramp_color(double value, double lo, double hi) {
  const int i = ramp_index(value, lo, hi);
  return fmt::format("rgb({},0,{})", i, 255 - i);
}

}  // namespace

std::optional<Sense> parse_sense(std::string_view text) {
  if (text == "cw" || text == "clockwise") return Sense::clockwise;
  if (text == "ccw" || text == "counterclockwise") return Sense::counterclockwise;
  return std::nullopt;
}

int sector_count(Level level) { return level == Level::apical ? 4 : 6; }

SegmentReport segment_slice(const ThicknessMap& map, Level level, double reference_angle,
                            Sense sense) {
  const Centroid c = centroid_of(map);
  const int n = sector_count(level);
  const double width = 360.0 / n;

  SegmentReport report;
  report.level = level;
  report.reference_angle = reference_angle;
  report.sense = sense;
  std::vector<double> sums(static_cast<std::size_t>(n), 0.0);
  report.pixel_counts.assign(static_cast<std::size_t>(n), 0);

  const GridGeometry& g = map.geometry();
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const double t = map.thickness(x, y);
      if (!(t > 0.0)) continue;
      const double theta = std::atan2(-(y - c.y), x - c.x) * 180.0 / kPi;
      const double rel = wrap_degrees(sense == Sense::counterclockwise ? theta - reference_angle
                                                                       : reference_angle - theta);
      // Snap to sector edges so rotated inputs bin identically.
      const double q = std::round(rel / width * 1e9) / 1e9;
      const int k = std::clamp(static_cast<int>(std::floor(q)), 0, n - 1);
      sums[static_cast<std::size_t>(k)] += t;
      ++report.pixel_counts[static_cast<std::size_t>(k)];
    }
  }
  for (int k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    report.segment_ids.push_back(first_id(level) + k);
    report.means.push_back(report.pixel_counts[i] ? sums[i] / report.pixel_counts[i] : 0.0);
  }
  return report;
}

Bullseye assemble_17(const SegmentReport& basal, const SegmentReport& mid,
                     const SegmentReport& apical, double apex_value) {
  const auto check = [](const SegmentReport& r, Level expected) {
    const auto n = static_cast<std::size_t>(sector_count(expected));
    if (r.means.size() != n) {
      throw Error(ErrorKind::Shape, fmt::format("{} report needs {} segments, got {}",
                                                level_name(expected), n, r.means.size()));
    }
  };
  check(basal, Level::basal);
  check(mid, Level::mid);
  check(apical, Level::apical);
  if (!(apex_value >= 0.0)) throw Error(ErrorKind::Domain, "apex value must be >= 0");

  Bullseye out;
  std::copy(basal.means.begin(), basal.means.end(), out.means.begin());
  std::copy(mid.means.begin(), mid.means.end(), out.means.begin() + 6);
  std::copy(apical.means.begin(), apical.means.end(), out.means.begin() + 12);
  out.means[16] = apex_value;
  return out;
}

int ramp_index(double value, double lo, double hi) {
  const double t = std::clamp((value - lo) / (hi - lo), 0.0, 1.0);
  return static_cast<int>(std::lround(t * 255.0));
}

std::string bullseye_svg(const Bullseye& report, double lo, double hi) {
  if (!(lo < hi)) throw Error(ErrorKind::Range, fmt::format("color range [{}, {}] is empty", lo, hi));

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"400\" height=\"400\" "
         "viewBox=\"0 0 400 400\">\n";
  svg += "<rect width=\"400\" height=\"400\" fill=\"white\"/>\n";

  std::string labels;
  const auto label = [&](double deg, double r, double value) {
    const double rad = deg * kPi / 180.0;
    labels += fmt::format(
        "<text x=\"{:.3f}\" y=\"{:.3f}\" font-family=\"sans-serif\" font-size=\"12\" "
        "text-anchor=\"middle\" dominant-baseline=\"middle\" fill=\"white\">{:.1f}</text>\n",
        kCenter + r * std::cos(rad), kCenter - r * std::sin(rad), value);
  };

  // Ring 0 is basal (outermost), 2 is apical.
  struct Ring {
    int first;
    int count;
    double r_in;
    double r_out;
  };
  const Ring rings[] = {{0, 6, kRadii[2], kRadii[3]}, {6, 6, kRadii[1], kRadii[2]},
                        {12, 4, kRadii[0], kRadii[1]}};
  for (const Ring& ring : rings) {
    const double width = 360.0 / ring.count;
    for (int k = 0; k < ring.count; ++k) {
      const double a0 = kDefaultReferenceAngle + k * width;
      const double a1 = a0 + width;
      const double v = report.means[static_cast<std::size_t>(ring.first + k)];
      // Outer arc counterclockwise (sweep 0 on screen), inner arc back.
      svg += fmt::format(
          "<path id=\"seg{}\" d=\"M {} A {:.3f} {:.3f} 0 0 0 {} L {} A {:.3f} {:.3f} 0 0 1 {} Z\" "
          "fill=\"{}\" stroke=\"black\" stroke-width=\"1\"/>\n",
          ring.first + k + 1, polar(a0, ring.r_out), ring.r_out, ring.r_out, polar(a1, ring.r_out),
          polar(a1, ring.r_in), ring.r_in, ring.r_in, polar(a0, ring.r_in),
          ramp_color(v, lo, hi));
      label(a0 + width / 2.0, (ring.r_in + ring.r_out) / 2.0, v);
    }
  }
  svg += fmt::format(
      "<circle id=\"seg17\" cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"{:.3f}\" fill=\"{}\" stroke=\"black\" "
      "stroke-width=\"1\"/>\n",
      kCenter, kCenter, kRadii[0], ramp_color(report.means[16], lo, hi));
  label(0.0, 0.0, report.means[16]);

  svg += labels;
  svg += "</svg>\n";
  return svg;
}

std::string bullseye_csv(const Bullseye& report) {
  std::string out = "segment_id,mean_thickness_mm\n";
  for (std::size_t i = 0; i < report.means.size(); ++i) {
    out += fmt::format("{},{:.6f}\n", i + 1, report.means[i]);
  }
  return out;
}

}  // namespace dwt
