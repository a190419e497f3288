#include "dwt/streamline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

namespace dwt {

namespace {

// Normalized-potential margin for the level-set stopping rule.
constexpr double kLevelMargin = 1e-6;

enum class Direction { down, up };

struct Cell {
  int x;
  int y;
};

Cell cell_of(Point p) {
  return {static_cast<int>(std::floor(p.x + 0.5)), static_cast<int>(std::floor(p.y + 0.5))};
}

template <typename Accept, typename Value>
std::optional<std::pair<double, double>> bilinear(const GridGeometry& g, Point p, Accept accept,
                                                  Value value) {
  const double fx0 = std::floor(p.x);
  const double fy0 = std::floor(p.y);
  const int x0 = static_cast<int>(fx0);
  const int y0 = static_cast<int>(fy0);
  const double fx = p.x - fx0;
  const double fy = p.y - fy0;
  const struct {
    int x, y;
    double w;
  } corners[4] = {{x0, y0, (1.0 - fx) * (1.0 - fy)},
                  {x0 + 1, y0, fx * (1.0 - fy)},
                  {x0, y0 + 1, (1.0 - fx) * fy},
                  {x0 + 1, y0 + 1, fx * fy}};
  double wsum = 0.0;
  double ax = 0.0;
  double ay = 0.0;
  for (const auto& c : corners) {
    if (c.w <= 0.0 || !g.contains(c.x, c.y) || !accept(c.x, c.y)) continue;
    const auto [vx, vy] = value(c.x, c.y);
    ax += c.w * vx;
    ay += c.w * vy;
    wsum += c.w;
  }
  if (wsum <= 0.0) return std::nullopt;
  return std::make_pair(ax / wsum, ay / wsum);
}

std::optional<Vec2> interpolate_tangent(const TangentField& tf, Point p) {
  const auto v = bilinear(
      tf.geometry(), p, [&](int x, int y) { return tf.defined(x, y) != 0; },
      [&](int x, int y) { return std::make_pair(tf.vectors(x, y).x, tf.vectors(x, y).y); });
  if (!v) return std::nullopt;
  const double norm = std::hypot(v->first, v->second);
  if (norm < 1e-12) return std::nullopt;
  return Vec2{v->first / norm, v->second / norm};
}

std::optional<double> interpolate_unit(const PotentialField& psi, Point p) {
  const auto v = bilinear(
      psi.geometry(), p, [&](int x, int y) { return carries_value(psi.nodes(x, y)); },
      [&](int x, int y) { return std::make_pair(psi.unit(x, y), 0.0); });
  if (!v) return std::nullopt;
  return v->first;
}

// Bilinear interpolation of the 0/1 wall indicator (out-of-image reads 0).
// Its 0.5 level set is the sub-pixel wall contour.
double wall_indicator(const PotentialField& psi, Point p) {
  const GridGeometry& g = psi.geometry();
  const double fx0 = std::floor(p.x);
  const double fy0 = std::floor(p.y);
  const int x0 = static_cast<int>(fx0);
  const int y0 = static_cast<int>(fy0);
  const double fx = p.x - fx0;
  const double fy = p.y - fy0;
  const auto wall = [&](int x, int y) { return g.contains(x, y) && psi.is_wall(x, y) ? 1.0 : 0.0; };
  return (1.0 - fx) * (1.0 - fy) * wall(x0, y0) + fx * (1.0 - fy) * wall(x0 + 1, y0) +
         (1.0 - fx) * fy * wall(x0, y0 + 1) + fx * fy * wall(x0 + 1, y0 + 1);
}

// Non-wall pixel center nearest to p (the side the path is leaving to).
Cell dominant_outside_cell(const PotentialField& psi, Point p) {
  const GridGeometry& g = psi.geometry();
  const int x0 = static_cast<int>(std::floor(p.x));
  const int y0 = static_cast<int>(std::floor(p.y));
  Cell best{x0, y0};
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int dy = 0; dy <= 1; ++dy) {
    for (int dx = 0; dx <= 1; ++dx) {
      const int cx = x0 + dx;
      const int cy = y0 + dy;
      if (g.contains(cx, cy) && psi.is_wall(cx, cy)) continue;
      const double d2 = (p.x - cx) * (p.x - cx) + (p.y - cy) * (p.y - cy);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = {cx, cy};
      }
    }
  }
  return best;
}

// Wall indicator (union of unit pixel squares) convolved with an isotropic
// Gaussian, evaluated exactly via the normal CDF.
constexpr double kContourSigma = 1.0;

double smoothed_indicator(const PotentialField& psi, Point p) {
  const GridGeometry& g = psi.geometry();
  const int reach = static_cast<int>(std::ceil(3.0 * kContourSigma)) + 1;
  const int cx = static_cast<int>(std::lround(p.x));
  const int cy = static_cast<int>(std::lround(p.y));
  const double scale = 1.0 / (kContourSigma * std::sqrt(2.0));
  const auto cell_mass = [scale](double offset) {
    return 0.5 * (std::erf((offset + 0.5) * scale) - std::erf((offset - 0.5) * scale));
  };
  double wx[16];
  double wy[16];
  for (int k = -reach; k <= reach; ++k) {
    wx[k + reach] = cell_mass(p.x - (cx + k));
    wy[k + reach] = cell_mass(p.y - (cy + k));
  }
  double sum = 0.0;
  for (int dy = -reach; dy <= reach; ++dy) {
    const int y = cy + dy;
    if (y < 0 || y >= g.height) continue;
    double row = 0.0;
    for (int dx = -reach; dx <= reach; ++dx) {
      const int x = cx + dx;
      if (x >= 0 && x < g.width && psi.is_wall(x, y)) row += wx[dx + reach];
    }
    sum += row * wy[dy + reach];
  }
  return sum;
}

// Moves the last point of a path that left the wall onto the half-plateau
// level of the smoothed indicator, searched within one pixel along the final
// direction.
// Paths through features too thin to reach the level keep their raw end.
void refine_endpoint(const PotentialField& psi, std::vector<Point>& points, double step) {
  if (points.size() < 2) return;
  const Point end = points.back();
  const Point prev = points[points.size() - 2];
  double dx = end.x - prev.x;
  double dy = end.y - prev.y;
  const double len = std::hypot(dx, dy);
  if (len <= 0.0) return;
  dx /= len;
  dy /= len;
  // Half of the plateau just inside the end. Next to a wall edge that runs
  // along the path the plateau drops below 1, and a fixed 0.5 level would
  // pull the end inward.
  double plateau = 0.0;
  for (int k = 0; k <= 12; ++k) {
    plateau = std::max(plateau, smoothed_indicator(psi, {end.x - 0.25 * k * dx, end.y - 0.25 * k * dy}));
  }
  const double level = 0.5 * plateau;
  const auto f = [&](double s) {
    return smoothed_indicator(psi, {end.x + s * dx, end.y + s * dy}) - level;
  };
  double lo = -1.0;
  double hi = 1.0;
  if (!(f(lo) > 0.0 && f(hi) < 0.0)) return;
  if (f(0.0) > 0.0) {
    lo = 0.0;
  } else {
    hi = 0.0;
  }
  for (int i = 0; i < 40; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double s_end = 0.5 * (lo + hi);

  points.pop_back();
  // Drop points that lie beyond the refined end.
  while (points.size() > 1) {
    const Point& q = points.back();
    if ((q.x - end.x) * dx + (q.y - end.y) * dy < s_end) break;
    points.pop_back();
  }
  const Point target{end.x + s_end * dx, end.y + s_end * dy};
  const Point last = points.back();
  const double gap = std::hypot(target.x - last.x, target.y - last.y);
  const int pieces = std::max(1, static_cast<int>(std::ceil(gap / step)));
  for (int k = 1; k < pieces; ++k) {
    const double t = static_cast<double>(k) / pieces;
    points.push_back({last.x + t * (target.x - last.x), last.y + t * (target.y - last.y)});
  }
  points.push_back(target);
}

Point lerp(Point a, Point b, double t) { return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}; }

Streamline trace_directed(const TangentField& tf, const PotentialField& psi, Point start,
                          const SolverConfig& cfg, Direction dir) {
  const GridGeometry& g = psi.geometry();
  Streamline line;
  line.points.push_back(start);

  const Cell c0 = cell_of(start);
  if (!g.contains(c0.x, c0.y) || !psi.is_wall(c0.x, c0.y) || !tf.defined(c0.x, c0.y) ||
      !interpolate_tangent(tf, start)) {
    line.terminated_by = Termination::undefined_field;
    return line;
  }

  const double sign = dir == Direction::down ? -1.0 : 1.0;
  const Node target_ghost = dir == Direction::down ? Node::exterior : Node::cavity;
  const Node target_pinned = dir == Direction::down ? Node::pinned_outer : Node::pinned_inner;

  const auto finish = [&](Point clipped, Termination why) {
    line.points.push_back(clipped);
    line.terminated_by = why;
  };

  Point p = start;
  double u_prev = interpolate_unit(psi, p).value_or(0.5);
  double w_prev = wall_indicator(psi, p);
  line.terminated_by = Termination::max_steps;
  for (int step = 0; step < cfg.max_steps; ++step) {
    const auto n = interpolate_tangent(tf, p);
    if (!n) {
      line.terminated_by = Termination::undefined_field;
      break;
    }
    const Point q{p.x + sign * n->x * cfg.step, p.y + sign * n->y * cfg.step};
    const Cell from = cell_of(p);
    const double w_next = wall_indicator(psi, q);
    if (w_next < 0.5) {
      const double t = std::clamp((w_prev - 0.5) / (w_prev - w_next), 0.0, 1.0);
      const Point clipped = lerp(p, q, t);
      const Cell outside = dominant_outside_cell(psi, q);
      bool reached = false;
      if (g.contains(outside.x, outside.y)) {
        reached = psi.ghost_mode ? psi.nodes(outside.x, outside.y) == target_ghost
                                 : psi.nodes(from.x, from.y) == target_pinned;
      }
      finish(clipped, reached ? Termination::reached_outer : Termination::left_wall);
      refine_endpoint(psi, line.points, cfg.step);
      break;
    }
    if (psi.ghost_mode) {
      const double u = interpolate_unit(psi, q).value_or(u_prev);
      const bool crossed = dir == Direction::down ? u <= kLevelMargin : u >= 1.0 - kLevelMargin;
      if (crossed) {
        const double level = dir == Direction::down ? kLevelMargin : 1.0 - kLevelMargin;
        const double t = u_prev != u ? std::clamp((u_prev - level) / (u_prev - u), 0.0, 1.0) : 1.0;
        finish(lerp(p, q, t), Termination::reached_outer);
        break;
      }
      u_prev = u;
    }
    line.points.push_back(q);
    p = q;
    w_prev = w_next;
  }
  line.arc_length = polyline_length(line.points, g.spacing);
  return line;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point& mark) {
  const auto now = Clock::now();
  const double s = std::chrono::duration<double>(now - mark).count();
  mark = now;
  return s;
}

MeasureResult finish_measure(const BinaryMask& mask, PotentialField field,
                             const std::vector<Pixel>& inner_seeds,
                             const std::vector<Pixel>& outer_seeds, const SolverConfig& cfg,
                             StageTimings timings, Clock::time_point mark) {
  MeasureResult result;
  const TangentField tf = tangent_field(field, cfg);
  timings.tangent = seconds_since(mark);

  const auto seed_point = [](Pixel s) {
    return Point{static_cast<double>(s.x), static_cast<double>(s.y)};
  };
  std::vector<Streamline> lines;
  lines.reserve(inner_seeds.size());
  for (const Pixel& s : inner_seeds) lines.push_back(trace_across(tf, field, seed_point(s), cfg));

  // Outer-contour pixels missed by every inner streamline seed their own
  // streamline; this covers the divergent outer rim.
  const ThicknessMap first_pass = splat(lines, mask);
  for (const Pixel& s : outer_seeds) {
    if (first_pass.assigned(s.x, s.y) == Assignment::splatted) continue;
    lines.push_back(trace_across(tf, field, seed_point(s), cfg));
  }
  timings.tracing = seconds_since(mark);

  const ThicknessMap partial = splat(lines, mask);
  timings.splat = seconds_since(mark);

  result.thickness = fill_missing(partial, field, cfg);
  timings.fill = seconds_since(mark);

  result.streamlines = lines.size();
  for (std::size_t i = 0; i < result.thickness.assigned.size(); ++i) {
    if (result.thickness.assigned[i] == Assignment::splatted) ++result.splatted;
    if (result.thickness.assigned[i] == Assignment::interpolated) ++result.interpolated;
  }
  result.potential = std::move(field);
  result.timings = timings;
  return result;
}

}  // namespace

const char* to_string(Termination t) {
  switch (t) {
    case Termination::reached_outer: return "reached_outer";
    case Termination::left_wall: return "left_wall";
    case Termination::max_steps: return "max_steps";
    case Termination::undefined_field: return "undefined_field";
  }
  return "unknown";
}

Image<float> ThicknessMap::to_float() const {
  Image<float> out(geometry());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(thickness[i]);
  return out;
}

Image<std::uint8_t> ThicknessMap::flag_image() const {
  Image<std::uint8_t> out(geometry(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (assigned[i] == Assignment::interpolated) out[i] = 128;
    if (assigned[i] == Assignment::splatted) out[i] = 255;
  }
  return out;
}

ThicknessMap ThicknessMap::from_float(const Image<float>& values) {
  ThicknessMap map(values.geometry());
  for (std::size_t i = 0; i < values.size(); ++i) {
    map.thickness[i] = values[i];
    if (values[i] > 0.0f) map.assigned[i] = Assignment::splatted;
  }
  return map;
}

double polyline_length(std::span<const Point> points, double spacing) {
  double sum = 0.0;
  for (std::size_t n = 1; n < points.size(); ++n) {
    const double dx = points[n].x - points[n - 1].x;
    const double dy = points[n].y - points[n - 1].y;
    sum += std::sqrt(dx * dx + dy * dy);
  }
  return sum * spacing;
}

Streamline trace(const TangentField& tf, const PotentialField& psi, Point start,
                 const SolverConfig& cfg) {
  return trace_directed(tf, psi, start, cfg, Direction::down);
}

Streamline trace_across(const TangentField& tf, const PotentialField& psi, Point seed,
                        const SolverConfig& cfg) {
  Streamline up = trace_directed(tf, psi, seed, cfg, Direction::up);
  Streamline down = trace_directed(tf, psi, seed, cfg, Direction::down);

  Streamline line;
  line.points.assign(up.points.rbegin(), up.points.rend());
  line.points.insert(line.points.end(), down.points.begin() + 1, down.points.end());
  line.arc_length = polyline_length(line.points, psi.geometry().spacing);

  const auto failed = [](Termination t) {
    return t == Termination::undefined_field || t == Termination::max_steps;
  };
  if (failed(up.terminated_by)) {
    line.terminated_by = up.terminated_by;
  } else if (failed(down.terminated_by)) {
    line.terminated_by = down.terminated_by;
  } else if (up.terminated_by == Termination::reached_outer &&
             down.terminated_by == Termination::reached_outer) {
    line.terminated_by = Termination::reached_outer;
  } else {
    line.terminated_by = Termination::left_wall;
  }
  if (line.terminated_by == Termination::undefined_field && up.points.size() == 1) {
    line.arc_length = 0.0;
  }
  return line;
}

ThicknessMap splat(std::span<const Streamline> streamlines, const BinaryMask& wall) {
  const GridGeometry& g = wall.geometry();
  Image<double> sum(g, 0.0);
  Image<std::uint32_t> count(g, 0);
  std::vector<std::size_t> touched;
  for (const Streamline& line : streamlines) {
    if (line.terminated_by != Termination::reached_outer &&
        line.terminated_by != Termination::left_wall) {
      continue;
    }
    touched.clear();
    for (const Point& p : line.points) {
      const Cell c = cell_of(p);
      if (g.contains(c.x, c.y) && wall.is_wall(c.x, c.y)) touched.push_back(g.index(c.x, c.y));
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    for (std::size_t i : touched) {
      sum[i] += line.arc_length;
      ++count[i];
    }
  }
  ThicknessMap map(g);
  for (std::size_t i = 0; i < g.pixel_count(); ++i) {
    if (count[i] == 0) continue;
    map.thickness[i] = sum[i] / count[i];
    map.assigned[i] = Assignment::splatted;
  }
  return map;
}

ThicknessMap fill_missing(const ThicknessMap& partial, const PotentialField& psi,
                          const SolverConfig& cfg) {
  const GridGeometry& g = partial.geometry();
  if (psi.geometry().width != g.width || psi.geometry().height != g.height) {
    throw Error(ErrorKind::Dimension, "thickness map and potential differ in size");
  }
  std::size_t splatted = 0;
  for (std::size_t i = 0; i < g.pixel_count(); ++i) {
    if (partial.assigned[i] == Assignment::splatted) ++splatted;
  }
  if (splatted == 0) {
    throw Error(ErrorKind::InterpolationImpossible, "no wall pixel received a streamline");
  }

  ThicknessMap out = partial;
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(cfg.fill_k), splatted);
  const int max_radius = std::max(g.width, g.height);
  struct Candidate {
    long d2;
    std::size_t index;
    bool operator<(const Candidate& o) const { return d2 != o.d2 ? d2 < o.d2 : index < o.index; }
  };
  std::vector<Candidate> found;

  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const std::size_t i = g.index(x, y);
      if (!psi.is_wall(x, y)) {
        out.thickness[i] = 0.0;
        out.assigned[i] = Assignment::zero;
        continue;
      }
      if (partial.assigned[i] != Assignment::zero) continue;

      // Expanding square rings; stop once no unvisited cell can be closer
      // than the current k-th candidate.
      found.clear();
      for (int r = 1; r <= max_radius; ++r) {
        for (int dy = -r; dy <= r; ++dy) {
          const int step = (dy == -r || dy == r) ? 1 : 2 * r;
          for (int dx = -r; dx <= r; dx += step) {
            const int nx = x + dx;
            const int ny = y + dy;
            if (!g.contains(nx, ny)) continue;
            const std::size_t j = g.index(nx, ny);
            if (partial.assigned[j] != Assignment::splatted) continue;
            found.push_back({static_cast<long>(dx) * dx + static_cast<long>(dy) * dy, j});
          }
        }
        if (found.size() >= k) {
          std::nth_element(found.begin(), found.begin() + static_cast<long>(k - 1), found.end());
          const long kth = found[k - 1].d2;
          if (kth < static_cast<long>(r + 1) * (r + 1)) break;
        }
      }
      // Every candidate tied with the k-th one is kept, so the set does not
      // depend on scan order and the fill commutes with rotating the mask.
      std::sort(found.begin(), found.end());
      const long cutoff = found[k - 1].d2;
      double wsum = 0.0;
      double vsum = 0.0;
      const double up = psi.unit[i];
      for (const Candidate& c : found) {
        if (c.d2 > cutoff) break;
        const double w =
            1.0 / (static_cast<double>(c.d2) * (1.0 + cfg.fill_lambda * std::abs(up - psi.unit[c.index])));
        wsum += w;
        vsum += w * partial.thickness[c.index];
      }
      out.thickness[i] = vsum / wsum;
      out.assigned[i] = Assignment::interpolated;
    }
  }
  return out;
}

MeasureResult measure_detailed(const BinaryMask& mask, const SolverConfig& cfg) {
  cfg.validate();
  mask.geometry().validate();
  auto mark = Clock::now();
  StageTimings timings;
  const RegionLabels regions = label_regions(mask);
  const BoundaryConditions bc = extract_boundaries(regions, cfg.psi_inner);
  timings.labels = seconds_since(mark);
  PotentialField field = solve_laplace(regions, bc, cfg);
  timings.laplace = seconds_since(mark);
  return finish_measure(mask, std::move(field), bc.inner, bc.outer, cfg, timings, mark);
}

MeasureResult measure_detailed(const BinaryMask& mask, const Image<BoundaryLabel>& boundaries,
                               const SolverConfig& cfg) {
  cfg.validate();
  mask.geometry().validate();
  auto mark = Clock::now();
  StageTimings timings;
  PotentialField field = solve_laplace_pinned(mask, boundaries, cfg);
  timings.laplace = seconds_since(mark);
  std::vector<Pixel> inner;
  std::vector<Pixel> outer;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (field.nodes(x, y) == Node::pinned_inner) inner.push_back({x, y});
      if (field.nodes(x, y) == Node::pinned_outer) outer.push_back({x, y});
    }
  }
  return finish_measure(mask, std::move(field), inner, outer, cfg, timings, mark);
}

ThicknessMap measure(const BinaryMask& mask, const SolverConfig& cfg) {
  return measure_detailed(mask, cfg).thickness;
}

ThicknessMap measure_with_boundaries(const BinaryMask& mask,
                                     const Image<BoundaryLabel>& boundaries,
                                     const SolverConfig& cfg) {
  return measure_detailed(mask, boundaries, cfg).thickness;
}

}  // namespace dwt
