#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dwt/grid.hpp"
#include "dwt/laplace.hpp"
#include "dwt/rng.hpp"
#include "dwt/streamline.hpp"

namespace dwt::test {

/// Wall where r_in <= |p - c| < r_out.
inline BinaryMask annulus(int size, double cx, double cy, double r_in, double r_out,
                          double spacing = 1.0) {
  BinaryMask m(GridGeometry{size, size, spacing});
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double d = std::hypot(x - cx, y - cy);
      if (d >= r_in && d < r_out) m.set_wall(x, y);
    }
  }
  return m;
}

/// The 20/30 px annulus centered on a pixel of an 80 px image.
inline BinaryMask reference_annulus(double spacing = 1.0) {
  return annulus(80, 40.0, 40.0, 20.0, 30.0, spacing);
}

inline BinaryMask disk(int size, double c, double r) {
  BinaryMask m(GridGeometry{size, size, 1.0});
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      if (std::hypot(x - c, y - c) < r) m.set_wall(x, y);
    }
  }
  return m;
}

/// 1-px square outline with top-left corner (x0, x0).
inline BinaryMask square_outline(int size, int x0, int side) {
  BinaryMask m(GridGeometry{size, size, 1.0});
  for (int i = 0; i < side; ++i) {
    m.set_wall(x0 + i, x0);
    m.set_wall(x0 + i, x0 + side - 1);
    m.set_wall(x0, x0 + i);
    m.set_wall(x0 + side - 1, x0 + i);
  }
  return m;
}

/// One row: cavity, `wall` wall pixels, exterior.
inline RegionLabels strip_regions(int wall) {
  RegionLabels r;
  r.labels = Image<Region>(GridGeometry{wall + 2, 1, 1.0}, Region::wall);
  r.labels(0, 0) = Region::cavity;
  r.labels(wall + 1, 0) = Region::exterior;
  r.cavity_count = 1;
  return r;
}

/// Vertical slab of `width` columns starting at x0, rows [y0, y0 + height),
/// left column inner, right column outer.
struct Slab {
  BinaryMask mask;
  Image<BoundaryLabel> labels;
};

inline Slab slab(int size, int x0, int width, int y0, int height) {
  Slab s{BinaryMask(GridGeometry{size, size, 1.0}),
         Image<BoundaryLabel>(GridGeometry{size, size, 1.0}, BoundaryLabel::none)};
  for (int y = y0; y < y0 + height; ++y) {
    for (int x = x0; x < x0 + width; ++x) s.mask.set_wall(x, y);
    s.labels(x0, y) = BoundaryLabel::inner;
    s.labels(x0 + width - 1, y) = BoundaryLabel::outer;
  }
  return s;
}

/// Jacobi fixed point of the ghost-valued stencil: every wall pixel is the
/// mean of its in-image neighbors, cavity reading 1 and exterior 0.
inline Image<double> jacobi_oracle(const RegionLabels& regions, double tol = 1e-15,
                                   int max_iter = 2000000) {
  const GridGeometry& g = regions.geometry();
  Image<double> psi(g, 0.5);
  Image<double> next = psi;
  const int dx[4] = {-1, 1, 0, 0};
  const int dy[4] = {0, 0, -1, 1};
  for (int it = 0; it < max_iter; ++it) {
    double change = 0.0;
    for (int y = 0; y < g.height; ++y) {
      for (int x = 0; x < g.width; ++x) {
        if (regions.labels(x, y) != Region::wall) continue;
        double sum = 0.0;
        int n = 0;
        for (int k = 0; k < 4; ++k) {
          const int nx = x + dx[k];
          const int ny = y + dy[k];
          if (!g.contains(nx, ny)) continue;
          const Region r = regions.labels(nx, ny);
          sum += r == Region::cavity ? 1.0 : r == Region::exterior ? 0.0 : psi(nx, ny);
          ++n;
        }
        next(x, y) = n ? sum / n : psi(x, y);
        change = std::max(change, std::abs(next(x, y) - psi(x, y)));
      }
    }
    std::swap(psi, next);
    if (change < tol) break;
  }
  return psi;
}

/// Brute-force potential-aware inverse-distance fill of one pixel: sort all
/// splatted pixels by squared distance, take k plus any tied with the k-th.
inline double idw_oracle(const ThicknessMap& partial, const PotentialField& psi, int x, int y,
                         int k, double lambda) {
  const GridGeometry& g = partial.geometry();
  struct Q {
    long d2;
    std::size_t idx;
  };
  std::vector<Q> all;
  for (int qy = 0; qy < g.height; ++qy) {
    for (int qx = 0; qx < g.width; ++qx) {
      const std::size_t j = g.index(qx, qy);
      if (partial.assigned[j] != Assignment::splatted) continue;
      all.push_back({static_cast<long>(qx - x) * (qx - x) + static_cast<long>(qy - y) * (qy - y), j});
    }
  }
  std::sort(all.begin(), all.end(), [](const Q& a, const Q& b) {
    return a.d2 != b.d2 ? a.d2 < b.d2 : a.idx < b.idx;
  });
  double ws = 0.0;
  double vs = 0.0;
  const double up = psi.unit(x, y);
  const std::size_t kk = std::min(all.size(), static_cast<std::size_t>(k));
  const long cutoff = all[kk - 1].d2;
  for (std::size_t n = 0; n < all.size() && all[n].d2 <= cutoff; ++n) {
    const double w =
        1.0 / (static_cast<double>(all[n].d2) * (1.0 + lambda * std::abs(up - psi.unit[all[n].idx])));
    ws += w;
    vs += w * partial.thickness[all[n].idx];
  }
  return vs / ws;
}

inline double wall_mean(const ThicknessMap& t, const BinaryMask& m) {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < m.labels().size(); ++i) {
    if (!m.is_wall(i)) continue;
    s += t.thickness[i];
    ++n;
  }
  return n ? s / static_cast<double>(n) : 0.0;
}

/// Random annulus for property tests; returns (mask, r_in, r_out).
struct RandomAnnulus {
  BinaryMask mask;
  double r_in;
  double r_out;
};

inline RandomAnnulus random_annulus(std::uint64_t seed, int size = 64) {
  CounterRng rng(seed);
  const double c = (size - 1) / 2.0;
  const double cx = c + rng.uniform(-3.0, 3.0);
  const double cy = c + rng.uniform(-3.0, 3.0);
  const double r_in = rng.uniform(5.0, 14.0);
  const double r_out = r_in + rng.uniform(3.0, 12.0);
  return {annulus(size, cx, cy, r_in, r_out), r_in, r_out};
}

inline std::string pgm_bytes(int w, int h, const std::vector<std::uint8_t>& data,
                             int maxval = 255) {
  std::string s = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n" +
                  std::to_string(maxval) + "\n";
  s.append(data.begin(), data.end());
  return s;
}

}  // namespace dwt::test
