#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dwt/streamline.hpp"

namespace dwt {

enum class Level { basal, mid, apical };
enum class Sense { clockwise, counterclockwise };

std::optional<Sense> parse_sense(std::string_view text);

constexpr double kDefaultReferenceAngle = 90.0;

/// Per-sector thickness of one short-axis slice. Angles are in degrees,
/// counterclockwise from +x with y pointing up on screen.
struct SegmentReport {
  Level level = Level::basal;
  /// AHA numbering: basal 1-6, mid 7-12, apical 13-16.
  std::vector<int> segment_ids;
  std::vector<double> means;
  std::vector<std::size_t> pixel_counts;
  double reference_angle = kDefaultReferenceAngle;
  Sense sense = Sense::counterclockwise;
};

int sector_count(Level level);

/// Bins wall pixels (thickness > 0) by angle about the cavity centroid (the
/// wall centroid when there is no cavity). Sector 0 starts at
/// reference_angle and sectors proceed in `sense`. Empty sectors read 0.
SegmentReport segment_slice(const ThicknessMap& map, Level level,
                            double reference_angle = kDefaultReferenceAngle,
                            Sense sense = Sense::counterclockwise);

/// AHA 17-segment means, index 0 holding segment 1.
struct Bullseye {
  std::array<double, 17> means{};
};

/// Throws ShapeError unless the reports carry 6, 6 and 4 sectors.
Bullseye assemble_17(const SegmentReport& basal, const SegmentReport& mid,
                     const SegmentReport& apical, double apex_value);

/// Concentric rings (apex disk, apical 4, mid 6, basal 6), each segment
/// filled from a 256-step blue to red ramp over [lo, hi] and labeled with its
/// value. Segment 1 of each ring starts at the top and rings run
/// counterclockwise. Throws RangeError unless lo < hi.
std::string bullseye_svg(const Bullseye& report, double lo, double hi);

/// Ramp index in [0, 255] for a value clamped to [lo, hi].
int ramp_index(double value, double lo, double hi);

/// `segment_id,mean_thickness_mm` rows.
std::string bullseye_csv(const Bullseye& report);

}  // namespace dwt
