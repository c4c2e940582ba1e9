#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace epoc {

/// One `.elp` row: spherical electrode position in degrees.
struct ChannelLocation {
  std::string kind;
  std::string label;
  double theta{0.0};
  double phi{0.0};
  double radius{0.0};
  bool operator==(const ChannelLocation&) const = default;
};

/// The 14 electrode locations in headset channel order (AF3 .. AF4).
struct Montage {
  std::vector<ChannelLocation> locations;
};

/// Unit-head coordinates: x > 0 is right, y > 0 is anterior.
struct Point2 {
  double x{0.0};
  double y{0.0};
};

/// Parses the whitespace-separated `.elp` text: one numeric header line, then
/// `kind label theta phi radius` rows. The header value is discarded.
/// Throws ParseError with the offending line number.
Montage parse_elp(std::string_view text);
Montage load_elp(const std::string& path);
std::string format_elp(const Montage& montage);

/// The stock 14-channel montage shipped with the library.
const Montage& default_montage();
std::string_view default_elp_text();

Point2 project_2d(const ChannelLocation& loc);
std::vector<Point2> project_montage(const Montage& montage);

/// AF3 -> 0 ... AF4 -> 13. Throws std::invalid_argument for unknown labels.
std::size_t channel_index(std::string_view label);

}  // namespace epoc
