#include "epoc/channel_layout.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "epoc/errors.hpp"
#include "epoc/recording.hpp"

namespace epoc {
namespace {

constexpr std::string_view kDefaultElp =
    "346\n"
    "     EEG\t     AF3\t -75.803\t -67.539\t      85\n"
    "     EEG\t      F7\t -95.055\t -36.087\t      85\n"
    "     EEG\t      F3\t -62.027\t -50.053\t      85\n"
    "     EEG\t     FC5\t -73.482\t -20.668\t      85\n"
    "     EEG\t      T7\t -95.973\t       0\t      85\n"
    "     EEG\t      P7\t -95.055\t  36.087\t      85\n"
    "     EEG\t      O1\t -92.698\t  72.074\t      85\n"
    "     EEG\t      O2\t  92.698\t -72.074\t      85\n"
    "     EEG\t      P8\t  95.052\t -36.133\t      85\n"
    "     EEG\t      T8\t  95.973\t       0\t      85\n"
    "     EEG\t     FC6\t  73.482\t  20.668\t      85\n"
    "     EEG\t      F4\t   62.01\t  50.103\t      85\n"
    "     EEG\t      F8\t  95.052\t  36.133\t      85\n"
    "     EEG\t     AF4\t  75.803\t  67.539\t      85\n";

double parse_number(const std::string& token, std::size_t line, const char* field) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size() || !std::isfinite(value))
    throw ParseError(line, std::string("non-numeric ") + field + " '" + token + "'");
  return value;
}

}  // namespace

Montage parse_elp(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  Montage montage;
  std::set<std::string> seen;

  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string tok; fields >> tok;) tokens.push_back(tok);
    if (tokens.empty()) continue;
    if (!header_seen) {
      if (tokens.size() != 1) throw ParseError(line_no, "expected a single header value");
      parse_number(tokens[0], line_no, "header");
      header_seen = true;
      continue;
    }
    if (tokens.size() != 5)
      throw ParseError(line_no, "expected 5 fields (kind label theta phi radius), got " +
                                    std::to_string(tokens.size()));
    ChannelLocation loc;
    loc.kind = tokens[0];
    loc.label = tokens[1];
    loc.theta = parse_number(tokens[2], line_no, "theta");
    loc.phi = parse_number(tokens[3], line_no, "phi");
    loc.radius = parse_number(tokens[4], line_no, "radius");
    if (std::abs(loc.theta) > 180.0) throw ParseError(line_no, "theta outside [-180, 180]");
    if (!seen.insert(loc.label).second)
      throw ParseError(line_no, "duplicate channel label '" + loc.label + "'");
    montage.locations.push_back(std::move(loc));
  }
  if (!header_seen) throw ParseError(0, "empty .elp file");
  if (montage.locations.empty()) throw ParseError(0, "no channels");
  if (montage.locations.size() != kNumChannels)
    throw ParseError(0, "expected 14 channels, got " + std::to_string(montage.locations.size()));
  for (std::size_t c = 0; c < kNumChannels; ++c)
    if (montage.locations[c].label != kChannelLabels[c])
      throw ParseError(0, "channel " + std::to_string(c) + " is '" + montage.locations[c].label +
                              "', expected '" + std::string(kChannelLabels[c]) + "'");
  return montage;
}

Montage load_elp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open channel file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_elp(buf.str());
}

std::string format_elp(const Montage& montage) {
  std::ostringstream out;
  out << "346\n";
  for (const auto& loc : montage.locations)
    out << "     " << loc.kind << '\t' << loc.label << '\t' << loc.theta << '\t' << loc.phi
        << '\t' << loc.radius << '\n';
  return out.str();
}

const Montage& default_montage() {
  static const Montage montage = parse_elp(kDefaultElp);
  return montage;
}

std::string_view default_elp_text() { return kDefaultElp; }

Point2 project_2d(const ChannelLocation& loc) {
  const double r = std::abs(loc.theta) / 90.0;
  const double sign = loc.theta < 0.0 ? -1.0 : 1.0;
  const double phi = loc.phi * std::numbers::pi / 180.0;
  return {sign * r * std::cos(phi), sign * r * std::sin(phi)};
}

std::vector<Point2> project_montage(const Montage& montage) {
  std::vector<Point2> points;
  points.reserve(montage.locations.size());
  for (const auto& loc : montage.locations) points.push_back(project_2d(loc));
  return points;
}

std::size_t channel_index(std::string_view label) {
  for (std::size_t c = 0; c < kNumChannels; ++c)
    if (kChannelLabels[c] == label) return c;
  throw std::invalid_argument("unknown channel label '" + std::string(label) + "'");
}

}  // namespace epoc
