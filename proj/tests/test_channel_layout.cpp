#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "epoc/channel_layout.hpp"
#include "epoc/errors.hpp"
#include "epoc/recording.hpp"

using namespace epoc;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::string kElpPath = std::string(EPOC_TEST_DATA_DIR) + "/epoc.elp";

struct Row {
  const char* label;
  double theta, phi;
};

// Transcribed listing values.
const Row kRows[] = {{"AF3", -75.803, -67.539}, {"F7", -95.055, -36.087},
                     {"F3", -62.027, -50.053},  {"FC5", -73.482, -20.668},
                     {"T7", -95.973, 0.0},      {"P7", -95.055, 36.087},
                     {"O1", -92.698, 72.074},   {"O2", 92.698, -72.074},
                     {"P8", 95.052, -36.133},   {"T8", 95.973, 0.0},
                     {"FC6", 73.482, 20.668},   {"F4", 62.01, 50.103},
                     {"F8", 95.052, 36.133},    {"AF4", 75.803, 67.539}};

}  // namespace

TEST_CASE("golden elp file") {
  const auto m = parse_elp(read_file(kElpPath));
  REQUIRE(m.locations.size() == 14);
  for (std::size_t i = 0; i < 14; ++i) {
    const auto& loc = m.locations[i];
    CHECK(loc.kind == "EEG");
    CHECK(loc.label == kRows[i].label);
    CHECK(loc.theta == kRows[i].theta);
    CHECK(loc.phi == kRows[i].phi);
    CHECK(loc.radius == 85.0);
  }
  CHECK(m.locations[0] == ChannelLocation{"EEG", "AF3", -75.803, -67.539, 85});
  CHECK(m.locations[6] == ChannelLocation{"EEG", "O1", -92.698, 72.074, 85});
}

TEST_CASE("embedded montage equals the file") {
  CHECK(default_elp_text() == read_file(kElpPath));
  CHECK(default_montage().locations == load_elp(kElpPath).locations);
  CHECK(parse_elp(format_elp(default_montage())).locations == default_montage().locations);
}

TEST_CASE("projection examples") {
  const auto c = project_2d({"EEG", "X", 0.0, 0.0, 85});
  CHECK(c.x == doctest::Approx(0.0));
  CHECK(c.y == doctest::Approx(0.0));
  const auto t7 = project_2d({"EEG", "T7", -95.973, 0.0, 85});
  CHECK(t7.x == doctest::Approx(-1.066).epsilon(1e-3));
  CHECK(std::abs(t7.y) < 1e-12);
  const auto o1 = project_2d({"EEG", "O1", -92.698, 72.074, 85});
  CHECK(o1.x == doctest::Approx(-0.318).epsilon(2e-3));
  CHECK(o1.y == doctest::Approx(-0.980).epsilon(2e-3));
}

TEST_CASE("projection geometry of the headset") {
  const auto p = project_montage(default_montage());
  for (std::size_t i = 0; i < 7; ++i) {
    const auto& l = p[i];
    const auto& r = p[13 - i];
    CHECK(l.x * r.x < 0.0);
    CHECK(std::abs(std::abs(l.x) - std::abs(r.x)) < 1e-2);
  }
  for (auto label : {"O1", "O2", "P7", "P8"}) CHECK(p[channel_index(label)].y < 0.0);
  for (auto label : {"AF3", "AF4", "F3", "F4", "F7", "F8"}) CHECK(p[channel_index(label)].y > 0.0);
  CHECK(p[channel_index("O1")].x < 0.0);
  CHECK(p[channel_index("O2")].x > 0.0);
}

TEST_CASE("channel index") {
  CHECK(channel_index("AF3") == 0);
  CHECK(channel_index("O2") == 7);
  CHECK(channel_index("AF4") == 13);
  CHECK_THROWS_AS(channel_index("CZ"), std::invalid_argument);
}

TEST_CASE("parse errors") {
  const std::string header = "346\n";
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_elp(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK_THROWS_WITH(parse_elp(header), doctest::Contains("no channels"));
  CHECK(line_of(header + "EEG AF3 -75.803 -67.539\n") == 2);
  CHECK(line_of(header + "EEG AF3 -75.803 abc 85\n") == 2);
  CHECK(line_of(header + "EEG AF3 -75.803 -67.539 85\nEEG AF3 -75.803 -67.539 85\n") == 3);
  CHECK_THROWS_WITH(parse_elp(header + "EEG AF3 -75.803 -67.539 85\nEEG AF3 -75.803 -67.539 85\n"),
                    doctest::Contains("duplicate"));
  CHECK_THROWS_AS(parse_elp("EEG AF3 1 2 3\n"), ParseError);
  CHECK_THROWS_AS(parse_elp(header + "EEG AF3 -75.803 -67.539 85\n"), ParseError);
  CHECK_THROWS_AS(load_elp("/nonexistent/epoc.elp"), IoError);
}
