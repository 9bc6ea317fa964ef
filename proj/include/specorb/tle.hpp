#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specorb/errors.hpp"
#include "specorb/time.hpp"

namespace specorb {

/// Parsed two-line element set. Angles in degrees, mean motion in rev/day,
/// derivative terms exactly as printed (rev/day^2 / 2 and rev/day^3 / 6).
struct Tle {
  std::string name;
  std::string catalog_number;  // five columns, passed through verbatim (alpha-5 allowed)
  char classification = 'U';
  std::string intl_designator;
  int epoch_year = 0;       // two-digit year as encoded
  double epoch_day = 0.0;   // fractional day of year
  JulianDate epoch;
  double mean_motion_dot = 0.0;
  double mean_motion_ddot = 0.0;
  double bstar = 0.0;  // 1 / earth radii
  int ephemeris_type = 0;
  int element_set_no = 0;
  double inclination = 0.0;
  double raan = 0.0;
  double eccentricity = 0.0;
  double arg_perigee = 0.0;
  double mean_anomaly = 0.0;
  double mean_motion = 0.0;
  int rev_at_epoch = 0;

  /// Four-digit epoch year.
  int full_epoch_year() const { return epoch_year < 57 ? 2000 + epoch_year : 1900 + epoch_year; }
};

class TleError : public ConfigError {
 public:
  enum class Kind {
    wrong_length,
    non_numeric,
    checksum_mismatch,
    line_number_mismatch,
    catalog_mismatch,
    out_of_range,
    unknown_element,
  };

  TleError(Kind kind, std::string message) : ConfigError(std::move(message)), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Mod-10 checksum over the first 68 columns: digits count their value,
/// '-' counts 1, everything else 0.
int tle_checksum(std::string_view line);

/// Parses a TLE pair. Lines must be exactly 69 columns with valid checksums.
Tle parse_tle(std::string_view line1, std::string_view line2,
              std::optional<std::string> name = std::nullopt);

/// Renders the pair in the fixed-column format with fresh checksums.
std::pair<std::string, std::string> format_tle(const Tle& tle);

/// Reads all element sets from two- or three-line text.
std::vector<Tle> parse_tle_text(std::string_view text);
std::vector<Tle> read_tle_file(const std::string& path);
void write_tle_file(const std::string& path, const Tle& tle);

/// Applies deltas (degrees for angles, rev/day for mean motion). Angles are
/// wrapped to [0, 360), inclination clamped to [0, 180], eccentricity to
/// [0, 0.9999].
Tle perturb(const Tle& tle, const std::map<std::string, double>& delta);

/// Wraps an angle in degrees into [0, 360).
double wrap_degrees(double deg);

}  // namespace specorb
