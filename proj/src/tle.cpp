#include "specorb/tle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace specorb {

namespace {

using Kind = TleError::Kind;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

// 1-based inclusive column range, as in the format definition.
std::string_view cols(std::string_view line, int first, int last) {
  return line.substr(static_cast<std::size_t>(first - 1), static_cast<std::size_t>(last - first + 1));
}

[[noreturn]] void non_numeric(const char* field, std::string_view text) {
  throw TleError(Kind::non_numeric,
                 std::string("TLE field ") + field + " is not numeric: '" + std::string(text) + "'");
}

double to_double(std::string_view text, const char* field, bool blank_is_zero) {
  std::string_view s = trim(text);
  if (s.empty()) {
    if (blank_is_zero) return 0.0;
    non_numeric(field, text);
  }
  std::string buf;
  if (s.front() == '+') s.remove_prefix(1);
  // from_chars does not accept a bare leading '.', so normalise to "0." / "-0.".
  if (!s.empty() && s.front() == '.') {
    buf = "0" + std::string(s);
  } else if (s.size() > 1 && s[0] == '-' && s[1] == '.') {
    buf = "-0" + std::string(s.substr(1));
  } else {
    buf = std::string(s);
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc() || ptr != buf.data() + buf.size()) non_numeric(field, text);
  return v;
}

int to_int(std::string_view text, const char* field, bool blank_is_zero) {
  std::string_view s = trim(text);
  if (s.empty()) {
    if (blank_is_zero) return 0;
    non_numeric(field, text);
  }
  if (s.front() == '+') s.remove_prefix(1);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) non_numeric(field, text);
  return v;
}

// Implied-decimal exponent notation, e.g. " 28098-4" = 0.28098e-4.
double implied_exponent(std::string_view text, const char* field) {
  if (trim(text).empty()) return 0.0;
  const char sign = text[0];
  if (sign != ' ' && sign != '+' && sign != '-') non_numeric(field, text);
  std::string_view mant = trim(text.substr(1, 5));
  const std::string_view exp = text.substr(6, 2);
  std::string digits;
  for (char c : mant) {
    if (c == ' ') {
      digits += '0';
    } else if (c >= '0' && c <= '9') {
      digits += c;
    } else {
      non_numeric(field, text);
    }
  }
  const double m = to_double("0." + digits, field, false);
  const int e = to_int(exp, field, true);
  const double v = m * std::pow(10.0, static_cast<double>(e));
  return sign == '-' ? -v : v;
}

// Implied leading decimal point, e.g. "1859667" = 0.1859667.
double implied_decimal(std::string_view text, const char* field) {
  std::string_view s = trim(text);
  for (char c : s)
    if (c < '0' || c > '9') non_numeric(field, text);
  if (s.empty()) non_numeric(field, text);
  return to_double("0." + std::string(s), field, false);
}

JulianDate epoch_from_tle(int two_digit_year, double day_of_year) {
  const int year = two_digit_year < 57 ? 2000 + two_digit_year : 1900 + two_digit_year;
  // Julian day number of the noon preceding Jan 1, i.e. "Jan 0.5".
  const JulianDate jan1 = julian_day(CalendarTime{year, 1, 1, 0, 0, 0.0});
  // jan1 is midnight of Jan 1 = Jan 0 + 1 day.
  const double f = jan1.fraction + (day_of_year - 1.0);
  return JulianDate::normalized(jan1.day, f);
}

std::string implied_exponent_field(double x) {
  char buf[32];
  if (x == 0.0) return " 00000+0";
  const double ax = std::fabs(x);
  int e = static_cast<int>(std::floor(std::log10(ax))) + 1;
  long long mant = std::llround(ax / std::pow(10.0, e) * 1e5);
  if (mant >= 100000) {
    mant /= 10;
    e += 1;
  }
  if (e > 9 || e < -9) throw TleError(Kind::out_of_range, "exponent field out of range");
  std::snprintf(buf, sizeof buf, "%c%05lld%c%d", x < 0 ? '-' : ' ', mant, e < 0 ? '-' : '+',
                std::abs(e));
  return buf;
}

std::string angle_field(double deg) {
  double r = std::round(deg * 1e4) / 1e4;
  char buf[16];
  std::snprintf(buf, sizeof buf, "%8.4f", r);
  return buf;
}

}  // namespace

double wrap_degrees(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  if (r >= 360.0) r -= 360.0;
  return r;
}

int tle_checksum(std::string_view line) {
  int sum = 0;
  const std::size_t n = std::min<std::size_t>(line.size(), 68);
  for (std::size_t i = 0; i < n; ++i) {
    const char c = line[i];
    if (c >= '0' && c <= '9') {
      sum += c - '0';
    } else if (c == '-') {
      sum += 1;
    }
  }
  return sum % 10;
}

Tle parse_tle(std::string_view line1, std::string_view line2, std::optional<std::string> name) {
  if (line1.size() != 69 || line2.size() != 69)
    throw TleError(Kind::wrong_length, "TLE lines must be exactly 69 columns");
  if (line1[0] != '1' || line2[0] != '2')
    throw TleError(Kind::line_number_mismatch, "TLE line numbers must be 1 and 2");
  for (const auto* line : {&line1, &line2}) {
    const char last = (*line)[68];
    if (last < '0' || last > '9' || tle_checksum(*line) != last - '0')
      throw TleError(Kind::checksum_mismatch,
                     std::string("checksum mismatch on line ") + (*line)[0]);
  }
  if (cols(line1, 3, 7) != cols(line2, 3, 7))
    throw TleError(Kind::catalog_mismatch, "catalog numbers differ between lines");

  Tle t;
  if (name) t.name = std::string(trim(*name));
  t.catalog_number = std::string(cols(line1, 3, 7));
  t.classification = line1[7] == ' ' ? 'U' : line1[7];
  t.intl_designator = std::string(trim(cols(line1, 10, 17)));
  t.epoch_year = to_int(cols(line1, 19, 20), "epoch year", false);
  t.epoch_day = to_double(cols(line1, 21, 32), "epoch day", false);
  t.mean_motion_dot = to_double(cols(line1, 34, 43), "mean motion dot", true);
  t.mean_motion_ddot = implied_exponent(cols(line1, 45, 52), "mean motion ddot");
  t.bstar = implied_exponent(cols(line1, 54, 61), "bstar");
  t.ephemeris_type = to_int(cols(line1, 63, 63), "ephemeris type", true);
  t.element_set_no = to_int(cols(line1, 65, 68), "element set number", true);

  t.inclination = to_double(cols(line2, 9, 16), "inclination", false);
  t.raan = to_double(cols(line2, 18, 25), "raan", false);
  t.eccentricity = implied_decimal(cols(line2, 27, 33), "eccentricity");
  t.arg_perigee = to_double(cols(line2, 35, 42), "argument of perigee", false);
  t.mean_anomaly = to_double(cols(line2, 44, 51), "mean anomaly", false);
  t.mean_motion = to_double(cols(line2, 53, 63), "mean motion", false);
  t.rev_at_epoch = to_int(cols(line2, 64, 68), "revolution number", true);

  if (t.epoch_day < 1.0 || t.epoch_day >= 367.0)
    throw TleError(Kind::out_of_range, "epoch day out of range");
  if (t.inclination < 0.0 || t.inclination > 180.0)
    throw TleError(Kind::out_of_range, "inclination out of range");
  if (t.raan < 0.0 || t.raan >= 360.0 || t.arg_perigee < 0.0 || t.arg_perigee >= 360.0 ||
      t.mean_anomaly < 0.0 || t.mean_anomaly >= 360.0)
    throw TleError(Kind::out_of_range, "angle out of range");
  if (t.mean_motion <= 0.0) throw TleError(Kind::out_of_range, "mean motion must be positive");

  t.epoch = epoch_from_tle(t.epoch_year, t.epoch_day);
  return t;
}

std::pair<std::string, std::string> format_tle(const Tle& t) {
  if (t.catalog_number.size() != 5)
    throw TleError(Kind::out_of_range, "catalog number must be five columns");
  if (std::fabs(t.mean_motion_dot) >= 1.0)
    throw TleError(Kind::out_of_range, "mean motion dot out of range");

  char ndot[32];
  {
    const long long d = std::llround(std::fabs(t.mean_motion_dot) * 1e8);
    std::snprintf(ndot, sizeof ndot, "%c.%08lld", t.mean_motion_dot < 0 ? '-' : ' ', d);
  }
  std::string intl = t.intl_designator.substr(0, 8);
  intl.resize(8, ' ');

  char l1[80];
  std::snprintf(l1, sizeof l1, "1 %5s%c %s %02d%012.8f %s %s %s %1d %4d", t.catalog_number.c_str(),
                t.classification, intl.c_str(), t.epoch_year % 100, t.epoch_day, ndot,
                implied_exponent_field(t.mean_motion_ddot).c_str(),
                implied_exponent_field(t.bstar).c_str(), t.ephemeris_type % 10,
                t.element_set_no % 10000);

  long long ecc = std::llround(t.eccentricity * 1e7);
  ecc = std::clamp(ecc, 0LL, 9999999LL);
  auto wrapped_angle = [](double deg) {
    double r = std::round(deg * 1e4) / 1e4;
    if (r >= 360.0) r -= 360.0;
    return angle_field(r);
  };
  char l2[80];
  std::snprintf(l2, sizeof l2, "2 %5s %s %s %07lld %s %s %11.8f%5d", t.catalog_number.c_str(),
                angle_field(t.inclination).c_str(), wrapped_angle(t.raan).c_str(), ecc,
                wrapped_angle(t.arg_perigee).c_str(), wrapped_angle(t.mean_anomaly).c_str(),
                t.mean_motion, t.rev_at_epoch % 100000);

  std::string a(l1), b(l2);
  if (a.size() != 68 || b.size() != 68)
    throw TleError(Kind::out_of_range, "field overflow while formatting TLE");
  a += static_cast<char>('0' + tle_checksum(a));
  b += static_cast<char>('0' + tle_checksum(b));
  return {a, b};
}

std::vector<Tle> parse_tle_text(std::string_view text) {
  std::vector<std::string> lines;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  std::vector<Tle> out;
  std::optional<std::string> name;
  for (std::size_t i = 0; i < lines.size();) {
    if (lines[i][0] == '1' && i + 1 < lines.size() && lines[i + 1][0] == '2') {
      out.push_back(parse_tle(lines[i], lines[i + 1], name));
      name.reset();
      i += 2;
    } else {
      name = lines[i];
      ++i;
    }
  }
  if (out.empty()) throw TleError(Kind::wrong_length, "no element sets found");
  return out;
}

std::vector<Tle> read_tle_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open TLE file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_tle_text(ss.str());
}

void write_tle_file(const std::string& path, const Tle& tle) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write TLE file: " + path);
  const auto [a, b] = format_tle(tle);
  if (!tle.name.empty()) f << tle.name << '\n';
  f << a << '\n' << b << '\n';
}

Tle perturb(const Tle& tle, const std::map<std::string, double>& delta) {
  Tle t = tle;
  for (const auto& [key, d] : delta) {
    if (key == "inclination") {
      t.inclination = std::clamp(t.inclination + d, 0.0, 180.0);
    } else if (key == "raan") {
      t.raan = wrap_degrees(t.raan + d);
    } else if (key == "eccentricity") {
      t.eccentricity = std::clamp(t.eccentricity + d, 0.0, 0.9999);
    } else if (key == "arg_perigee") {
      t.arg_perigee = wrap_degrees(t.arg_perigee + d);
    } else if (key == "mean_anomaly") {
      t.mean_anomaly = wrap_degrees(t.mean_anomaly + d);
    } else if (key == "mean_motion") {
      t.mean_motion += d;
      if (t.mean_motion <= 0.0) throw TleError(Kind::out_of_range, "mean motion must be positive");
    } else {
      throw TleError(Kind::unknown_element, "unknown orbital element: " + key);
    }
  }
  return t;
}

}  // namespace specorb
