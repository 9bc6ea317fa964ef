#include <cmath>
#include <numbers>
#include <string>

#include "doctest.h"
#include "reference_data.hpp"
#include "specorb/propagator.hpp"
#include "specorb/tle.hpp"

using namespace specorb;

namespace {

const std::string kIss1 = "1 25544U 98067A   08264.51782528 -.00002182  00000-0 -11606-4 0  2927";
const std::string kIss2 = "2 25544  51.6416 247.4627 0006703 130.5360 325.0288 15.72125391563537";

TleError::Kind kind_of(const std::string& l1, const std::string& l2) {
  try {
    parse_tle(l1, l2);
  } catch (const TleError& e) {
    return e.kind();
  }
  FAIL("expected a TleError");
  return TleError::Kind::unknown_element;
}

}  // namespace

TEST_CASE("checksum examples") {
  CHECK(tle_checksum(std::string(68, '0')) == 0);
  CHECK(tle_checksum(std::string(68, '-')) == 8);
  CHECK(tle_checksum(kIss1) == kIss1.back() - '0');
  CHECK(tle_checksum(kIss2) == kIss2.back() - '0');
}

TEST_CASE("ISS pair decodes") {
  const Tle t = parse_tle(kIss1, kIss2, std::string("ISS (ZARYA)"));
  CHECK(t.name == "ISS (ZARYA)");
  CHECK(t.catalog_number == "25544");
  CHECK(t.classification == 'U');
  CHECK(t.intl_designator == "98067A");
  CHECK(t.eccentricity == std::stoi(kIss2.substr(26, 7)) / 1e7);
  CHECK(t.inclination == 51.6416);
  CHECK(t.raan == 247.4627);
  CHECK(t.arg_perigee == 130.5360);
  CHECK(t.mean_anomaly == 325.0288);
  CHECK(t.mean_motion == 15.72125391);
  CHECK(t.rev_at_epoch == 56353);
  CHECK(t.epoch_year == 8);
  CHECK(t.full_epoch_year() == 2008);
  CHECK(t.mean_motion_dot == doctest::Approx(-0.00002182).epsilon(1e-12));
  CHECK(t.bstar == doctest::Approx(-0.11606e-4).epsilon(1e-12));
  CHECK(t.element_set_no == 292);
}

TEST_CASE("malformed pairs raise distinct variants") {
  std::string bad = kIss1;
  bad.back() = '8';
  CHECK(kind_of(bad, kIss2) == TleError::Kind::checksum_mismatch);
  CHECK(kind_of(kIss1.substr(0, 68), kIss2) == TleError::Kind::wrong_length);
  CHECK(kind_of(kIss2, kIss1) == TleError::Kind::line_number_mismatch);

  std::string other = kIss2;
  other[6] = '5';  // catalog 25545
  other.back() = static_cast<char>('0' + tle_checksum(other));
  CHECK(kind_of(kIss1, other) == TleError::Kind::catalog_mismatch);

  std::string letters = kIss2;
  letters[9] = 'x';  // inside the inclination field
  letters.back() = static_cast<char>('0' + tle_checksum(letters));
  CHECK(kind_of(kIss1, letters) == TleError::Kind::non_numeric);
}

TEST_CASE("two-digit years map to 1957-2056") {
  std::string l1 = kIss1;
  l1.replace(18, 2, "57");
  l1.back() = static_cast<char>('0' + tle_checksum(l1));
  CHECK(parse_tle(l1, kIss2).full_epoch_year() == 1957);
  l1.replace(18, 2, "56");
  l1.back() = static_cast<char>('0' + tle_checksum(l1));
  CHECK(parse_tle(l1, kIss2).full_epoch_year() == 2056);
}

TEST_CASE("verification catalogue decodes like the oracle parser") {
  const auto catalogue = testdata::load_catalogue();
  const auto fields = testdata::load_tle_fields();
  constexpr double d2r = std::numbers::pi / 180.0;
  int compared = 0;
  for (const auto& e : catalogue) {
    if (!e.checksum_ok) continue;
    const auto it = fields.find(e.tle.catalog_number);
    if (it == fields.end()) continue;
    const auto& f = it->second;
    const Tle& t = e.tle;
    INFO("catalog " << t.catalog_number);
    CHECK(t.mean_motion / kXpdotp == doctest::Approx(f.at("no_kozai")).epsilon(1e-15));
    CHECK(t.eccentricity == f.at("ecco"));
    CHECK(t.inclination * d2r == doctest::Approx(f.at("inclo")).epsilon(1e-15));
    CHECK(t.raan * d2r == doctest::Approx(f.at("nodeo")).epsilon(1e-15));
    CHECK(t.arg_perigee * d2r == doctest::Approx(f.at("argpo")).epsilon(1e-15));
    CHECK(t.mean_anomaly * d2r == doctest::Approx(f.at("mo")).epsilon(1e-15));
    CHECK(t.bstar == doctest::Approx(f.at("bstar")).epsilon(1e-14));
    CHECK(t.mean_motion_dot / (kXpdotp * 1440.0) == doctest::Approx(f.at("ndot")).epsilon(1e-14));
    CHECK(t.epoch_year == static_cast<int>(f.at("epochyr")));
    CHECK(t.epoch_day == f.at("epochdays"));
    CHECK(std::fabs(t.epoch.jd() - (f.at("jdsatepoch") + f.at("jdsatepochF"))) < 1e-8);
    ++compared;
  }
  CHECK(compared >= 25);
}

TEST_CASE("serialise round trip is stable") {
  const auto catalogue = testdata::load_catalogue();
  for (const auto& e : catalogue) {
    if (!e.checksum_ok) continue;
    const auto [a1, a2] = format_tle(e.tle);
    REQUIRE(a1.size() == 69);
    REQUIRE(a2.size() == 69);
    CHECK(tle_checksum(a1) == a1.back() - '0');
    CHECK(tle_checksum(a2) == a2.back() - '0');
    const Tle once = parse_tle(a1, a2);
    const auto [b1, b2] = format_tle(once);
    CHECK(a1 == b1);
    CHECK(a2 == b2);
    const Tle twice = parse_tle(b1, b2);
    CHECK(once.eccentricity == twice.eccentricity);
    CHECK(once.inclination == twice.inclination);
    CHECK(once.raan == twice.raan);
    CHECK(once.arg_perigee == twice.arg_perigee);
    CHECK(once.mean_anomaly == twice.mean_anomaly);
    CHECK(once.mean_motion == twice.mean_motion);
    CHECK(once.bstar == twice.bstar);
    CHECK(once.epoch == twice.epoch);
  }
  const Tle iss = parse_tle(kIss1, kIss2);
  const auto [i1, i2] = format_tle(iss);
  CHECK(i1.substr(0, 44) == kIss1.substr(0, 44));
  CHECK(i1.substr(53, 15) == kIss1.substr(53, 15));
  CHECK(i2 == kIss2);
}

TEST_CASE("perturb applies, wraps and clamps") {
  const Tle iss = parse_tle(kIss1, kIss2);
  const Tle a = perturb(iss, {{"mean_anomaly", -0.1}});
  CHECK(a.mean_anomaly == doctest::Approx(325.0288 - 0.1).epsilon(1e-14));
  CHECK(a.inclination == iss.inclination);
  CHECK(a.raan == iss.raan);
  CHECK(a.eccentricity == iss.eccentricity);

  const Tle b = perturb(iss, {{"mean_anomaly", -360.0}});
  CHECK(b.mean_anomaly == doctest::Approx(iss.mean_anomaly).epsilon(1e-14));

  Tle c = iss;
  c.eccentricity = 0.0005;
  CHECK(perturb(c, {{"eccentricity", -0.001}}).eccentricity == 0.0);
  CHECK(perturb(c, {{"eccentricity", 2.0}}).eccentricity == 0.9999);

  try {
    perturb(iss, {{"semi_major_axis", 1.0}});
    FAIL("expected unknown element");
  } catch (const TleError& e) {
    CHECK(e.kind() == TleError::Kind::unknown_element);
  }
}

TEST_CASE("text with names and blank lines") {
  const std::string text = "ISS (ZARYA)\n" + kIss1 + "\r\n" + kIss2 + "\n\n" + kIss1 + "\n" + kIss2 + "\n";
  const auto v = parse_tle_text(text);
  REQUIRE(v.size() == 2);
  CHECK(v[0].name == "ISS (ZARYA)");
  CHECK(v[1].name.empty());
}
