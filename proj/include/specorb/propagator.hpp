#pragma once

// Near-Earth SGP4, generic over the scalar type.
//
// The algorithm follows the published Vallado/Crawford/Hujsak/Kelso (2006)
// revision of Spacetrack Report #3, operation mode 'i'. Instantiated with a
// Dual scalar, the initialisation and the propagation are both differentiated
// with respect to whichever mean elements were seeded.

#include <array>
#include <cmath>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specorb/autodiff.hpp"
#include "specorb/errors.hpp"
#include "specorb/time.hpp"
#include "specorb/tle.hpp"
#include "specorb/vec3.hpp"

namespace specorb {

enum class GravityModel { wgs72, wgs84 };

struct GravityConstants {
  double tumin;
  double mu;             // km^3/s^2
  double radiusearthkm;  // km
  double xke;
  double j2, j3, j4, j3oj2;
};

GravityConstants gravity_constants(GravityModel model);

/// Result codes; 1..6 carry the reference implementation's numbering.
enum class Sgp4Status {
  ok = 0,
  mean_elements = 1,       // mean eccentricity outside [-0.001, 1)
  mean_motion = 2,         // mean motion <= 0
  perturbed_elements = 3,  // perturbed eccentricity outside [0, 1]
  semi_latus_rectum = 4,   // semi-latus rectum < 0
  suborbital = 5,
  decayed = 6,             // radius below the Earth's surface
  deep_space = 7,          // period >= 225 min, outside this propagator's regime
  kepler = 8,              // Kepler iteration did not converge
};

const char* describe(Sgp4Status s);

class PropagationError : public NumericError {
 public:
  PropagationError(Sgp4Status status, std::string message)
      : NumericError(std::move(message)), status_(status) {}
  Sgp4Status status() const noexcept { return status_; }

 private:
  Sgp4Status status_;
};

/// The six classical elements that may be seeded or optimised.
enum class ElementId { inclination, raan, eccentricity, arg_perigee, mean_anomaly, mean_motion };

inline constexpr std::array<ElementId, 6> kAllElements = {
    ElementId::inclination, ElementId::raan,         ElementId::eccentricity,
    ElementId::arg_perigee, ElementId::mean_anomaly, ElementId::mean_motion};

const char* element_name(ElementId id);
ElementId element_from_name(const std::string& name);

/// SGP4 mean elements in propagator units: radians, rad/min (Kozai).
template <Scalar T>
struct MeanElements {
  JulianDate epoch;
  T inclination{};
  T raan{};
  T eccentricity{};
  T arg_perigee{};
  T mean_anomaly{};
  T mean_motion{};
  double bstar = 0.0;
  double ndot = 0.0;   // rad/min^2
  double nddot = 0.0;  // rad/min^3

  T& operator[](ElementId id) {
    switch (id) {
      case ElementId::inclination: return inclination;
      case ElementId::raan: return raan;
      case ElementId::eccentricity: return eccentricity;
      case ElementId::arg_perigee: return arg_perigee;
      case ElementId::mean_anomaly: return mean_anomaly;
      case ElementId::mean_motion: break;
    }
    return mean_motion;
  }
  const T& operator[](ElementId id) const { return const_cast<MeanElements&>(*this)[id]; }
};

inline constexpr double kMinutesPerDay = 1440.0;
/// rev/day -> rad/min divisor used by the TLE conversion.
inline constexpr double kXpdotp = 1440.0 / (2.0 * std::numbers::pi);

MeanElements<double> elements_from_tle(const Tle& tle);

/// Writes propagator-unit elements back into a TLE (degrees, rev/day).
Tle tle_from_elements(const Tle& base, const MeanElements<double>& e);

template <Scalar T>
MeanElements<T> lift_elements(const MeanElements<double>& e) {
  MeanElements<T> out;
  out.epoch = e.epoch;
  for (ElementId id : kAllElements) out[id] = T(e[id]);
  out.bstar = e.bstar;
  out.ndot = e.ndot;
  out.nddot = e.nddot;
  return out;
}

template <Scalar T>
MeanElements<double> primal_elements(const MeanElements<T>& e) {
  MeanElements<double> out;
  out.epoch = e.epoch;
  for (ElementId id : kAllElements) out[id] = value_of(e[id]);
  out.bstar = e.bstar;
  out.ndot = e.ndot;
  out.nddot = e.nddot;
  return out;
}

template <Scalar T>
struct StateVector {
  double t_min = 0.0;  // minutes since element epoch
  Vec3<T> position;    // km, TEME
  Vec3<T> velocity;    // km/s, TEME
};

template <Scalar T>
struct PropagationResult {
  Sgp4Status status = Sgp4Status::ok;
  int kepler_iterations = 0;
  StateVector<T> state;
};

/// Initialised SGP4 model. Immutable after construction.
template <Scalar T>
class Sgp4Model {
 public:
  /// Throws PropagationError for deep-space or non-physical elements.
  static Sgp4Model init(const MeanElements<T>& elements, GravityModel gravity = GravityModel::wgs72);

  /// Propagates and throws on any non-ok status.
  StateVector<T> propagate(double tsince_min) const;

  /// Propagates and reports the status instead of throwing. The state is
  /// filled whenever the geometry could be computed (including decay).
  PropagationResult<T> propagate_checked(double tsince_min) const;

  const MeanElements<T>& elements() const { return elements_; }
  /// Brouwer ("un-Kozai'd") mean motion, rad/min.
  const T& unkozai_mean_motion() const { return no_unkozai_; }
  /// Orbital period at epoch in minutes.
  double period_minutes() const { return kTwoPiLocal / value_of(no_unkozai_); }

 private:
  static constexpr double kTwoPiLocal = 2.0 * std::numbers::pi;

  MeanElements<T> elements_;
  GravityConstants g_{};
  bool isimp_ = false;
  T no_unkozai_{};
  T con41_{}, cc1_{}, cc4_{}, cc5_{}, d2_{}, d3_{}, d4_{}, delmo_{}, eta_{}, argpdot_{}, omgcof_{},
      sinmao_{}, t2cof_{}, t3cof_{}, t4cof_{}, t5cof_{}, x1mth2_{}, x7thm1_{}, mdot_{}, nodedot_{},
      xlcof_{}, xmcof_{}, nodecf_{}, aycof_{};
};

/// Semi-major axis (km) from a TLE mean motion via Kepler's third law,
/// using mu = 398600.4418 km^3/s^2.
double semi_major_axis(const Tle& tle, double mu = 398600.4418);

/// Ephemeris CSV: `t_min,x_km,y_km,z_km,vx,vy,vz`, 12 significant digits.
void write_ephemeris_csv(std::ostream& out, std::span<const StateVector<double>> states);
std::vector<StateVector<double>> read_ephemeris_csv(std::istream& in);

// ---------------------------------------------------------------------------

template <Scalar T>
Sgp4Model<T> Sgp4Model<T>::init(const MeanElements<T>& el, GravityModel gravity) {
  using std::cos;
  using std::fabs;
  using std::pow;
  using std::sin;
  using std::sqrt;

  Sgp4Model m;
  m.elements_ = el;
  m.g_ = gravity_constants(gravity);
  const GravityConstants& g = m.g_;

  const T& ecco = el.eccentricity;
  const T& inclo = el.inclination;
  const T& argpo = el.arg_perigee;
  const T& mo = el.mean_anomaly;
  const double bstar = el.bstar;

  if (value_of(el.mean_motion) <= 0.0)
    throw PropagationError(Sgp4Status::mean_motion, "mean motion must be positive");
  if (value_of(ecco) < 0.0 || value_of(ecco) > 0.9999)
    throw PropagationError(Sgp4Status::mean_elements, "eccentricity outside [0, 0.9999]");

  constexpr double temp4 = 1.5e-12;
  const double ss = 78.0 / g.radiusearthkm + 1.0;
  const double qzms2ttemp = (120.0 - 78.0) / g.radiusearthkm;
  const double qzms2t = qzms2ttemp * qzms2ttemp * qzms2ttemp * qzms2ttemp;
  constexpr double x2o3 = 2.0 / 3.0;

  // Brouwer mean motion recovery.
  const T eccsq = ecco * ecco;
  const T omeosq = 1.0 - eccsq;
  const T rteosq = sqrt(omeosq);
  const T cosio = cos(inclo);
  const T cosio2 = cosio * cosio;
  const T ak = pow(g.xke / el.mean_motion, x2o3);
  const T d1 = 0.75 * g.j2 * (3.0 * cosio2 - 1.0) / (rteosq * omeosq);
  T del = d1 / (ak * ak);
  const T adel = ak * (1.0 - del * del - del * (1.0 / 3.0 + 134.0 * del * del / 81.0));
  del = d1 / (adel * adel);
  m.no_unkozai_ = el.mean_motion / (1.0 + del);
  const T ao = pow(g.xke / m.no_unkozai_, x2o3);
  const T sinio = sin(inclo);
  const T po = ao * omeosq;
  const T con42 = 1.0 - 5.0 * cosio2;
  m.con41_ = -con42 - cosio2 - cosio2;
  const T posq = po * po;
  const T rp = ao * (1.0 - ecco);

  if (2.0 * std::numbers::pi / value_of(m.no_unkozai_) >= 225.0)
    throw PropagationError(Sgp4Status::deep_space,
                           "period >= 225 min: deep-space elements are not supported");

  m.isimp_ = value_of(rp) < 220.0 / g.radiusearthkm + 1.0;
  T sfour = T(ss);
  T qzms24 = T(qzms2t);
  const T perige = (rp - 1.0) * g.radiusearthkm;
  if (value_of(perige) < 156.0) {
    sfour = perige - 78.0;
    if (value_of(perige) < 98.0) sfour = T(20.0);
    const T qzms24temp = (120.0 - sfour) / g.radiusearthkm;
    qzms24 = qzms24temp * qzms24temp * qzms24temp * qzms24temp;
    sfour = sfour / g.radiusearthkm + 1.0;
  }
  const T pinvsq = 1.0 / posq;
  const T tsi = 1.0 / (ao - sfour);
  m.eta_ = ao * ecco * tsi;
  const T etasq = m.eta_ * m.eta_;
  const T eeta = ecco * m.eta_;
  const T psisq = fabs(1.0 - etasq);
  const T coef = qzms24 * pow(tsi, 4.0);
  const T coef1 = coef / pow(psisq, 3.5);
  const T cc2 = coef1 * m.no_unkozai_ *
                (ao * (1.0 + 1.5 * etasq + eeta * (4.0 + etasq)) +
                 0.375 * g.j2 * tsi / psisq * m.con41_ * (8.0 + 3.0 * etasq * (8.0 + etasq)));
  m.cc1_ = bstar * cc2;
  T cc3 = T(0.0);
  if (value_of(ecco) > 1.0e-4) cc3 = -2.0 * coef * tsi * g.j3oj2 * m.no_unkozai_ * sinio / ecco;
  m.x1mth2_ = 1.0 - cosio2;
  m.cc4_ = 2.0 * m.no_unkozai_ * coef1 * ao * omeosq *
           (m.eta_ * (2.0 + 0.5 * etasq) + ecco * (0.5 + 2.0 * etasq) -
            g.j2 * tsi / (ao * psisq) *
                (-3.0 * m.con41_ * (1.0 - 2.0 * eeta + etasq * (1.5 - 0.5 * eeta)) +
                 0.75 * m.x1mth2_ * (2.0 * etasq - eeta * (1.0 + etasq)) * cos(2.0 * argpo)));
  m.cc5_ = 2.0 * coef1 * ao * omeosq * (1.0 + 2.75 * (etasq + eeta) + eeta * etasq);
  const T cosio4 = cosio2 * cosio2;
  const T temp1 = 1.5 * g.j2 * pinvsq * m.no_unkozai_;
  const T temp2 = 0.5 * temp1 * g.j2 * pinvsq;
  const T temp3 = -0.46875 * g.j4 * pinvsq * pinvsq * m.no_unkozai_;
  m.mdot_ = m.no_unkozai_ + 0.5 * temp1 * rteosq * m.con41_ +
            0.0625 * temp2 * rteosq * (13.0 - 78.0 * cosio2 + 137.0 * cosio4);
  m.argpdot_ = -0.5 * temp1 * con42 + 0.0625 * temp2 * (7.0 - 114.0 * cosio2 + 395.0 * cosio4) +
               temp3 * (3.0 - 36.0 * cosio2 + 49.0 * cosio4);
  const T xhdot1 = -temp1 * cosio;
  m.nodedot_ =
      xhdot1 + (0.5 * temp2 * (4.0 - 19.0 * cosio2) + 2.0 * temp3 * (3.0 - 7.0 * cosio2)) * cosio;
  m.omgcof_ = bstar * cc3 * cos(argpo);
  m.xmcof_ = T(0.0);
  if (value_of(ecco) > 1.0e-4) m.xmcof_ = -x2o3 * coef * bstar / eeta;
  m.nodecf_ = 3.5 * omeosq * xhdot1 * m.cc1_;
  m.t2cof_ = 1.5 * m.cc1_;
  if (std::fabs(value_of(cosio) + 1.0) > 1.5e-12) {
    m.xlcof_ = -0.25 * g.j3oj2 * sinio * (3.0 + 5.0 * cosio) / (1.0 + cosio);
  } else {
    m.xlcof_ = -0.25 * g.j3oj2 * sinio * (3.0 + 5.0 * cosio) / temp4;
  }
  m.aycof_ = -0.5 * g.j3oj2 * sinio;
  const T delmotemp = 1.0 + m.eta_ * cos(mo);
  m.delmo_ = delmotemp * delmotemp * delmotemp;
  m.sinmao_ = sin(mo);
  m.x7thm1_ = 7.0 * cosio2 - 1.0;

  if (!m.isimp_) {
    const T cc1sq = m.cc1_ * m.cc1_;
    m.d2_ = 4.0 * ao * tsi * cc1sq;
    const T temp = m.d2_ * tsi * m.cc1_ / 3.0;
    m.d3_ = (17.0 * ao + sfour) * temp;
    m.d4_ = 0.5 * temp * ao * tsi * (221.0 * ao + 31.0 * sfour) * m.cc1_;
    m.t3cof_ = m.d2_ + 2.0 * cc1sq;
    m.t4cof_ = 0.25 * (3.0 * m.d3_ + m.cc1_ * (12.0 * m.d2_ + 10.0 * cc1sq));
    m.t5cof_ =
        0.2 * (3.0 * m.d4_ + 12.0 * m.cc1_ * m.d3_ + 6.0 * m.d2_ * m.d2_ + 15.0 * cc1sq * (2.0 * m.d2_ + cc1sq));
  }

  const PropagationResult<T> epoch_state = m.propagate_checked(0.0);
  if (epoch_state.status != Sgp4Status::ok)
    throw PropagationError(epoch_state.status,
                           std::string("SGP4 initialisation failed: ") + describe(epoch_state.status));
  return m;
}

template <Scalar T>
PropagationResult<T> Sgp4Model<T>::propagate_checked(double tsince) const {
  using std::atan2;
  using std::cos;
  using std::fmod;
  using std::pow;
  using std::sin;
  using std::sqrt;

  constexpr double twopi = 2.0 * std::numbers::pi;
  constexpr double x2o3 = 2.0 / 3.0;
  const GravityConstants& g = g_;
  const double vkmpersec = g.radiusearthkm * g.xke / 60.0;
  const MeanElements<T>& el = elements_;

  PropagationResult<T> out;
  out.state.t_min = tsince;
  const double t = tsince;

  // Secular gravity and atmospheric drag.
  const T xmdf = el.mean_anomaly + mdot_ * t;
  const T argpdf = el.arg_perigee + argpdot_ * t;
  const T nodedf = el.raan + nodedot_ * t;
  T argpm = argpdf;
  T mm = xmdf;
  const double t2 = t * t;
  T nodem = nodedf + nodecf_ * t2;
  T tempa = 1.0 - cc1_ * t;
  T tempe = el.bstar * cc4_ * t;
  T templ = t2cof_ * t2;

  if (!isimp_) {
    const T delomg = omgcof_ * t;
    const T delmtemp = 1.0 + eta_ * cos(xmdf);
    const T delm = xmcof_ * (delmtemp * delmtemp * delmtemp - delmo_);
    const T temp = delomg + delm;
    mm = xmdf + temp;
    argpm = argpdf - temp;
    const double t3 = t2 * t;
    const double t4 = t3 * t;
    tempa = tempa - d2_ * t2 - d3_ * t3 - d4_ * t4;
    tempe = tempe + el.bstar * cc5_ * (sin(mm) - sinmao_);
    templ = templ + t3cof_ * t3 + t4 * (t4cof_ + t * t5cof_);
  }

  T nm = no_unkozai_;
  T em = el.eccentricity;
  const T inclm = el.inclination;
  if (value_of(nm) <= 0.0) {
    out.status = Sgp4Status::mean_motion;
    return out;
  }
  const T am = pow(g.xke / nm, x2o3) * tempa * tempa;
  nm = g.xke / pow(am, 1.5);
  em = em - tempe;
  if (value_of(em) >= 1.0 || value_of(em) < -0.001) {
    out.status = Sgp4Status::mean_elements;
    return out;
  }
  if (value_of(em) < 1.0e-6) em = T(1.0e-6);
  mm = mm + no_unkozai_ * templ;
  T xlm = mm + argpm + nodem;
  nodem = fmod(nodem, twopi);
  argpm = fmod(argpm, twopi);
  xlm = fmod(xlm, twopi);
  mm = fmod(xlm - argpm - nodem, twopi);

  const T sinim = sin(inclm);
  const T cosim = cos(inclm);
  const T ep = em;
  const T xincp = inclm;
  const T argpp = argpm;
  const T nodep = nodem;
  const T mp = mm;
  const T sinip = sinim;
  const T cosip = cosim;

  // Long-period periodics.
  const T axnl = ep * cos(argpp);
  T temp = 1.0 / (am * (1.0 - ep * ep));
  const T aynl = ep * sin(argpp) + temp * aycof_;
  const T xl = mp + argpp + nodep + temp * xlcof_ * axnl;

  // Kepler's equation, iterated on the primal values.
  const T u = fmod(xl - nodep, twopi);
  const double up = value_of(u), axp = value_of(axnl), ayp = value_of(aynl);
  double eo1p = up;
  double tem5 = 9999.9;
  double sp = 0.0, cp = 1.0;
  int ktr = 1;
  while (std::fabs(tem5) >= 1.0e-12 && ktr <= 10) {
    sp = std::sin(eo1p);
    cp = std::cos(eo1p);
    tem5 = 1.0 - cp * axp - sp * ayp;
    tem5 = (up - ayp * cp + axp * sp - eo1p) / tem5;
    if (std::fabs(tem5) >= 0.95) tem5 = tem5 > 0.0 ? 0.95 : -0.95;
    eo1p = eo1p + tem5;
    ++ktr;
  }
  out.kepler_iterations = ktr - 1;
  if (std::fabs(tem5) >= 1.0e-12) {
    out.status = Sgp4Status::kepler;
    return out;
  }
  // The reference evaluates the trig terms at the last pre-update iterate.
  // One Newton step in scalar arithmetic supplies the implicit derivative
  // while the primal values stay those of the double iteration.
  T sineo1 = T(sp);
  T coseo1 = T(cp);
  if constexpr (is_dual_v<T>) {
    const T e0 = T(eo1p);
    const T s0 = sin(e0), c0 = cos(e0);
    const T eo1 = e0 + (u - aynl * c0 + axnl * s0 - e0) / (1.0 - c0 * axnl - s0 * aynl);
    sineo1 = sin(eo1);
    coseo1 = cos(eo1);
    set_value(sineo1, sp);
    set_value(coseo1, cp);
  }

  // Short-period preliminary quantities.
  const T ecose = axnl * coseo1 + aynl * sineo1;
  const T esine = axnl * sineo1 - aynl * coseo1;
  const T el2 = axnl * axnl + aynl * aynl;
  const T pl = am * (1.0 - el2);
  if (value_of(pl) < 0.0) {
    out.status = Sgp4Status::semi_latus_rectum;
    return out;
  }
  const T rl = am * (1.0 - ecose);
  const T rdotl = sqrt(am) * esine / rl;
  const T rvdotl = sqrt(pl) / rl;
  const T betal = sqrt(1.0 - el2);
  temp = esine / (1.0 + betal);
  const T sinu = am / rl * (sineo1 - aynl - axnl * temp);
  const T cosu = am / rl * (coseo1 - axnl + aynl * temp);
  T su = atan2(sinu, cosu);
  const T sin2u = (cosu + cosu) * sinu;
  const T cos2u = 1.0 - 2.0 * sinu * sinu;
  temp = 1.0 / pl;
  const T temp1 = 0.5 * g.j2 * temp;
  const T temp2 = temp1 * temp;

  // Short-period periodics.
  const T mrt = rl * (1.0 - 1.5 * temp2 * betal * con41_) + 0.5 * temp1 * x1mth2_ * cos2u;
  su = su - 0.25 * temp2 * x7thm1_ * sin2u;
  const T xnode = nodep + 1.5 * temp2 * cosip * sin2u;
  const T xinc = xincp + 1.5 * temp2 * cosip * sinip * cos2u;
  const T mvt = rdotl - nm * temp1 * x1mth2_ * sin2u / g.xke;
  const T rvdot = rvdotl + nm * temp1 * (x1mth2_ * cos2u + 1.5 * con41_) / g.xke;

  const T sinsu = sin(su);
  const T cossu = cos(su);
  const T snod = sin(xnode);
  const T cnod = cos(xnode);
  const T sini = sin(xinc);
  const T cosi = cos(xinc);
  const T xmx = -snod * cosi;
  const T xmy = cnod * cosi;
  const T ux = xmx * sinsu + cnod * cossu;
  const T uy = xmy * sinsu + snod * cossu;
  const T uz = sini * sinsu;
  const T vx = xmx * cossu - cnod * sinsu;
  const T vy = xmy * cossu - snod * sinsu;
  const T vz = sini * cossu;

  const T mr = mrt * g.radiusearthkm;
  out.state.position = {mr * ux, mr * uy, mr * uz};
  out.state.velocity = {(mvt * ux + rvdot * vx) * vkmpersec, (mvt * uy + rvdot * vy) * vkmpersec,
                        (mvt * uz + rvdot * vz) * vkmpersec};
  if (value_of(mrt) < 1.0) out.status = Sgp4Status::decayed;
  return out;
}

template <Scalar T>
StateVector<T> Sgp4Model<T>::propagate(double tsince) const {
  PropagationResult<T> r = propagate_checked(tsince);
  if (r.status != Sgp4Status::ok) {
    std::string msg = std::string("SGP4 propagation failed at t = ") + std::to_string(tsince) +
                      " min: " + describe(r.status);
    if (r.status == Sgp4Status::kepler)
      msg += " after " + std::to_string(r.kepler_iterations) + " iterations";
    throw PropagationError(r.status, msg);
  }
  return r.state;
}

}  // namespace specorb
