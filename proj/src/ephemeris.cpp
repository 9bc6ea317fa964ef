#include "specorb/ephemeris.hpp"

namespace specorb {

bool is_eclipsed(const Vec3d& r, const Vec3d& sun_dir) {
  const double along = dot(r, sun_dir);
  if (along >= 0.0) return false;
  const Vec3d perp = r - along * sun_dir;
  return norm(perp) < kEarthEquatorialRadiusKm;
}

Mat3d rotation_zyx(double yaw, double pitch, double roll) {
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  const double cr = std::cos(roll), sr = std::sin(roll);
  Mat3d m;
  m.rows[0] = {cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr};
  m.rows[1] = {sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr};
  m.rows[2] = {-sp, cp * sr, cp * cr};
  return m;
}

}  // namespace specorb
