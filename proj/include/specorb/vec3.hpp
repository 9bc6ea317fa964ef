#pragma once

#include <array>
#include <cmath>

#include "specorb/autodiff.hpp"

namespace specorb {

template <typename T>
struct Vec3 {
  T x{}, y{}, z{};

  constexpr Vec3() = default;
  constexpr Vec3(T x_, T y_, T z_) : x(x_), y(y_), z(z_) {}

  template <typename U>
    requires(!std::is_same_v<U, T> && std::is_convertible_v<U, T>)
  constexpr explicit Vec3(const Vec3<U>& o) : x(T(o.x)), y(T(o.y)), z(T(o.z)) {}

  T& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  const T& operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3& operator+=(const Vec3& b) {
    x += b.x;
    y += b.y;
    z += b.z;
    return *this;
  }
  Vec3& operator-=(const Vec3& b) {
    x -= b.x;
    y -= b.y;
    z -= b.z;
    return *this;
  }
  friend Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
  friend Vec3 operator*(const Vec3& a, const T& s) { return {a.x * s, a.y * s, a.z * s}; }
  friend Vec3 operator*(const T& s, const Vec3& a) { return {a.x * s, a.y * s, a.z * s}; }
  friend Vec3 operator/(const Vec3& a, const T& s) { return {a.x / s, a.y / s, a.z / s}; }
};

using Vec3d = Vec3<double>;

template <typename T>
T dot(const Vec3<T>& a, const Vec3<T>& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

template <typename T>
Vec3<T> cross(const Vec3<T>& a, const Vec3<T>& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

template <typename T>
T norm(const Vec3<T>& a) {
  using std::sqrt;
  return sqrt(dot(a, a));
}

template <typename T>
Vec3<T> normalized(const Vec3<T>& a) {
  return a / norm(a);
}

template <typename T>
Vec3d value_of(const Vec3<T>& a) {
  return {value_of(a.x), value_of(a.y), value_of(a.z)};
}

/// Promotes a constant vector into scalar type T.
template <typename T>
Vec3<T> lift(const Vec3d& a) {
  return {T(a.x), T(a.y), T(a.z)};
}

/// 3x3 matrix stored as rows.
template <typename T>
struct Mat3 {
  std::array<Vec3<T>, 3> rows{};

  Vec3<T> operator*(const Vec3<T>& v) const {
    return {dot(rows[0], v), dot(rows[1], v), dot(rows[2], v)};
  }
  Mat3 transposed() const {
    Mat3 t;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) t.rows[i][j] = rows[j][i];
    return t;
  }
  Mat3 operator*(const Mat3& b) const {
    Mat3 r;
    const Mat3 bt = b.transposed();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.rows[i][j] = dot(rows[i], bt.rows[j]);
    return r;
  }
  static Mat3 identity() {
    Mat3 m;
    m.rows[0] = {T(1.0), T(0.0), T(0.0)};
    m.rows[1] = {T(0.0), T(1.0), T(0.0)};
    m.rows[2] = {T(0.0), T(0.0), T(1.0)};
    return m;
  }
};

using Mat3d = Mat3<double>;

/// Rotation from yaw-pitch-roll angles in radians (Z, then Y, then X).
Mat3d rotation_zyx(double yaw, double pitch, double roll);

}  // namespace specorb
