#pragma once

// Forward-mode dual numbers with a fixed number of gradient slots.
//
// Every numeric routine in the pipeline is a template over its scalar type and
// is instantiated both for `double` and for `Dual<K>`. Branch decisions
// (comparisons, floor, fmod quotients) are taken on the primal value only.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <type_traits>

#include "specorb/errors.hpp"

namespace specorb {

template <std::size_t K>
struct Dual {
  double value = 0.0;
  std::array<double, K> grad{};

  constexpr Dual() = default;
  constexpr Dual(double v) : value(v) {}  // NOLINT: constants promote implicitly
  constexpr Dual(double v, const std::array<double, K>& g) : value(v), grad(g) {}

  static constexpr std::size_t slots = K;

  Dual& operator+=(const Dual& b) {
    value += b.value;
    for (std::size_t k = 0; k < K; ++k) grad[k] += b.grad[k];
    return *this;
  }
  Dual& operator-=(const Dual& b) {
    value -= b.value;
    for (std::size_t k = 0; k < K; ++k) grad[k] -= b.grad[k];
    return *this;
  }
  Dual& operator*=(const Dual& b) { return *this = *this * b; }
  Dual& operator/=(const Dual& b) { return *this = *this / b; }

  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator-(const Dual& a) {
    Dual r;
    r.value = -a.value;
    for (std::size_t k = 0; k < K; ++k) r.grad[k] = -a.grad[k];
    return r;
  }
  friend Dual operator*(const Dual& a, const Dual& b) {
    Dual r;
    r.value = a.value * b.value;
    for (std::size_t k = 0; k < K; ++k) r.grad[k] = a.grad[k] * b.value + a.value * b.grad[k];
    return r;
  }
  friend Dual operator/(const Dual& a, const Dual& b) {
    if (b.value == 0.0) throw DomainError("divide");
    Dual r;
    const double inv = 1.0 / b.value;
    r.value = a.value / b.value;
    for (std::size_t k = 0; k < K; ++k) r.grad[k] = (a.grad[k] - r.value * b.grad[k]) * inv;
    return r;
  }

  // Comparisons see only the primal value; the gradient is detached.
  friend bool operator<(const Dual& a, const Dual& b) { return a.value < b.value; }
  friend bool operator>(const Dual& a, const Dual& b) { return a.value > b.value; }
  friend bool operator<=(const Dual& a, const Dual& b) { return a.value <= b.value; }
  friend bool operator>=(const Dual& a, const Dual& b) { return a.value >= b.value; }
  friend bool operator==(const Dual& a, const Dual& b) { return a.value == b.value; }
};

template <typename T>
struct is_dual : std::false_type {};
template <std::size_t K>
struct is_dual<Dual<K>> : std::true_type {};
template <typename T>
inline constexpr bool is_dual_v = is_dual<T>::value;

/// Scalar types accepted by the generic numeric code.
template <typename T>
concept Scalar = std::is_same_v<T, double> || is_dual_v<T>;

/// Number of gradient slots carried by a scalar type (0 for plain reals).
template <typename T>
inline constexpr std::size_t slots_v = 0;
template <std::size_t K>
inline constexpr std::size_t slots_v<Dual<K>> = K;

constexpr double value_of(double x) { return x; }
template <std::size_t K>
constexpr double value_of(const Dual<K>& x) { return x.value; }

/// Replaces the primal value, keeping the gradient.
inline void set_value(double& x, double v) { x = v; }
template <std::size_t K>
void set_value(Dual<K>& x, double v) { x.value = v; }

template <std::size_t K>
constexpr Dual<K> constant(double v) {
  return Dual<K>(v);
}

/// A dual whose gradient is the unit vector in `slot`.
template <std::size_t K>
Dual<K> seed(double v, std::size_t slot) {
  if (slot >= K) throw ConfigError("seed slot out of range");
  Dual<K> d(v);
  d.grad[slot] = 1.0;
  return d;
}

namespace detail {
template <std::size_t K>
Dual<K> chain(const Dual<K>& a, double f, double df) {
  Dual<K> r;
  r.value = f;
  for (std::size_t k = 0; k < K; ++k) r.grad[k] = df * a.grad[k];
  return r;
}
}  // namespace detail

template <std::size_t K>
Dual<K> sin(const Dual<K>& a) {
  return detail::chain(a, std::sin(a.value), std::cos(a.value));
}
template <std::size_t K>
Dual<K> cos(const Dual<K>& a) {
  return detail::chain(a, std::cos(a.value), -std::sin(a.value));
}
template <std::size_t K>
Dual<K> tan(const Dual<K>& a) {
  const double c = std::cos(a.value);
  if (c == 0.0) throw DomainError("tan");
  return detail::chain(a, std::tan(a.value), 1.0 / (c * c));
}
template <std::size_t K>
Dual<K> sqrt(const Dual<K>& a) {
  if (a.value < 0.0) throw DomainError("sqrt");
  const double s = std::sqrt(a.value);
  Dual<K> r(s);
  for (std::size_t k = 0; k < K; ++k)
    r.grad[k] = a.grad[k] == 0.0 ? 0.0 : a.grad[k] / (2.0 * s);
  return r;
}
template <std::size_t K>
Dual<K> exp(const Dual<K>& a) {
  const double e = std::exp(a.value);
  return detail::chain(a, e, e);
}
template <std::size_t K>
Dual<K> log(const Dual<K>& a) {
  if (a.value <= 0.0) throw DomainError("log");
  return detail::chain(a, std::log(a.value), 1.0 / a.value);
}
template <std::size_t K>
Dual<K> abs(const Dual<K>& a) {
  return a.value < 0.0 ? -a : a;
}
template <std::size_t K>
Dual<K> fabs(const Dual<K>& a) {
  return abs(a);
}

/// floor is piecewise constant: zero gradient.
template <std::size_t K>
Dual<K> floor(const Dual<K>& a) {
  return Dual<K>(std::floor(a.value));
}

/// fmod with the quotient taken on the primal value; gradient of `a` passes through.
template <std::size_t K>
Dual<K> fmod(const Dual<K>& a, double m) {
  Dual<K> r = a;
  r.value = std::fmod(a.value, m);
  return r;
}

template <std::size_t K>
Dual<K> pow(const Dual<K>& a, double p) {
  if (a.value < 0.0 && p != std::floor(p)) throw DomainError("pow");
  if (a.value == 0.0 && p < 1.0) {
    if (p <= 0.0) throw DomainError("pow");
    for (double g : a.grad)
      if (g != 0.0) throw DomainError("pow");
    return Dual<K>(0.0);
  }
  const double f = std::pow(a.value, p);
  const double df = p == 0.0 ? 0.0 : p * std::pow(a.value, p - 1.0);
  return detail::chain(a, f, df);
}

template <std::size_t K>
Dual<K> pow(const Dual<K>& a, const Dual<K>& b) {
  if (a.value <= 0.0) throw DomainError("pow");
  return exp(b * log(a));
}

template <std::size_t K>
Dual<K> atan2(const Dual<K>& y, const Dual<K>& x) {
  const double den = x.value * x.value + y.value * y.value;
  if (den == 0.0) throw DomainError("atan2");
  Dual<K> r(std::atan2(y.value, x.value));
  for (std::size_t k = 0; k < K; ++k)
    r.grad[k] = (x.value * y.grad[k] - y.value * x.grad[k]) / den;
  return r;
}

template <std::size_t K>
Dual<K> asin(const Dual<K>& a) {
  if (a.value < -1.0 || a.value > 1.0) throw DomainError("asin");
  const double c = std::sqrt(1.0 - a.value * a.value);
  if (c == 0.0) throw DomainError("asin");
  return detail::chain(a, std::asin(a.value), 1.0 / c);
}

template <std::size_t K>
Dual<K> acos(const Dual<K>& a) {
  if (a.value < -1.0 || a.value > 1.0) throw DomainError("acos");
  const double c = std::sqrt(1.0 - a.value * a.value);
  if (c == 0.0) throw DomainError("acos");
  return detail::chain(a, std::acos(a.value), -1.0 / c);
}

/// max(0, x)^alpha with zero subgradient at and below the kink.
template <std::size_t K>
Dual<K> clamped_pow(const Dual<K>& x, double alpha) {
  if (x.value <= 0.0) return Dual<K>(0.0);
  return detail::chain(x, std::pow(x.value, alpha), alpha * std::pow(x.value, alpha - 1.0));
}

inline double clamped_pow(double x, double alpha) {
  return x <= 0.0 ? 0.0 : std::pow(x, alpha);
}

/// max(0, x) with the same kink convention.
template <Scalar T>
T clamp_positive(const T& x) {
  return value_of(x) <= 0.0 ? T(0.0) : x;
}

/// Gradient slots as a span (empty for plain reals).
inline std::span<const double> gradient_of(const double&) { return {}; }
template <std::size_t K>
std::span<const double> gradient_of(const Dual<K>& x) {
  return x.grad;
}

}  // namespace specorb
