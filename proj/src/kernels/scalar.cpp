#include <cmath>

#include "specorb/kernels.hpp"

namespace specorb::kernels::scalar {

namespace {

double powi(double x, int n) {
  double r = 1.0;
  double b = x;
  while (n) {
    if (n & 1) r = r * b;
    b = b * b;
    n >>= 1;
  }
  return r;
}

}  // namespace

void leaf_intersect(const TriangleBlock& b, const double o[3], const double d[3], BlockHit& best) {
  for (int l = 0; l < kLanes; ++l) {
    if (b.id[l] < 0) continue;
    const double px = d[1] * b.e2z[l] - d[2] * b.e2y[l];
    const double py = d[2] * b.e2x[l] - d[0] * b.e2z[l];
    const double pz = d[0] * b.e2y[l] - d[1] * b.e2x[l];
    const double det = b.e1x[l] * px + b.e1y[l] * py + b.e1z[l] * pz;
    if (std::fabs(det) < kParallelEpsilon) continue;
    const double inv = 1.0 / det;
    const double tx = o[0] - b.v0x[l];
    const double ty = o[1] - b.v0y[l];
    const double tz = o[2] - b.v0z[l];
    const double u = (tx * px + ty * py + tz * pz) * inv;
    if (u < 0.0 || u > 1.0) continue;
    const double qx = ty * b.e1z[l] - tz * b.e1y[l];
    const double qy = tz * b.e1x[l] - tx * b.e1z[l];
    const double qz = tx * b.e1y[l] - ty * b.e1x[l];
    const double v = (d[0] * qx + d[1] * qy + d[2] * qz) * inv;
    if (v < 0.0 || u + v > 1.0) continue;
    const double t = (b.e2x[l] * qx + b.e2y[l] * qy + b.e2z[l] * qz) * inv;
    if (t > kMinHitDistance && t < best.t) {
      best.t = t;
      best.id = b.id[l];
    }
  }
}

double clamped_pow_sum(const double* x, const double* dx, std::size_t n, std::size_t k,
                       double alpha, double* grad) {
  const bool integral = is_small_integer(alpha);
  const int ia = static_cast<int>(alpha);
  double acc[kLanes] = {0, 0, 0, 0};
  double gacc[kMaxGradientRows][kLanes] = {};
  for (std::size_t i = 0; i < n; ++i) {
    const int l = static_cast<int>(i % kLanes);
    const double xi = x[i] > 0.0 ? x[i] : 0.0;
    double p, dp;
    if (integral) {
      p = powi(xi, ia);
      dp = alpha * powi(xi, ia - 1);
    } else {
      p = std::pow(xi, alpha);
      dp = alpha * std::pow(xi, alpha - 1.0);
    }
    if (!(x[i] > 0.0)) {
      p = 0.0;
      dp = 0.0;
    }
    acc[l] = acc[l] + p;
    for (std::size_t r = 0; r < k; ++r) gacc[r][l] = gacc[r][l] + dp * dx[r * n + i];
  }
  for (std::size_t r = 0; r < k; ++r) grad[r] = (gacc[r][0] + gacc[r][1]) + (gacc[r][2] + gacc[r][3]);
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

std::size_t count_at_least(const double* values, std::size_t n, double threshold) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += values[i] >= threshold ? 1 : 0;
  return c;
}

}  // namespace specorb::kernels::scalar
