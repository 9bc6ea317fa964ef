#include <immintrin.h>

#include <cmath>

#include "specorb/kernels.hpp"

namespace specorb::kernels::avx2 {

namespace {

__m256d powi(__m256d x, int n) {
  __m256d r = _mm256_set1_pd(1.0);
  __m256d b = x;
  while (n) {
    if (n & 1) r = _mm256_mul_pd(r, b);
    b = _mm256_mul_pd(b, b);
    n >>= 1;
  }
  return r;
}

}  // namespace

void leaf_intersect(const TriangleBlock& b, const double o[3], const double d[3], BlockHit& best) {
  const __m256d dx = _mm256_set1_pd(d[0]), dy = _mm256_set1_pd(d[1]), dz = _mm256_set1_pd(d[2]);
  const __m256d e1x = _mm256_load_pd(b.e1x), e1y = _mm256_load_pd(b.e1y), e1z = _mm256_load_pd(b.e1z);
  const __m256d e2x = _mm256_load_pd(b.e2x), e2y = _mm256_load_pd(b.e2y), e2z = _mm256_load_pd(b.e2z);

  const __m256d px = _mm256_sub_pd(_mm256_mul_pd(dy, e2z), _mm256_mul_pd(dz, e2y));
  const __m256d py = _mm256_sub_pd(_mm256_mul_pd(dz, e2x), _mm256_mul_pd(dx, e2z));
  const __m256d pz = _mm256_sub_pd(_mm256_mul_pd(dx, e2y), _mm256_mul_pd(dy, e2x));
  const __m256d det = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(e1x, px), _mm256_mul_pd(e1y, py)),
                                    _mm256_mul_pd(e1z, pz));
  const __m256d inv = _mm256_div_pd(_mm256_set1_pd(1.0), det);
  const __m256d tx = _mm256_sub_pd(_mm256_set1_pd(o[0]), _mm256_load_pd(b.v0x));
  const __m256d ty = _mm256_sub_pd(_mm256_set1_pd(o[1]), _mm256_load_pd(b.v0y));
  const __m256d tz = _mm256_sub_pd(_mm256_set1_pd(o[2]), _mm256_load_pd(b.v0z));
  const __m256d u = _mm256_mul_pd(
      _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(tx, px), _mm256_mul_pd(ty, py)), _mm256_mul_pd(tz, pz)),
      inv);
  const __m256d qx = _mm256_sub_pd(_mm256_mul_pd(ty, e1z), _mm256_mul_pd(tz, e1y));
  const __m256d qy = _mm256_sub_pd(_mm256_mul_pd(tz, e1x), _mm256_mul_pd(tx, e1z));
  const __m256d qz = _mm256_sub_pd(_mm256_mul_pd(tx, e1y), _mm256_mul_pd(ty, e1x));
  const __m256d v = _mm256_mul_pd(
      _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, qx), _mm256_mul_pd(dy, qy)), _mm256_mul_pd(dz, qz)),
      inv);
  const __m256d t = _mm256_mul_pd(
      _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(e2x, qx), _mm256_mul_pd(e2y, qy)), _mm256_mul_pd(e2z, qz)),
      inv);

  alignas(32) double sdet[kLanes], su[kLanes], sv[kLanes], st[kLanes];
  _mm256_store_pd(sdet, det);
  _mm256_store_pd(su, u);
  _mm256_store_pd(sv, v);
  _mm256_store_pd(st, t);
  for (int l = 0; l < kLanes; ++l) {
    if (b.id[l] < 0 || std::fabs(sdet[l]) < kParallelEpsilon) continue;
    if (su[l] < 0.0 || su[l] > 1.0) continue;
    if (sv[l] < 0.0 || su[l] + sv[l] > 1.0) continue;
    if (st[l] > kMinHitDistance && st[l] < best.t) {
      best.t = st[l];
      best.id = b.id[l];
    }
  }
}

double clamped_pow_sum(const double* x, const double* dx, std::size_t n, std::size_t k,
                       double alpha, double* grad) {
  const bool integral = is_small_integer(alpha);
  const int ia = static_cast<int>(alpha);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d va = _mm256_set1_pd(alpha);
  __m256d acc = zero;
  __m256d gacc[kMaxGradientRows];
  for (std::size_t r = 0; r < k; ++r) gacc[r] = zero;

  std::size_t i = 0;
  const std::size_t body = n - n % kLanes;
  for (; i < body; i += kLanes) {
    const __m256d xr = _mm256_loadu_pd(x + i);
    const __m256d pos = _mm256_cmp_pd(xr, zero, _CMP_GT_OQ);
    const __m256d xi = _mm256_and_pd(xr, pos);
    __m256d p, dp;
    if (integral) {
      p = powi(xi, ia);
      dp = _mm256_mul_pd(va, powi(xi, ia - 1));
    } else {
      alignas(32) double xs[kLanes], ps[kLanes], ds[kLanes];
      _mm256_store_pd(xs, xi);
      for (int l = 0; l < kLanes; ++l) {
        ps[l] = std::pow(xs[l], alpha);
        ds[l] = alpha * std::pow(xs[l], alpha - 1.0);
      }
      p = _mm256_load_pd(ps);
      dp = _mm256_load_pd(ds);
    }
    p = _mm256_and_pd(p, pos);
    dp = _mm256_and_pd(dp, pos);
    acc = _mm256_add_pd(acc, p);
    for (std::size_t r = 0; r < k; ++r)
      gacc[r] = _mm256_add_pd(gacc[r], _mm256_mul_pd(dp, _mm256_loadu_pd(dx + r * n + i)));
  }

  alignas(32) double a[kLanes];
  alignas(32) double g[kMaxGradientRows][kLanes];
  _mm256_store_pd(a, acc);
  for (std::size_t r = 0; r < k; ++r) _mm256_store_pd(g[r], gacc[r]);
  for (; i < n; ++i) {
    const int l = static_cast<int>(i % kLanes);
    const double xi = x[i] > 0.0 ? x[i] : 0.0;
    double p, dp;
    if (integral) {
      __m256d pv = powi(_mm256_set1_pd(xi), ia);
      __m256d dv = _mm256_mul_pd(va, powi(_mm256_set1_pd(xi), ia - 1));
      p = _mm256_cvtsd_f64(pv);
      dp = _mm256_cvtsd_f64(dv);
    } else {
      p = std::pow(xi, alpha);
      dp = alpha * std::pow(xi, alpha - 1.0);
    }
    if (!(x[i] > 0.0)) {
      p = 0.0;
      dp = 0.0;
    }
    a[l] = a[l] + p;
    for (std::size_t r = 0; r < k; ++r) g[r][l] = g[r][l] + dp * dx[r * n + i];
  }
  for (std::size_t r = 0; r < k; ++r) grad[r] = (g[r][0] + g[r][1]) + (g[r][2] + g[r][3]);
  return (a[0] + a[1]) + (a[2] + a[3]);
}

std::size_t count_at_least(const double* values, std::size_t n, double threshold) {
  const __m256d th = _mm256_set1_pd(threshold);
  std::size_t c = 0;
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d m = _mm256_cmp_pd(_mm256_loadu_pd(values + i), th, _CMP_GE_OQ);
    c += static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(_mm256_movemask_pd(m))));
  }
  for (; i < n; ++i) c += values[i] >= threshold ? 1 : 0;
  return c;
}

}  // namespace specorb::kernels::avx2
