#pragma once

// Hot inner loops with a scalar reference implementation and an AVX2 variant.
//
// Both variants evaluate the same operations in the same order (four lanes,
// partial sums combined as (l0 + l1) + (l2 + l3)), so their results are
// bit-identical and the choice of kernel never changes program output.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>

namespace specorb::kernels {

inline constexpr int kLanes = 4;

/// Up to four triangles in structure-of-arrays layout. Unused lanes have
/// id -1 and zero edges, which the intersection test rejects.
struct alignas(32) TriangleBlock {
  double v0x[kLanes], v0y[kLanes], v0z[kLanes];
  double e1x[kLanes], e1y[kLanes], e1z[kLanes];
  double e2x[kLanes], e2y[kLanes], e2z[kLanes];
  std::int32_t id[kLanes];
};

/// Rays must have |det| above this to count as a hit (parallel rejection).
inline constexpr double kParallelEpsilon = 1e-14;
/// Hits closer than this along the ray are ignored.
inline constexpr double kMinHitDistance = 1e-9;

struct BlockHit {
  double t = std::numeric_limits<double>::infinity();
  std::int32_t id = -1;
};

/// Nearest hit with kMinHitDistance < t < best.t among the block's lanes.
/// Updates `best` only on strict improvement, scanning lanes in order.
using LeafIntersectFn = void (*)(const TriangleBlock& block, const double origin[3],
                                 const double dir[3], BlockHit& best);

inline constexpr std::size_t kMaxGradientRows = 16;

/// Sum of max(0, x)^alpha and its K directional derivatives:
///   value   = sum_i p(x_i)
///   grad[k] = sum_i p'(x_i) * dx[k * n + i]
/// where p(x) = max(0,x)^alpha with p' = 0 for x <= 0. `dx` is row-major
/// with K <= kMaxGradientRows rows of n entries; `grad` receives K values.
using ClampedPowSumFn = double (*)(const double* x, const double* dx, std::size_t n,
                                   std::size_t k, double alpha, double* grad);

/// Number of entries with values[i] >= threshold.
using CountAtLeastFn = std::size_t (*)(const double* values, std::size_t n, double threshold);

struct KernelTable {
  const char* name;
  LeafIntersectFn leaf_intersect;
  ClampedPowSumFn clamped_pow_sum;
  CountAtLeastFn count_at_least;
};

enum class Level { scalar, avx2 };

/// True when the AVX2 variant was compiled in and the CPU supports it.
bool avx2_available();

/// Table for a specific level; throws ConfigError if unavailable.
const KernelTable& table(Level level);

/// Selected once per process: AVX2 when available, unless the environment
/// variable SPECORB_SIMD is set to "scalar".
const KernelTable& active();

namespace scalar {
void leaf_intersect(const TriangleBlock&, const double[3], const double[3], BlockHit&);
double clamped_pow_sum(const double*, const double*, std::size_t, std::size_t, double, double*);
std::size_t count_at_least(const double*, std::size_t, double);
}  // namespace scalar

#if defined(SPECORB_HAVE_AVX2)
namespace avx2 {
void leaf_intersect(const TriangleBlock&, const double[3], const double[3], BlockHit&);
double clamped_pow_sum(const double*, const double*, std::size_t, std::size_t, double, double*);
std::size_t count_at_least(const double*, std::size_t, double);
}  // namespace avx2
#endif

/// Integer exponents use repeated squaring so both variants agree exactly.
inline bool is_small_integer(double alpha) {
  return alpha >= 1.0 && alpha <= 64.0 && alpha == static_cast<double>(static_cast<int>(alpha));
}

}  // namespace specorb::kernels
