#include <cstdlib>
#include <cstring>

#include "specorb/errors.hpp"
#include "specorb/kernels.hpp"

namespace specorb::kernels {

namespace {

const KernelTable kScalar{"scalar", &scalar::leaf_intersect, &scalar::clamped_pow_sum,
                          &scalar::count_at_least};
#if defined(SPECORB_HAVE_AVX2)
const KernelTable kAvx2{"avx2", &avx2::leaf_intersect, &avx2::clamped_pow_sum,
                        &avx2::count_at_least};
#endif

const KernelTable& select() {
  const char* env = std::getenv("SPECORB_SIMD");
  if (env && std::strcmp(env, "scalar") == 0) return kScalar;
#if defined(SPECORB_HAVE_AVX2)
  if (avx2_available()) return kAvx2;
#endif
  return kScalar;
}

}  // namespace

bool avx2_available() {
#if defined(SPECORB_HAVE_AVX2)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable& table(Level level) {
  if (level == Level::scalar) return kScalar;
#if defined(SPECORB_HAVE_AVX2)
  if (avx2_available()) return kAvx2;
#endif
  throw ConfigError("AVX2 kernels are not available on this build or CPU");
}

const KernelTable& active() {
  static const KernelTable& t = select();
  return t;
}

}  // namespace specorb::kernels
