#pragma once

// Pinhole camera, per-pixel ray generation, single-bounce shading and image export.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "specorb/autodiff.hpp"
#include "specorb/errors.hpp"
#include "specorb/geometry.hpp"
#include "specorb/vec3.hpp"

namespace specorb {

template <Scalar T>
struct CameraPose {
  Vec3<T> eye;
  Vec3<T> right, up, forward;  // orthonormal basis; rows of the world->camera rotation
  double vertical_fov_deg = 10.0;
  int width = 64;
  int height = 64;
};

/// Camera at `eye` looking at `target`. If the view direction is (nearly)
/// parallel to `up_hint`, the next canonical axis is used instead.
template <Scalar T>
CameraPose<T> look_at(const Vec3<T>& eye, const Vec3d& target, const Vec3d& up_hint,
                      double vertical_fov_deg, int width, int height) {
  if (!(vertical_fov_deg > 1.0 && vertical_fov_deg < 120.0))
    throw ConfigError("vertical field of view must lie in (1, 120) degrees");
  if (width <= 0 || height <= 0) throw ConfigError("image size must be positive");
  const Vec3<T> to = lift<T>(target) - eye;
  if (norm(value_of(to)) == 0.0) throw ConfigError("camera eye coincides with its target");
  CameraPose<T> c;
  c.eye = eye;
  c.forward = normalized(to);
  Vec3d up = up_hint;
  const Vec3d f = value_of(c.forward);
  if (norm(cross(f, up)) < 1e-6) {
    int axis = std::fabs(up.x) >= std::fabs(up.y) && std::fabs(up.x) >= std::fabs(up.z)
                   ? 0
                   : (std::fabs(up.y) >= std::fabs(up.z) ? 1 : 2);
    for (int k = 0; k < 3; ++k) {
      axis = (axis + 1) % 3;
      Vec3d cand{};
      cand[axis] = 1.0;
      if (norm(cross(f, cand)) >= 1e-6) {
        up = cand;
        break;
      }
    }
  }
  c.right = normalized(cross(c.forward, lift<T>(up)));
  c.up = cross(c.right, c.forward);
  c.vertical_fov_deg = vertical_fov_deg;
  c.width = width;
  c.height = height;
  return c;
}

/// Ray through the centre of pixel (row i, column j).
template <Scalar T>
Ray<T> pixel_ray(const CameraPose<T>& cam, int i, int j) {
  if (i < 0 || i >= cam.height || j < 0 || j >= cam.width) throw ConfigError("pixel out of range");
  const double tan_half = std::tan(0.5 * cam.vertical_fov_deg * std::numbers::pi / 180.0);
  const double aspect = static_cast<double>(cam.width) / cam.height;
  const double x = ((j + 0.5) * 2.0 / cam.width - 1.0) * tan_half * aspect;
  const double y = (1.0 - (i + 0.5) * 2.0 / cam.height) * tan_half;
  Ray<T> r;
  r.origin = cam.eye;
  r.direction = normalized(cam.forward + x * cam.right + y * cam.up);
  return r;
}

struct ShadingParams {
  double e_sun = 1361.0;  // W/m^2
  double gain = 1.0;
  double k_d = 0.6;
  double k_s = 0.4;
  double alpha = 2.0;
  /// Per mesh material; entries <= 0 fall back to `alpha`.
  std::vector<double> material_alpha;
  /// <= 0 selects the default 0.8 * e_sun * k_s * gain.
  double full_well = 0.0;

  double full_well_intensity() const { return full_well > 0.0 ? full_well : 0.8 * e_sun * k_s * gain; }
  double alpha_for(int material) const {
    if (material >= 0 && static_cast<std::size_t>(material) < material_alpha.size() &&
        material_alpha[static_cast<std::size_t>(material)] > 0.0)
      return material_alpha[static_cast<std::size_t>(material)];
    return alpha;
  }
};

struct Scene {
  const TriangleMesh* mesh = nullptr;
  const Bvh* bvh = nullptr;
};

/// Per-pixel primal decisions; reusing them freezes visibility.
struct Visibility {
  std::vector<std::int32_t> triangle;  // -1 for background
  std::vector<std::uint8_t> lit;
};

template <Scalar T>
struct RenderBuffers {
  int width = 0, height = 0;
  std::vector<std::uint8_t> mask;
  std::vector<std::uint8_t> lit;  // sunlit: n.l > 0 and no cast shadow
  std::vector<std::int32_t> triangle;
  std::vector<double> alpha;      // Phong exponent of the visible material
  std::vector<Vec3<T>> normal;    // unit, facing the camera
  std::vector<Vec3<T>> ray_dir;   // unit, camera -> scene
  std::vector<T> intensity;       // W m^-2 sr^-1 (lumped gain)

  std::size_t size() const { return mask.size(); }
  std::size_t mask_count() const {
    std::size_t c = 0;
    for (auto m : mask) c += m;
    return c;
  }
  Visibility visibility() const { return {triangle, lit}; }
};

struct RenderOptions {
  int threads = 1;
  const Visibility* frozen = nullptr;
  double shadow_bias = 1e-6;  // m, along the normal
};

template <Scalar T>
Vec3<T> reflection_vector(const Vec3<T>& l, const Vec3<T>& n) {
  return (2.0 * dot(l, n)) * n - l;
}

namespace detail {

template <Scalar T>
void shade_pixel(const Scene& scene, const CameraPose<T>& cam, const Vec3d& light,
                 const ShadingParams& sp, const RenderOptions& opt, int i, int j, RenderBuffers<T>& b) {
  const std::size_t p = static_cast<std::size_t>(i) * static_cast<std::size_t>(b.width) +
                        static_cast<std::size_t>(j);
  const Ray<T> ray = pixel_ray(cam, i, j);
  b.ray_dir[p] = ray.direction;
  int tri;
  double t_primal = 0.0;
  if (opt.frozen) {
    tri = opt.frozen->triangle[p];
  } else {
    const kernels::BlockHit h = nearest_primal(value_of(ray.origin), value_of(ray.direction), *scene.bvh);
    tri = h.id;
    t_primal = h.t;
  }
  b.triangle[p] = tri;
  if (tri < 0) return;
  const Hit<T> hit = hit_triangle(ray, *scene.mesh, tri);
  if (!opt.frozen) t_primal = value_of(hit.t);
  Vec3<T> n = hit.normal;
  if (dot(value_of(n), value_of(ray.direction)) > 0.0) n = -n;
  b.mask[p] = 1;
  b.normal[p] = n;
  b.alpha[p] = sp.alpha_for(hit.material);

  bool lit;
  const Vec3d np = value_of(n);
  if (opt.frozen) {
    lit = opt.frozen->lit[p] != 0;
  } else {
    lit = dot(np, light) > 0.0;
    if (lit) {
      const Vec3d point = value_of(ray.origin) + t_primal * value_of(ray.direction);
      lit = !occluded(point + opt.shadow_bias * np, light, *scene.bvh);
    }
  }
  b.lit[p] = lit ? 1 : 0;
  if (!lit) return;
  const Vec3<T> l = lift<T>(light);
  const T ndotl = dot(n, l);
  const Vec3<T> wr = reflection_vector(l, n);
  const T spec = clamped_pow(dot(wr, -ray.direction), b.alpha[p]);
  b.intensity[p] = sp.e_sun * sp.gain * (sp.k_d * clamp_positive(ndotl) + sp.k_s * spec);
}

}  // namespace detail

/// Single-sample ray casting with Phong shading. `light` is the unit vector
/// toward the Sun in the render frame. Deterministic for any thread count.
template <Scalar T>
RenderBuffers<T> render(const Scene& scene, const CameraPose<T>& cam, const Vec3d& light,
                        const ShadingParams& sp, const RenderOptions& opt = {}) {
  RenderBuffers<T> b;
  b.width = cam.width;
  b.height = cam.height;
  const std::size_t n = static_cast<std::size_t>(cam.width) * static_cast<std::size_t>(cam.height);
  if (opt.frozen && (opt.frozen->triangle.size() != n || opt.frozen->lit.size() != n))
    throw ConfigError("frozen visibility does not match the image size");
  b.mask.assign(n, 0);
  b.lit.assign(n, 0);
  b.triangle.assign(n, -1);
  b.alpha.assign(n, sp.alpha);
  b.normal.assign(n, Vec3<T>{});
  b.ray_dir.assign(n, Vec3<T>{});
  b.intensity.assign(n, T(0.0));
  if (!scene.mesh || !scene.bvh) {
    for (int i = 0; i < cam.height; ++i)
      for (int j = 0; j < cam.width; ++j)
        b.ray_dir[static_cast<std::size_t>(i * cam.width + j)] = pixel_ray(cam, i, j).direction;
    return b;
  }
  auto rows = [&](int r0, int r1) {
    for (int i = r0; i < r1; ++i)
      for (int j = 0; j < cam.width; ++j) detail::shade_pixel(scene, cam, light, sp, opt, i, j, b);
  };
  const int threads = std::max(1, std::min(opt.threads, cam.height));
  if (threads == 1) {
    rows(0, cam.height);
  } else {
    std::vector<std::thread> pool;
    const int per = (cam.height + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int r0 = t * per, r1 = std::min(cam.height, r0 + per);
      if (r0 < r1) pool.emplace_back(rows, r0, r1);
    }
    for (auto& th : pool) th.join();
  }
  return b;
}

/// Share of masked pixels at or above the full-well intensity; 0 for an empty mask.
template <Scalar T>
double saturation_fraction(const RenderBuffers<T>& b, double full_well) {
  std::vector<double> vals;
  vals.reserve(b.size());
  for (std::size_t p = 0; p < b.size(); ++p)
    if (b.mask[p]) vals.push_back(value_of(b.intensity[p]));
  if (vals.empty()) return 0.0;
  const std::size_t c = kernels::active().count_at_least(vals.data(), vals.size(), full_well);
  return static_cast<double>(c) / static_cast<double>(vals.size());
}

/// Binary P6, 8-bit, gamma 1/2.2 applied to intensity / full_well.
void write_ppm(std::ostream& out, int width, int height, const std::vector<double>& intensity,
               double full_well);
void write_mask_ppm(std::ostream& out, int width, int height, const std::vector<std::uint8_t>& mask);
/// One image row per CSV line.
void write_intensity_csv(std::ostream& out, int width, int height, const std::vector<double>& intensity);

template <Scalar T>
std::vector<double> primal_intensity(const RenderBuffers<T>& b) {
  std::vector<double> v(b.size());
  for (std::size_t p = 0; p < b.size(); ++p) v[p] = value_of(b.intensity[p]);
  return v;
}

}  // namespace specorb
