#pragma once

// Triangle meshes, a bounding-volume hierarchy and ray casting.
//
// Traversal and triangle selection run on primal values through the SIMD
// kernels. The selected triangle is then re-intersected in the caller's
// scalar type, so hit distance and normal carry exact derivatives with
// respect to the ray for as long as the same triangle stays selected.

#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "specorb/autodiff.hpp"
#include "specorb/errors.hpp"
#include "specorb/kernels.hpp"
#include "specorb/vec3.hpp"

namespace specorb {

struct TriangleMesh {
  std::vector<Vec3d> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Vec3d> face_normals;    // unit, right-hand winding
  std::vector<Vec3d> vertex_normals;  // area-weighted, filled when smooth
  std::vector<int> material;          // index into material_names per triangle
  std::vector<std::string> material_names;
  bool smooth = false;
  std::size_t dropped_degenerate = 0;

  std::size_t size() const { return triangles.size(); }
};

class MeshError : public ConfigError {
 public:
  MeshError(int line, const std::string& what)
      : ConfigError(line > 0 ? "OBJ line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

struct MeshOptions {
  bool smooth_normals = false;
  /// Applied to every vertex at load (body frame -> render frame).
  Mat3d rotation = Mat3d::identity();
  double scale = 1.0;
};

/// Wavefront OBJ subset: `v`, `f` (any polygon, fan-triangulated; `a`,
/// `a/b`, `a//c`, `a/b/c` and negative indices), `usemtl`. Other statements
/// are ignored. Triangles with area <= 1e-12 m^2 are dropped and counted.
TriangleMesh load_obj(std::istream& in, const MeshOptions& options = {});
TriangleMesh load_obj_file(const std::string& path, const MeshOptions& options = {});
TriangleMesh parse_obj(const std::string& text, const MeshOptions& options = {});

/// Recomputes face (and, if requested, vertex) normals.
void compute_normals(TriangleMesh& mesh);

struct Aabb {
  Vec3d lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity()};
  Vec3d hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity()};

  void expand(const Vec3d& p);
  void expand(const Aabb& b);
  Vec3d extent() const { return hi - lo; }
  /// Slab test; returns entry distance or +inf on a miss.
  double entry(const Vec3d& origin, const Vec3d& inv_dir, double t_max) const;
};

struct BvhNode {
  Aabb box;
  int left = -1, right = -1;  // children, -1 for leaves
  int block = -1;             // TriangleBlock index for leaves
  int first = 0, count = 0;   // range in Bvh::order
};

class Bvh {
 public:
  static constexpr int kLeafSize = kernels::kLanes;

  explicit Bvh(const TriangleMesh& mesh);

  const std::vector<BvhNode>& nodes() const { return nodes_; }
  const std::vector<kernels::TriangleBlock>& blocks() const { return blocks_; }
  /// Triangle ids in leaf order.
  const std::vector<int>& order() const { return order_; }

 private:
  int build(const TriangleMesh& mesh, std::vector<Vec3d>& centroids, int first, int count);

  std::vector<BvhNode> nodes_;
  std::vector<kernels::TriangleBlock> blocks_;
  std::vector<int> order_;
};

template <Scalar T>
struct Ray {
  Vec3<T> origin;
  Vec3<T> direction;  // unit
};

template <Scalar T>
struct Hit {
  T t{};
  Vec3<T> normal;  // unit; geometric (or interpolated) normal, not flipped
  int triangle = -1;
  int material = -1;
};

struct TraversalStats {
  std::size_t nodes_visited = 0;
  std::size_t triangle_tests = 0;
};

/// Nearest primal hit: triangle id and distance.
kernels::BlockHit nearest_primal(const Vec3d& origin, const Vec3d& dir, const Bvh& bvh,
                                 double t_max = std::numeric_limits<double>::infinity(),
                                 TraversalStats* stats = nullptr);

/// True if anything is hit with t < t_max.
bool occluded(const Vec3d& origin, const Vec3d& dir, const Bvh& bvh,
              double t_max = std::numeric_limits<double>::infinity());

/// Brute-force nearest hit over all triangles, for testing.
kernels::BlockHit nearest_brute_force(const Vec3d& origin, const Vec3d& dir, const TriangleMesh& mesh);

/// Möller-Trumbore against one triangle in scalar type T, without range
/// checks on the barycentrics (the triangle has already been selected).
/// Returns t, u, v.
template <Scalar T>
std::array<T, 3> intersect_triangle(const Ray<T>& ray, const TriangleMesh& mesh, int tri) {
  const auto& ix = mesh.triangles[static_cast<std::size_t>(tri)];
  const Vec3d& v0 = mesh.vertices[static_cast<std::size_t>(ix[0])];
  const Vec3d e1 = mesh.vertices[static_cast<std::size_t>(ix[1])] - v0;
  const Vec3d e2 = mesh.vertices[static_cast<std::size_t>(ix[2])] - v0;
  const Vec3<T> e1t = lift<T>(e1), e2t = lift<T>(e2);
  const Vec3<T> p = cross(ray.direction, e2t);
  const T det = dot(e1t, p);
  const T inv = 1.0 / det;
  const Vec3<T> tv = ray.origin - lift<T>(v0);
  const T u = dot(tv, p) * inv;
  const Vec3<T> q = cross(tv, e1t);
  const T v = dot(ray.direction, q) * inv;
  const T t = dot(e2t, q) * inv;
  return {t, u, v};
}

/// Surface normal of `tri` at barycentrics (u, v).
template <Scalar T>
Vec3<T> surface_normal(const TriangleMesh& mesh, int tri, const T& u, const T& v) {
  const std::size_t k = static_cast<std::size_t>(tri);
  if (!mesh.smooth) return lift<T>(mesh.face_normals[k]);
  const auto& ix = mesh.triangles[k];
  const Vec3<T> n0 = lift<T>(mesh.vertex_normals[static_cast<std::size_t>(ix[0])]);
  const Vec3<T> n1 = lift<T>(mesh.vertex_normals[static_cast<std::size_t>(ix[1])]);
  const Vec3<T> n2 = lift<T>(mesh.vertex_normals[static_cast<std::size_t>(ix[2])]);
  return normalized((1.0 - u - v) * n0 + u * n1 + v * n2);
}

/// Hit on a known triangle (frozen visibility).
template <Scalar T>
Hit<T> hit_triangle(const Ray<T>& ray, const TriangleMesh& mesh, int tri) {
  const auto [t, u, v] = intersect_triangle(ray, mesh, tri);
  Hit<T> h;
  h.t = t;
  h.normal = surface_normal(mesh, tri, u, v);
  h.triangle = tri;
  h.material = mesh.material[static_cast<std::size_t>(tri)];
  return h;
}

/// Nearest hit; two-sided.
template <Scalar T>
std::optional<Hit<T>> intersect(const Ray<T>& ray, const Bvh& bvh, const TriangleMesh& mesh,
                                TraversalStats* stats = nullptr) {
  const kernels::BlockHit b =
      nearest_primal(value_of(ray.origin), value_of(ray.direction), bvh,
                     std::numeric_limits<double>::infinity(), stats);
  if (b.id < 0) return std::nullopt;
  Hit<T> h = hit_triangle(ray, mesh, b.id);
  set_value(h.t, b.t);
  return h;
}

}  // namespace specorb
