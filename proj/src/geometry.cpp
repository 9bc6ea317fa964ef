#include "specorb/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

namespace specorb {

namespace {

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t j = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > j) out.push_back(s.substr(j, i - j));
  }
  return out;
}

double parse_number(std::string_view s, int line) {
  double v = 0.0;
  const char* b = s.data();
  if (!s.empty() && s.front() == '+') ++b;
  const auto [p, ec] = std::from_chars(b, s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
    throw MeshError(line, "invalid number '" + std::string(s) + "'");
  return v;
}

int parse_index(std::string_view tok, int line, int vertex_count) {
  const std::string_view head = tok.substr(0, tok.find('/'));
  int v = 0;
  const auto [p, ec] = std::from_chars(head.data(), head.data() + head.size(), v);
  if (head.empty() || ec != std::errc() || p != head.data() + head.size() || v == 0)
    throw MeshError(line, "invalid face index '" + std::string(tok) + "'");
  const int idx = v > 0 ? v - 1 : vertex_count + v;
  if (idx < 0 || idx >= vertex_count)
    throw MeshError(line, "face index " + std::to_string(v) + " out of range");
  return idx;
}

}  // namespace

TriangleMesh load_obj(std::istream& in, const MeshOptions& options) {
  TriangleMesh mesh;
  mesh.smooth = options.smooth_normals;
  int current_material = -1;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view text = std::string_view(raw).substr(0, raw.find('#'));
    const auto tok = split_ws(text);
    if (tok.empty()) continue;
    if (tok[0] == "v") {
      if (tok.size() < 4) throw MeshError(line, "vertex needs three coordinates");
      const Vec3d p{parse_number(tok[1], line), parse_number(tok[2], line), parse_number(tok[3], line)};
      mesh.vertices.push_back(options.rotation * (options.scale * p));
    } else if (tok[0] == "f") {
      if (tok.size() < 4) throw MeshError(line, "face needs at least three vertices");
      std::vector<int> idx;
      for (std::size_t k = 1; k < tok.size(); ++k)
        idx.push_back(parse_index(tok[k], line, static_cast<int>(mesh.vertices.size())));
      if (current_material < 0) {
        mesh.material_names.emplace_back("default");
        current_material = static_cast<int>(mesh.material_names.size()) - 1;
      }
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
        const std::array<int, 3> tri{idx[0], idx[k], idx[k + 1]};
        const Vec3d& a = mesh.vertices[static_cast<std::size_t>(tri[0])];
        const Vec3d& b = mesh.vertices[static_cast<std::size_t>(tri[1])];
        const Vec3d& c = mesh.vertices[static_cast<std::size_t>(tri[2])];
        if (0.5 * norm(cross(b - a, c - a)) <= 1e-12) {
          ++mesh.dropped_degenerate;
          continue;
        }
        mesh.triangles.push_back(tri);
        mesh.material.push_back(current_material);
      }
    } else if (tok[0] == "usemtl") {
      if (tok.size() < 2) throw MeshError(line, "usemtl needs a name");
      const std::string name(tok[1]);
      const auto it = std::find(mesh.material_names.begin(), mesh.material_names.end(), name);
      if (it == mesh.material_names.end()) {
        mesh.material_names.push_back(name);
        current_material = static_cast<int>(mesh.material_names.size()) - 1;
      } else {
        current_material = static_cast<int>(it - mesh.material_names.begin());
      }
    }
  }
  if (mesh.triangles.empty()) throw MeshError(0, "mesh contains no triangles");
  compute_normals(mesh);
  return mesh;
}

TriangleMesh load_obj_file(const std::string& path, const MeshOptions& options) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mesh file '" + path + "'");
  return load_obj(in, options);
}

TriangleMesh parse_obj(const std::string& text, const MeshOptions& options) {
  std::istringstream in(text);
  return load_obj(in, options);
}

void compute_normals(TriangleMesh& mesh) {
  mesh.face_normals.clear();
  mesh.vertex_normals.assign(mesh.smooth ? mesh.vertices.size() : 0, Vec3d{});
  for (const auto& t : mesh.triangles) {
    const Vec3d& a = mesh.vertices[static_cast<std::size_t>(t[0])];
    const Vec3d& b = mesh.vertices[static_cast<std::size_t>(t[1])];
    const Vec3d& c = mesh.vertices[static_cast<std::size_t>(t[2])];
    const Vec3d n = cross(b - a, c - a);
    mesh.face_normals.push_back(normalized(n));
    if (mesh.smooth)
      for (int k : t) mesh.vertex_normals[static_cast<std::size_t>(k)] += n;
  }
  for (Vec3d& n : mesh.vertex_normals)
    if (norm(n) > 0.0) n = normalized(n);
}

void Aabb::expand(const Vec3d& p) {
  lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
  hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
}

void Aabb::expand(const Aabb& b) {
  expand(b.lo);
  expand(b.hi);
}

double Aabb::entry(const Vec3d& o, const Vec3d& inv, double t_max) const {
  double t0 = 0.0, t1 = t_max;
  for (int a = 0; a < 3; ++a) {
    double n = (lo[a] - o[a]) * inv[a];
    double f = (hi[a] - o[a]) * inv[a];
    if (std::isnan(n) || std::isnan(f)) {
      // Ray parallel to the slab and starting on its boundary plane.
      if (o[a] < lo[a] || o[a] > hi[a]) return std::numeric_limits<double>::infinity();
      continue;
    }
    if (n > f) std::swap(n, f);
    t0 = std::max(t0, n);
    t1 = std::min(t1, f);
    if (t0 > t1) return std::numeric_limits<double>::infinity();
  }
  return t0;
}

Bvh::Bvh(const TriangleMesh& mesh) {
  if (mesh.triangles.empty()) throw ConfigError("cannot build a BVH over an empty mesh");
  const int n = static_cast<int>(mesh.triangles.size());
  order_.resize(static_cast<std::size_t>(n));
  std::iota(order_.begin(), order_.end(), 0);
  std::vector<Vec3d> centroids;
  centroids.reserve(static_cast<std::size_t>(n));
  for (const auto& t : mesh.triangles)
    centroids.push_back((mesh.vertices[static_cast<std::size_t>(t[0])] +
                         mesh.vertices[static_cast<std::size_t>(t[1])] +
                         mesh.vertices[static_cast<std::size_t>(t[2])]) /
                        3.0);
  nodes_.reserve(static_cast<std::size_t>(2 * n));
  build(mesh, centroids, 0, n);
}

int Bvh::build(const TriangleMesh& mesh, std::vector<Vec3d>& centroids, int first, int count) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  Aabb box;
  for (int k = first; k < first + count; ++k)
    for (int v : mesh.triangles[static_cast<std::size_t>(order_[static_cast<std::size_t>(k)])])
      box.expand(mesh.vertices[static_cast<std::size_t>(v)]);
  nodes_[static_cast<std::size_t>(id)].box = box;
  nodes_[static_cast<std::size_t>(id)].first = first;
  nodes_[static_cast<std::size_t>(id)].count = count;

  if (count <= kLeafSize) {
    kernels::TriangleBlock blk{};
    for (int l = 0; l < kernels::kLanes; ++l) {
      blk.id[l] = -1;
      if (l >= count) continue;
      const int tri = order_[static_cast<std::size_t>(first + l)];
      const auto& t = mesh.triangles[static_cast<std::size_t>(tri)];
      const Vec3d& v0 = mesh.vertices[static_cast<std::size_t>(t[0])];
      const Vec3d e1 = mesh.vertices[static_cast<std::size_t>(t[1])] - v0;
      const Vec3d e2 = mesh.vertices[static_cast<std::size_t>(t[2])] - v0;
      blk.v0x[l] = v0.x, blk.v0y[l] = v0.y, blk.v0z[l] = v0.z;
      blk.e1x[l] = e1.x, blk.e1y[l] = e1.y, blk.e1z[l] = e1.z;
      blk.e2x[l] = e2.x, blk.e2y[l] = e2.y, blk.e2z[l] = e2.z;
      blk.id[l] = tri;
    }
    nodes_[static_cast<std::size_t>(id)].block = static_cast<int>(blocks_.size());
    blocks_.push_back(blk);
    return id;
  }

  const Vec3d ext = box.extent();
  const int axis = ext.x >= ext.y && ext.x >= ext.z ? 0 : (ext.y >= ext.z ? 1 : 2);
  const int mid = first + count / 2;
  auto b = order_.begin() + first;
  std::nth_element(b, order_.begin() + mid, b + count, [&](int l, int r) {
    const double cl = centroids[static_cast<std::size_t>(l)][axis];
    const double cr = centroids[static_cast<std::size_t>(r)][axis];
    return cl < cr || (cl == cr && l < r);
  });
  const int left = build(mesh, centroids, first, mid - first);
  const int right = build(mesh, centroids, mid, first + count - mid);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

namespace {

Vec3d inverse(const Vec3d& d) { return {1.0 / d.x, 1.0 / d.y, 1.0 / d.z}; }

}  // namespace

kernels::BlockHit nearest_primal(const Vec3d& origin, const Vec3d& dir, const Bvh& bvh, double t_max,
                                 TraversalStats* stats) {
  const auto& k = kernels::active();
  const Vec3d inv = inverse(dir);
  const double o[3] = {origin.x, origin.y, origin.z};
  const double d[3] = {dir.x, dir.y, dir.z};
  kernels::BlockHit best;
  best.t = t_max;
  const auto& nodes = bvh.nodes();
  int stack[64];
  int top = 0;
  if (nodes[0].box.entry(origin, inv, best.t) == std::numeric_limits<double>::infinity()) return {};
  stack[top++] = 0;
  while (top > 0) {
    const BvhNode& node = nodes[static_cast<std::size_t>(stack[--top])];
    if (stats) ++stats->nodes_visited;
    if (node.block >= 0) {
      if (stats) stats->triangle_tests += static_cast<std::size_t>(node.count);
      k.leaf_intersect(bvh.blocks()[static_cast<std::size_t>(node.block)], o, d, best);
      continue;
    }
    const BvhNode& l = nodes[static_cast<std::size_t>(node.left)];
    const BvhNode& r = nodes[static_cast<std::size_t>(node.right)];
    const double tl = l.box.entry(origin, inv, best.t);
    const double tr = r.box.entry(origin, inv, best.t);
    const bool hl = tl != std::numeric_limits<double>::infinity();
    const bool hr = tr != std::numeric_limits<double>::infinity();
    // Push the farther child first so the nearer one is visited first.
    if (hl && hr) {
      if (tl <= tr) {
        stack[top++] = node.right;
        stack[top++] = node.left;
      } else {
        stack[top++] = node.left;
        stack[top++] = node.right;
      }
    } else if (hl) {
      stack[top++] = node.left;
    } else if (hr) {
      stack[top++] = node.right;
    }
  }
  if (best.id < 0) return {};
  return best;
}

bool occluded(const Vec3d& origin, const Vec3d& dir, const Bvh& bvh, double t_max) {
  return nearest_primal(origin, dir, bvh, t_max).id >= 0;
}

kernels::BlockHit nearest_brute_force(const Vec3d& origin, const Vec3d& dir, const TriangleMesh& mesh) {
  kernels::BlockHit best;
  const double o[3] = {origin.x, origin.y, origin.z};
  const double d[3] = {dir.x, dir.y, dir.z};
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    kernels::TriangleBlock blk{};
    for (int l = 0; l < kernels::kLanes; ++l) blk.id[l] = -1;
    const auto& t = mesh.triangles[i];
    const Vec3d& v0 = mesh.vertices[static_cast<std::size_t>(t[0])];
    const Vec3d e1 = mesh.vertices[static_cast<std::size_t>(t[1])] - v0;
    const Vec3d e2 = mesh.vertices[static_cast<std::size_t>(t[2])] - v0;
    blk.v0x[0] = v0.x, blk.v0y[0] = v0.y, blk.v0z[0] = v0.z;
    blk.e1x[0] = e1.x, blk.e1y[0] = e1.y, blk.e1z[0] = e1.z;
    blk.e2x[0] = e2.x, blk.e2y[0] = e2.y, blk.e2z[0] = e2.z;
    blk.id[0] = static_cast<int>(i);
    kernels::scalar::leaf_intersect(blk, o, d, best);
  }
  return best;
}

}  // namespace specorb
