#include "sfeval/geometry.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "sfeval/error.hpp"

namespace sfeval {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegToRad = kPi / 180.0;
constexpr double kRadToDeg = 180.0 / kPi;

double wrap_azimuth(double az) {
  az = std::fmod(az, 360.0);
  if (az < -180.0) az += 360.0;
  if (az >= 180.0) az -= 360.0;
  return az;
}

}  // namespace

Direction Direction::from_degrees(double azimuth_deg, double elevation_deg) {
  // Fold elevations past the poles onto the back hemisphere.
  double el = std::fmod(elevation_deg, 360.0);
  if (el > 180.0) el -= 360.0;
  if (el < -180.0) el += 360.0;
  double az = azimuth_deg;
  if (el > 90.0) {
    el = 180.0 - el;
    az += 180.0;
  } else if (el < -90.0) {
    el = -180.0 - el;
    az += 180.0;
  }
  Direction d;
  d.az_ = wrap_azimuth(az);
  d.el_ = el;
  return d;
}

Direction Direction::from_unit(const Vec3& v) {
  const double n = v.norm();
  if (n <= 0.0) throw BoundsError("Direction::from_unit: zero vector");
  const Vec3 u = v / n;
  Direction d;
  d.el_ = kRadToDeg * std::asin(std::clamp(u.z, -1.0, 1.0));
  d.az_ = (std::abs(u.x) + std::abs(u.y) > 0.0)
              ? wrap_azimuth(kRadToDeg * std::atan2(u.y, u.x))
              : 0.0;
  return d;
}

Vec3 Direction::unit() const {
  const double az = az_ * kDegToRad;
  const double el = el_ * kDegToRad;
  return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
          std::sin(el)};
}

double Direction::angle_to(const Direction& o) const {
  return angle_between_deg(unit(), o.unit());
}

double angle_between_deg(const Vec3& a, const Vec3& b) {
  const double c = std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0);
  return kRadToDeg * std::acos(c);
}

int TriMeshHierarchy::vertex_count(int level) const {
  return static_cast<int>(mesh(level).vertices.size());
}

const TriMesh& TriMeshHierarchy::mesh(int level) const {
  return this->level(level).mesh;
}

const HierarchyLevel& TriMeshHierarchy::level(int k) const {
  if (k < 0 || k > max_level())
    throw BoundsError("hierarchy level " + std::to_string(k) +
                      " out of range [0, " + std::to_string(max_level()) + "]");
  return levels_[static_cast<size_t>(k)];
}

namespace {

TriMesh octahedron_seed() {
  TriMesh m;
  m.vertices = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1},
                {0, 0, -1}};
  // Outward counter-clockwise faces.
  m.triangles = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
                 {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
  return m;
}

HierarchyLevel subdivide(const TriMesh& coarse) {
  HierarchyLevel out;
  out.mesh.vertices = coarse.vertices;
  out.even_degree.assign(coarse.vertices.size(), 0);

  std::map<std::pair<int, int>, int> midpoint;
  auto midpoint_index = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const int idx = static_cast<int>(out.mesh.vertices.size());
    out.mesh.vertices.push_back(
        (coarse.vertices[a] + coarse.vertices[b]).normalized());
    out.parents.push_back({key.first, key.second});
    out.even_degree[a]++;
    out.even_degree[b]++;
    midpoint.emplace(key, idx);
    return idx;
  };

  for (const auto& t : coarse.triangles) {
    const int m01 = midpoint_index(t[0], t[1]);
    const int m12 = midpoint_index(t[1], t[2]);
    const int m20 = midpoint_index(t[2], t[0]);
    out.mesh.triangles.push_back({t[0], m01, m20});
    out.mesh.triangles.push_back({t[1], m12, m01});
    out.mesh.triangles.push_back({t[2], m20, m12});
    out.mesh.triangles.push_back({m01, m12, m20});
  }
  return out;
}

}  // namespace

TriMeshHierarchy build_octahedron_hierarchy(int max_level) {
  if (max_level < 0 || max_level > 6)
    throw BoundsError("build_octahedron_hierarchy: max_level " +
                      std::to_string(max_level) + " outside [0, 6]");
  std::vector<HierarchyLevel> levels;
  levels.push_back(HierarchyLevel{octahedron_seed(), {}, {}});
  for (int k = 1; k <= max_level; ++k)
    levels.push_back(subdivide(levels.back().mesh));
  return TriMeshHierarchy(std::move(levels));
}

// ---------------------------------------------------------------------------
// Convex hull
// ---------------------------------------------------------------------------

namespace {

// Deterministic per-index perturbation used to break coplanarity in the
// symmetric grids before hull construction. The output triangulation indexes
// the original, unperturbed points.
Vec3 jitter(const Vec3& p, int index, double scale) {
  uint64_t s = 0x9E3779B97F4A7C15ull * (static_cast<uint64_t>(index) + 1);
  auto next = [&s]() {
    s ^= s >> 30;
    s *= 0xBF58476D1CE4E5B9ull;
    s ^= s >> 27;
    s *= 0x94D049BB133111EBull;
    s ^= s >> 31;
    return static_cast<double>(s >> 11) * 0x1.0p-53 - 0.5;
  };
  Vec3 q{p.x + scale * next(), p.y + scale * next(), p.z + scale * next()};
  return q.normalized();
}

struct HullFace {
  std::array<int, 3> v;
  Vec3 normal;  // not normalised
  double offset;
  bool alive = true;
};

}  // namespace

std::vector<std::array<int, 3>> convex_hull_triangulation(
    const std::vector<Vec3>& points) {
  const int n = static_cast<int>(points.size());
  if (n < 4) throw BoundsError("convex hull needs at least 4 points");

  std::vector<Vec3> p(points.size());
  for (int i = 0; i < n; ++i) p[i] = jitter(points[i], i, 1e-7);

  // Seed tetrahedron: first point, farthest point, max-area third,
  // max-volume fourth.
  int i0 = 0;
  int i1 = 1;
  double best = -1.0;
  for (int i = 1; i < n; ++i) {
    const double d = (p[i] - p[i0]).norm();
    if (d > best) {
      best = d;
      i1 = i;
    }
  }
  int i2 = -1;
  best = -1.0;
  for (int i = 0; i < n; ++i) {
    if (i == i0 || i == i1) continue;
    const double a = (p[i1] - p[i0]).cross(p[i] - p[i0]).norm();
    if (a > best) {
      best = a;
      i2 = i;
    }
  }
  int i3 = -1;
  best = -1.0;
  const Vec3 nrm = (p[i1] - p[i0]).cross(p[i2] - p[i0]);
  for (int i = 0; i < n; ++i) {
    if (i == i0 || i == i1 || i == i2) continue;
    const double v = std::abs(nrm.dot(p[i] - p[i0]));
    if (v > best) {
      best = v;
      i3 = i;
    }
  }
  if (i2 < 0 || i3 < 0 || best < 1e-12)
    throw BoundsError("convex hull: degenerate input");

  std::vector<HullFace> faces;
  auto add_face = [&](int a, int b, int c, const Vec3& inside) {
    HullFace f;
    f.v = {a, b, c};
    f.normal = (p[b] - p[a]).cross(p[c] - p[a]);
    if (f.normal.dot(inside - p[a]) > 0.0) {
      std::swap(f.v[1], f.v[2]);
      f.normal = f.normal * -1.0;
    }
    f.offset = f.normal.dot(p[f.v[0]]);
    faces.push_back(f);
  };
  const Vec3 centroid = (p[i0] + p[i1] + p[i2] + p[i3]) / 4.0;
  add_face(i0, i1, i2, centroid);
  add_face(i0, i1, i3, centroid);
  add_face(i0, i2, i3, centroid);
  add_face(i1, i2, i3, centroid);

  for (int i = 0; i < n; ++i) {
    if (i == i0 || i == i1 || i == i2 || i == i3) continue;
    // Faces visible from point i.
    std::vector<int> visible;
    for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
      if (!faces[f].alive) continue;
      if (faces[f].normal.dot(p[i]) - faces[f].offset > 1e-12) visible.push_back(f);
    }
    if (visible.empty()) continue;  // inside current hull

    // Horizon: directed edges of visible faces whose twin face is hidden.
    std::map<std::pair<int, int>, int> edge_count;
    for (int f : visible) {
      const auto& v = faces[f].v;
      for (int e = 0; e < 3; ++e) {
        const int a = v[e];
        const int b = v[(e + 1) % 3];
        edge_count[std::minmax(a, b)]++;
      }
    }
    std::vector<std::array<int, 2>> horizon;
    for (int f : visible) {
      const auto& v = faces[f].v;
      for (int e = 0; e < 3; ++e) {
        const int a = v[e];
        const int b = v[(e + 1) % 3];
        if (edge_count[std::minmax(a, b)] == 1) horizon.push_back({a, b});
      }
    }
    for (int f : visible) faces[f].alive = false;
    for (const auto& e : horizon) add_face(e[0], e[1], i, centroid);
  }

  std::vector<std::array<int, 3>> result;
  for (const auto& f : faces) {
    if (!f.alive) continue;
    auto t = f.v;
    // Orient outward with respect to the original points.
    const Vec3 nn =
        (points[t[1]] - points[t[0]]).cross(points[t[2]] - points[t[0]]);
    if (nn.dot(points[t[0]]) < 0.0) std::swap(t[1], t[2]);
    result.push_back(t);
  }

  // Closed 2-manifold check: every undirected edge on exactly two faces.
  std::map<std::pair<int, int>, int> edge_use;
  std::vector<bool> used(points.size(), false);
  for (const auto& t : result) {
    for (int e = 0; e < 3; ++e) {
      edge_use[std::minmax(t[e], t[(e + 1) % 3])]++;
      used[static_cast<size_t>(t[e])] = true;
    }
  }
  for (const auto& [edge, count] : edge_use) {
    if (count != 2)
      throw BoundsError("convex hull: non-manifold edge (degenerate input?)");
  }
  for (int i = 0; i < n; ++i) {
    if (!used[static_cast<size_t>(i)])
      throw BoundsError("convex hull: point " + std::to_string(i) +
                        " not on hull");
  }
  std::sort(result.begin(), result.end());
  return result;
}

double triangle_solid_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double num = a.dot(b.cross(c));
  const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
  return 2.0 * std::atan2(num, den);
}

double total_solid_angle(const std::vector<Vec3>& vertices,
                         const std::vector<std::array<int, 3>>& triangles) {
  double sum = 0.0;
  for (const auto& t : triangles)
    sum += std::abs(
        triangle_solid_angle(vertices[t[0]], vertices[t[1]], vertices[t[2]]));
  return sum;
}

// ---------------------------------------------------------------------------
// Point location
// ---------------------------------------------------------------------------

TriangleLocation locate_triangle(const std::vector<Vec3>& vertices,
                                 const std::vector<std::array<int, 3>>& triangles,
                                 const Vec3& dir) {
  const Vec3 d = dir.normalized();
  int best_tri = -1;
  double best_min = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < static_cast<int>(triangles.size()); ++t) {
    const auto& tri = triangles[t];
    double m = std::numeric_limits<double>::infinity();
    for (int e = 0; e < 3; ++e) {
      const Vec3& a = vertices[tri[e]];
      const Vec3& b = vertices[tri[(e + 1) % 3]];
      const Vec3 edge_normal = a.cross(b);  // points inside for CCW faces
      m = std::min(m, d.dot(edge_normal) / edge_normal.norm());
    }
    // Strictly-better keeps the lowest triangle id on edge ties.
    if (m > best_min + 1e-12) {
      best_min = m;
      best_tri = t;
    }
  }
  if (best_tri < 0) throw BoundsError("locate_triangle: empty mesh");

  const auto& tri = triangles[best_tri];
  const Vec3& v0 = vertices[tri[0]];
  const Vec3& v1 = vertices[tri[1]];
  const Vec3& v2 = vertices[tri[2]];

  // Gnomonic projection of d onto the triangle plane, then planar
  // barycentric coordinates.
  const Vec3 n = (v1 - v0).cross(v2 - v0);
  const double dn = d.dot(n);
  TriangleLocation loc;
  loc.triangle = best_tri;
  if (std::abs(dn) < 1e-300) {
    loc.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    return loc;
  }
  const Vec3 q = d * (v0.dot(n) / dn);
  const Vec3 e0 = v1 - v0;
  const Vec3 e1 = v2 - v0;
  const Vec3 e2 = q - v0;
  const double d00 = e0.dot(e0), d01 = e0.dot(e1), d11 = e1.dot(e1);
  const double d20 = e2.dot(e0), d21 = e2.dot(e1);
  const double denom = d00 * d11 - d01 * d01;
  double w1 = (d11 * d20 - d01 * d21) / denom;
  double w2 = (d00 * d21 - d01 * d20) / denom;
  double w0 = 1.0 - w1 - w2;
  w0 = std::max(w0, 0.0);
  w1 = std::max(w1, 0.0);
  w2 = std::max(w2, 0.0);
  const double s = w0 + w1 + w2;
  loc.weights = {w0 / s, w1 / s, w2 / s};
  return loc;
}

TriangleLocation locate_triangle(const TriMesh& mesh, const Direction& d) {
  return locate_triangle(mesh.vertices, mesh.triangles, d.unit());
}

// ---------------------------------------------------------------------------
// Layouts
// ---------------------------------------------------------------------------

LoudspeakerLayout make_layout(std::string_view name,
                              std::vector<Direction> directions) {
  LoudspeakerLayout layout;
  layout.name = std::string(name);
  layout.directions = std::move(directions);
  layout.units.reserve(layout.directions.size());
  for (const auto& d : layout.directions) layout.units.push_back(d.unit());

  for (size_t i = 0; i < layout.units.size(); ++i)
    for (size_t j = i + 1; j < layout.units.size(); ++j)
      if (angle_between_deg(layout.units[i], layout.units[j]) <= 0.1)
        throw ConfigError("layout '" + layout.name +
                          "': directions " + std::to_string(i) + " and " +
                          std::to_string(j) + " are closer than 0.1 deg");

  layout.triangles = convex_hull_triangulation(layout.units);
  return layout;
}

LoudspeakerLayout load_layout_file(const std::filesystem::path& path,
                                   std::string_view name) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open layout file " + path.string());
  std::vector<Direction> dirs;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double az, el;
    if (ls >> az >> el) dirs.push_back(Direction::from_degrees(az, el));
  }
  if (dirs.empty())
    throw IngestError("layout file " + path.string() + " has no directions");
  return make_layout(name, std::move(dirs));
}

namespace {

std::filesystem::path find_data_file(const std::string& relative) {
  std::vector<std::filesystem::path> roots;
  if (const char* env = std::getenv("SFEVAL_DATA_DIR")) roots.emplace_back(env);
  roots.emplace_back("data");
  roots.emplace_back(SFEVAL_SOURCE_DATA_DIR);
  for (const auto& root : roots) {
    const auto candidate = root / relative;
    if (std::filesystem::exists(candidate)) return candidate;
  }
  throw IngestError("data file '" + relative +
                    "' not found (set SFEVAL_DATA_DIR)");
}

}  // namespace

LoudspeakerLayout load_layout(std::string_view name) {
  if (name != "octahedron" && name != "tdesign24" && name != "lebedev50")
    throw ConfigError("unknown layout '" + std::string(name) +
                      "' (expected octahedron, tdesign24 or lebedev50)");
  const auto path =
      find_data_file("layouts/" + std::string(name) + ".txt");
  return load_layout_file(path, name);
}

std::vector<Direction> fibonacci_grid(int count) {
  std::vector<Direction> dirs;
  dirs.reserve(count);
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = 2.0 * kPi * std::fmod(i / golden, 1.0);
    dirs.push_back(
        Direction::from_unit({r * std::cos(phi), r * std::sin(phi), z}));
  }
  return dirs;
}

}  // namespace sfeval
