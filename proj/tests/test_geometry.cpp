#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <algorithm>
#include <map>
#include <set>

#include "sfeval/error.hpp"
#include "sfeval/geometry.hpp"

using namespace sfeval;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("direction round trip preserves azimuth and elevation") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> az_dist(-180.0, 180.0);
  std::uniform_real_distribution<double> el_dist(-85.0, 85.0);
  for (int i = 0; i < 100; ++i) {
    const double az = az_dist(rng);
    const double el = el_dist(rng);
    const Direction d = Direction::from_degrees(az, el);
    const Direction back = Direction::from_unit(d.unit());
    CHECK(std::abs(back.elevation_deg() - el) < 1e-9);
    double daz = std::fmod(back.azimuth_deg() - az, 360.0);
    if (daz > 180.0) daz -= 360.0;
    if (daz < -180.0) daz += 360.0;
    CHECK(std::abs(daz) < 1e-9);
  }
}

TEST_CASE("direction unit vectors are unit length") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> az_dist(-180.0, 360.0);
  std::uniform_real_distribution<double> el_dist(-90.0, 90.0);
  for (int i = 0; i < 200; ++i) {
    const Direction d = Direction::from_degrees(az_dist(rng), el_dist(rng));
    CHECK(std::abs(d.unit().norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("over-the-pole elevations fold to the back hemisphere") {
  const Direction d = Direction::from_degrees(0.0, 135.0);
  CHECK(d.elevation_deg() == doctest::Approx(45.0));
  CHECK(std::abs(std::abs(d.azimuth_deg()) - 180.0) < 1e-12);
  CHECK(d.angle_to(Direction::from_degrees(180.0, 45.0)) < 1e-9);
}

TEST_CASE("azimuth convention: +90 degrees is +y") {
  const Vec3 u = Direction::from_degrees(90.0, 0.0).unit();
  CHECK(u.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(u.y == doctest::Approx(1.0));
}

TEST_CASE("octahedron hierarchy vertex counts follow 6, 18, 66, 258") {
  const auto h = build_octahedron_hierarchy(3);
  REQUIRE(h.max_level() == 3);
  CHECK(h.vertex_count(0) == 6);
  CHECK(h.vertex_count(1) == 18);
  CHECK(h.vertex_count(2) == 66);
  CHECK(h.vertex_count(3) == 258);
  CHECK(h.mesh(0).triangles.size() == 8);
  CHECK(h.mesh(3).triangles.size() == 8 * 64);
}

TEST_CASE("hierarchy level zero is a single octahedron") {
  const auto h = build_octahedron_hierarchy(0);
  CHECK(h.max_level() == 0);
  CHECK(h.vertex_count(0) == 6);
  CHECK(h.mesh(0).triangles.size() == 8);
}

TEST_CASE("hierarchy vertices stay on the unit sphere and nest") {
  const auto h = build_octahedron_hierarchy(3);
  for (int k = 0; k <= 3; ++k)
    for (const auto& v : h.mesh(k).vertices)
      CHECK(std::abs(v.norm() - 1.0) < 1e-12);
  // Level-k vertices appear unchanged in level k+1.
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < h.vertex_count(k); ++i) {
      const Vec3 a = h.mesh(k).vertices[static_cast<size_t>(i)];
      const Vec3 b = h.mesh(k + 1).vertices[static_cast<size_t>(i)];
      CHECK((a - b).norm() == 0.0);
    }
}

TEST_CASE("every new vertex is the normalised midpoint of one coarse edge") {
  const auto h = build_octahedron_hierarchy(2);
  for (int k = 1; k <= 2; ++k) {
    const auto& level = h.level(k);
    const int coarse = h.vertex_count(k - 1);
    std::set<std::pair<int, int>> seen;
    for (size_t j = 0; j < level.parents.size(); ++j) {
      const auto [a, b] = level.parents[j];
      CHECK(!seen.count({a, b}));
      seen.insert({a, b});
      const Vec3 mid = (h.mesh(k - 1).vertices[static_cast<size_t>(a)] +
                        h.mesh(k - 1).vertices[static_cast<size_t>(b)])
                           .normalized();
      const Vec3 v = level.mesh.vertices[static_cast<size_t>(coarse) + j];
      CHECK((mid - v).norm() < 1e-15);
    }
  }
}

TEST_CASE("hierarchy meshes are closed 2-manifolds") {
  const auto h = build_octahedron_hierarchy(3);
  for (int k = 0; k <= 3; ++k) {
    const auto& mesh = h.mesh(k);
    std::map<std::pair<int, int>, int> edges;
    for (const auto& t : mesh.triangles)
      for (int e = 0; e < 3; ++e)
        edges[std::minmax(t[e], t[(e + 1) % 3])]++;
    for (const auto& [edge, count] : edges) CHECK(count == 2);
    const long v = static_cast<long>(mesh.vertices.size());
    const long e = static_cast<long>(edges.size());
    const long f = static_cast<long>(mesh.triangles.size());
    CHECK(v - e + f == 2);  // Euler characteristic
    // V(k+1) = V(k) + E(k)
    if (k < 3) CHECK(h.vertex_count(k + 1) == v + e);
  }
}

TEST_CASE("hierarchy level bounds are enforced") {
  CHECK_THROWS_AS(build_octahedron_hierarchy(-1), BoundsError);
  CHECK_THROWS_AS(build_octahedron_hierarchy(7), BoundsError);
}

TEST_CASE("built-in layouts load with the documented sizes") {
  const auto octa = load_layout("octahedron");
  const auto tdes = load_layout("tdesign24");
  const auto lebe = load_layout("lebedev50");
  CHECK(octa.size() == 6);
  CHECK(tdes.size() == 24);
  CHECK(lebe.size() == 50);

  bool has_up = false, has_down = false;
  for (const auto& d : octa.directions) {
    if (d.angle_to(Direction::from_degrees(0, 90)) < 1e-9) has_up = true;
    if (d.angle_to(Direction::from_degrees(0, -90)) < 1e-9) has_down = true;
  }
  CHECK(has_up);
  CHECK(has_down);

  CHECK_THROWS_AS(load_layout("cube"), ConfigError);
}

TEST_CASE("layout triangulations cover the sphere") {
  for (const char* name : {"octahedron", "tdesign24", "lebedev50"}) {
    const auto layout = load_layout(name);
    CAPTURE(name);
    CHECK(std::abs(total_solid_angle(layout.units, layout.triangles) -
                   4.0 * kPi) < 1e-6);
    // All directions pairwise distinct.
    for (size_t i = 0; i < layout.units.size(); ++i)
      for (size_t j = i + 1; j < layout.units.size(); ++j)
        CHECK(angle_between_deg(layout.units[i], layout.units[j]) > 0.1);
  }
}

TEST_CASE("locate_triangle at a vertex returns weight one") {
  const auto h = build_octahedron_hierarchy(2);
  const auto& mesh = h.finest();
  for (int i : {0, 5, 17, 40, 65}) {
    const auto loc =
        locate_triangle(mesh, Direction::from_unit(mesh.vertices[static_cast<size_t>(i)]));
    const auto& tri = mesh.triangles[static_cast<size_t>(loc.triangle)];
    double at_vertex = 0.0;
    for (int c = 0; c < 3; ++c)
      if (tri[static_cast<size_t>(c)] == i)
        at_vertex = loc.weights[static_cast<size_t>(c)];
    CHECK(at_vertex == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("locate_triangle at a spherical centroid gives thirds") {
  const auto h = build_octahedron_hierarchy(1);
  const auto& mesh = h.finest();
  const auto& tri = mesh.triangles[3];
  const Vec3 centroid = (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] +
                         mesh.vertices[tri[2]])
                            .normalized();
  const auto loc = locate_triangle(mesh, Direction::from_unit(centroid));
  for (double w : loc.weights) CHECK(w == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("locate_triangle is total over a Fibonacci grid") {
  const auto h = build_octahedron_hierarchy(2);
  const auto& mesh = h.finest();
  for (const auto& d : fibonacci_grid(10000)) {
    const auto loc = locate_triangle(mesh, d);
    REQUIRE(loc.triangle >= 0);
    REQUIRE(loc.triangle < static_cast<int>(mesh.triangles.size()));
    double sum = 0.0;
    for (double w : loc.weights) {
      CHECK(w >= 0.0);
      sum += w;
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("locate_triangle breaks edge ties toward the lowest triangle id") {
  const auto h = build_octahedron_hierarchy(0);
  const auto& mesh = h.finest();
  // (45, 0) sits on the equatorial edge shared by faces 0 ({0,2,4}) and
  // 4 ({2,0,5}); the lower id wins.
  const auto loc = locate_triangle(mesh, Direction::from_degrees(45.0, 0.0));
  CHECK(loc.triangle == 0);
  // The off-edge vertex (+z) carries no weight.
  CHECK(loc.weights[2] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(loc.weights[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(loc.weights[1] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("layout file loader rejects empty and missing files") {
  CHECK_THROWS_AS(load_layout_file("/nonexistent/file.txt", "x"), IngestError);
}
