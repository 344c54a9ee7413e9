#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <sstream>

#include "mcl2d/mesh.hpp"

using namespace mcl2d;

namespace {

GeometryMap unit_square() {
  return {[](double) { return 0.0; }, [](double) { return 1.0; }};
}

GeometryMap gamm_walls() {
  return {[](double x) {
            return (x >= -0.5 && x <= 0.5) ? std::sqrt(1.69 - x * x) - 1.2 : 0.0;
          },
          [](double) { return 1.0; }};
}

GeometryMap nozzle_walls() {
  auto g = [](double x) {
    if (x <= 0.0 || x > 4.0) return 1.0;
    return (std::cos(0.5 * M_PI * x) + 3.0) / 4.0;
  };
  return {[g](double x) { return -g(x); }, [g](double x) { return g(x); }};
}

const char* single_triangle_msh =
    "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n"
    "$PhysicalNames\n1\n1 7 \"rim\"\n$EndPhysicalNames\n"
    "$Nodes\n3\n1 0 0 0\n2 1 0 0\n3 0 1 0\n$EndNodes\n"
    "$Elements\n4\n"
    "1 1 2 7 7 1 2\n"
    "2 1 2 7 7 2 3\n"
    "3 1 2 7 7 3 1\n"
    "4 2 2 0 0 1 2 3\n"
    "$EndElements\n";

}  // namespace

TEST_CASE("generate_channel: unit square 1x1") {
  const Mesh m = generate_channel(1, 1, 0.0, 1.0, unit_square());
  CHECK(m.num_vertices() == 4);
  CHECK(m.num_triangles() == 2);
  CHECK(m.boundary_edges.size() == 4);
  CHECK(m.patch_names.size() == 4);
  CHECK(m.total_area() == Catch::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("generate_channel: mapped geometries") {
  // GAMM circular-arc bump: height 0.1 at x = 0, meets the flat wall at +-0.5
  const auto gamm = gamm_walls();
  CHECK(gamm.lower_wall(0.0) == Catch::Approx(0.1).margin(1e-12));
  CHECK(gamm.lower_wall(0.5) == Catch::Approx(0.0).margin(1e-12));
  CHECK(gamm.lower_wall(-0.5) == Catch::Approx(0.0).margin(1e-12));

  const auto noz = nozzle_walls();
  CHECK(noz.lower_wall(2.0) == Catch::Approx(-0.5).margin(1e-12));
  CHECK(noz.upper_wall(2.0) == Catch::Approx(0.5).margin(1e-12));

  const Mesh m = generate_channel(40, 12, -1.0, 1.0, gamm);
  CHECK(m.num_vertices() == 41 * 13);
  CHECK(m.num_triangles() == 2 * 40 * 12);

  // triangulated area equals the area of the sampled polygon
  double poly = 0.0;
  for (int i = 0; i < 40; ++i) {
    const double xa = -1.0 + 2.0 * i / 40, xb = -1.0 + 2.0 * (i + 1) / 40;
    const double ha = gamm.upper_wall(xa) - gamm.lower_wall(xa);
    const double hb = gamm.upper_wall(xb) - gamm.lower_wall(xb);
    poly += 0.5 * (ha + hb) * (xb - xa);
  }
  CHECK(m.total_area() == Catch::Approx(poly).epsilon(1e-12));

  // positive area for every triangle
  for (const auto& t : m.triangles)
    CHECK(Mesh::signed_area(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]) > 0.0);

  // outward normals point away from the owning triangle centroid
  for (const auto& e : m.boundary_edges) {
    const Vec2 n = boundary_normal(m, e);
    CHECK(norm(n) == Catch::Approx(1.0).epsilon(1e-14));
    for (const auto& t : m.triangles) {
      const bool owns = ((t[0] == e.a || t[1] == e.a || t[2] == e.a) &&
                         (t[0] == e.b || t[1] == e.b || t[2] == e.b));
      if (!owns) continue;
      const Vec2 centroid =
          (m.vertices[t[0]] + m.vertices[t[1]] + m.vertices[t[2]]) / 3.0;
      const Vec2 mid = 0.5 * (m.vertices[e.a] + m.vertices[e.b]);
      CHECK(dot(n, mid - centroid) > 0.0);
    }
  }

  GeometryMap crossing{[](double) { return 1.0; }, [](double) { return 0.0; }};
  CHECK_THROWS_AS(generate_channel(2, 2, 0.0, 1.0, crossing), DegenerateGeometry);
}

TEST_CASE("read_gmsh: minimal file and error paths") {
  std::istringstream in(single_triangle_msh);
  const Mesh m = read_gmsh(in);
  CHECK(m.num_vertices() == 3);
  CHECK(m.num_triangles() == 1);
  CHECK(m.boundary_edges.size() == 3);
  CHECK(m.patch_names.at(7) == "rim");

  // clockwise triangle gets reoriented
  std::string cw(single_triangle_msh);
  const auto pos = cw.find("1 2 3\n");
  cw.replace(pos, 5, "1 3 2");
  std::istringstream in2(cw);
  const Mesh m2 = read_gmsh(in2);
  CHECK(Mesh::signed_area(m2.vertices[m2.triangles[0][0]], m2.vertices[m2.triangles[0][1]],
                          m2.vertices[m2.triangles[0][2]]) > 0.0);

  std::string quad(single_triangle_msh);
  quad.replace(quad.find("4 2 2 0 0 1 2 3"), 15, "4 3 2 0 0 1 2 3");
  std::istringstream in3(quad);
  CHECK_THROWS_AS(read_gmsh(in3), UnsupportedElementType);

  std::string old(single_triangle_msh);
  old.replace(old.find("2.2 0 8"), 7, "4.1 0 8");
  std::istringstream in4(old);
  CHECK_THROWS_AS(read_gmsh(in4), UnsupportedVersion);

  // a boundary line between unconnected nodes dangles
  std::string dangling(single_triangle_msh);
  dangling.replace(dangling.find("$Elements\n4"), 11, "$Elements\n5");
  dangling.insert(dangling.find("$EndElements"), "5 1 2 7 7 1 1\n");
  std::istringstream in5(dangling);
  CHECK_THROWS_AS(read_gmsh(in5), DanglingBoundaryEdge);

  // missing patch line on a true boundary edge is rejected too
  std::string uncovered(single_triangle_msh);
  uncovered.replace(uncovered.find("$Elements\n4"), 11, "$Elements\n3");
  uncovered.erase(uncovered.find("3 1 2 7 7 3 1\n"), 14);
  std::istringstream in6(uncovered);
  CHECK_THROWS_AS(read_gmsh(in6), DanglingBoundaryEdge);
}

TEST_CASE("gmsh round trip preserves a generated mesh") {
  const Mesh m = generate_channel(7, 3, -1.0, 1.0, gamm_walls());
  std::stringstream buf;
  write_gmsh(m, buf);
  const Mesh r = read_gmsh(buf);
  REQUIRE(r.num_vertices() == m.num_vertices());
  REQUIRE(r.num_triangles() == m.num_triangles());
  REQUIRE(r.boundary_edges.size() == m.boundary_edges.size());
  CHECK(r.patch_names == m.patch_names);
  for (int i = 0; i < m.num_vertices(); ++i) {
    CHECK(std::abs(r.vertices[i].x - m.vertices[i].x) <= 1e-15);
    CHECK(std::abs(r.vertices[i].y - m.vertices[i].y) <= 1e-15);
  }
}

TEST_CASE("generate_periodic_strip") {
  const Mesh m = generate_periodic_strip(2, 2, 1.0, 1.0);
  std::set<int> unique(m.periodic.begin(), m.periodic.end());
  CHECK(unique.size() == 4);
  CHECK(m.boundary_edges.empty());
  CHECK(m.total_area() == Catch::Approx(1.0).epsilon(1e-14));

  const Mesh m2 = generate_periodic_strip(4, 3, 2.0, 0.5);
  std::set<int> unique2(m2.periodic.begin(), m2.periodic.end());
  CHECK(unique2.size() == 12);
  CHECK(m2.total_area() == Catch::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(generate_periodic_strip(1, 4, 1.0, 1.0), Error);
}
