#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mcl2d/core.hpp"

// Triangular meshes: Gmsh MSH 2.2 ASCII import/export plus generators for
// the mapped channel geometries and a doubly periodic test strip.

namespace mcl2d {

struct UnsupportedVersion : Error { using Error::Error; };
struct UnsupportedElementType : Error { using Error::Error; };
struct DanglingBoundaryEdge : Error { using Error::Error; };
struct DegenerateGeometry : Error { using Error::Error; };

struct Mesh {
  struct BoundaryEdge {
    int a = 0, b = 0;  // oriented along the owning triangle (domain on the left)
    int patch = 0;
  };

  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<BoundaryEdge> boundary_edges;
  std::map<int, std::string> patch_names;
  std::vector<int> periodic;  // canonical vertex ids; empty unless periodic

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }

  double total_area() const {
    double a = 0.0;
    for (const auto& t : triangles)
      a += signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
    return a;
  }

  static double signed_area(Vec2 a, Vec2 b, Vec2 c) {
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
  }
};

// unit outward normal of a boundary edge oriented with the domain on its left
inline Vec2 boundary_normal(const Mesh& mesh, const Mesh::BoundaryEdge& e) {
  const Vec2 t = mesh.vertices[e.b] - mesh.vertices[e.a];
  return perp(t) / norm(t);
}

namespace detail {

// Orients boundary edges to run along their owning triangle and verifies
// that the listed edges are exactly the mesh boundary.
inline void finalize_boundary(Mesh& mesh) {
  std::map<std::pair<int, int>, int> owners;  // undirected edge -> #triangles
  std::map<std::pair<int, int>, bool> forward;  // true if (a,b) is a ccw edge
  auto key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      owners[key(a, b)] += 1;
      forward[key(a, b)] = a < b;
    }
  }
  std::map<std::pair<int, int>, int> listed;
  for (auto& e : mesh.boundary_edges) {
    const auto k = key(e.a, e.b);
    const auto it = owners.find(k);
    if (it == owners.end() || it->second != 1)
      throw DanglingBoundaryEdge("boundary line is not an edge of exactly one triangle");
    if (forward.at(k) != (e.a < e.b)) std::swap(e.a, e.b);
    listed[k] += 1;
  }
  for (const auto& [k, count] : owners) {
    if (count > 2) throw DanglingBoundaryEdge("edge shared by more than two triangles");
    if (count == 1 && mesh.periodic.empty() && listed.find(k) == listed.end())
      throw DanglingBoundaryEdge("mesh boundary edge carries no patch line");
  }
  for (const auto& [k, count] : listed)
    if (count != 1) throw DanglingBoundaryEdge("duplicate boundary line");
}

inline void orient_triangles(Mesh& mesh) {
  for (auto& t : mesh.triangles) {
    const double a =
        Mesh::signed_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    if (a < 0.0) std::swap(t[1], t[2]);
  }
}

}  // namespace detail

// --------------------------------------------------------------------------
// Gmsh MSH 2.2 ASCII reader. Supported element types: 1 (2-node line,
// boundary patch via the physical tag) and 2 (3-node triangle).

inline Mesh read_gmsh(std::istream& in) {
  Mesh mesh;
  std::map<long, int> node_index;
  std::string line;

  auto next_line = [&](std::string& out) {
    while (std::getline(in, out)) {
      if (!out.empty() && out.back() == '\r') out.pop_back();
      if (!out.empty()) return true;
    }
    return false;
  };

  while (next_line(line)) {
    if (line == "$MeshFormat") {
      if (!next_line(line)) throw Error("gmsh: truncated $MeshFormat");
      std::istringstream ss(line);
      std::string version;
      int file_type = 0, data_size = 0;
      ss >> version >> file_type >> data_size;
      if (version.rfind("2.2", 0) != 0)
        throw UnsupportedVersion("gmsh: need MSH version 2.2, got " + version);
      if (file_type != 0) throw UnsupportedVersion("gmsh: binary files not supported");
      next_line(line);  // $EndMeshFormat
    } else if (line == "$PhysicalNames") {
      next_line(line);
      const int n = std::stoi(line);
      for (int i = 0; i < n; ++i) {
        next_line(line);
        std::istringstream ss(line);
        int dim = 0, id = 0;
        ss >> dim >> id;
        std::string name;
        std::getline(ss, name);
        const auto l = name.find('"');
        const auto r = name.rfind('"');
        if (l != std::string::npos && r > l) name = name.substr(l + 1, r - l - 1);
        mesh.patch_names[id] = name;
      }
      next_line(line);  // $EndPhysicalNames
    } else if (line == "$Nodes") {
      next_line(line);
      const long n = std::stol(line);
      mesh.vertices.reserve(static_cast<std::size_t>(n));
      for (long i = 0; i < n; ++i) {
        next_line(line);
        std::istringstream ss(line);
        long id = 0;
        double x = 0, y = 0, z = 0;
        ss >> id >> x >> y >> z;
        node_index[id] = mesh.num_vertices();
        mesh.vertices.push_back({x, y});
      }
      next_line(line);  // $EndNodes
    } else if (line == "$Elements") {
      next_line(line);
      const long n = std::stol(line);
      for (long i = 0; i < n; ++i) {
        next_line(line);
        std::istringstream ss(line);
        long id = 0;
        int type = 0, ntags = 0;
        ss >> id >> type >> ntags;
        std::vector<int> tags(ntags);
        for (int& t : tags) ss >> t;
        if (type == 1) {
          long a = 0, b = 0;
          ss >> a >> b;
          Mesh::BoundaryEdge e;
          e.a = node_index.at(a);
          e.b = node_index.at(b);
          e.patch = tags.empty() ? 0 : tags[0];
          mesh.boundary_edges.push_back(e);
        } else if (type == 2) {
          long a = 0, b = 0, c = 0;
          ss >> a >> b >> c;
          mesh.triangles.push_back(
              {node_index.at(a), node_index.at(b), node_index.at(c)});
        } else {
          throw UnsupportedElementType("gmsh: element type " + std::to_string(type) +
                                       " (only lines and triangles)");
        }
      }
      next_line(line);  // $EndElements
    }
    // unknown sections are skipped implicitly: their lines match no header
  }
  if (mesh.vertices.empty() || mesh.triangles.empty())
    throw Error("gmsh: no nodes or no triangles found");
  detail::orient_triangles(mesh);
  detail::finalize_boundary(mesh);
  return mesh;
}

inline void write_gmsh(const Mesh& mesh, std::ostream& out) {
  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
  if (!mesh.patch_names.empty()) {
    out << "$PhysicalNames\n" << mesh.patch_names.size() << "\n";
    for (const auto& [id, name] : mesh.patch_names)
      out << "1 " << id << " \"" << name << "\"\n";
    out << "$EndPhysicalNames\n";
  }
  char buf[96];
  out << "$Nodes\n" << mesh.num_vertices() << "\n";
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d %.17g %.17g 0\n", i + 1, mesh.vertices[i].x,
                  mesh.vertices[i].y);
    out << buf;
  }
  out << "$EndNodes\n$Elements\n"
      << mesh.boundary_edges.size() + mesh.triangles.size() << "\n";
  long id = 1;
  for (const auto& e : mesh.boundary_edges)
    out << id++ << " 1 2 " << e.patch << " " << e.patch << " " << e.a + 1 << " "
        << e.b + 1 << "\n";
  for (const auto& t : mesh.triangles)
    out << id++ << " 2 2 0 0 " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1
        << "\n";
  out << "$EndElements\n";
}

// --------------------------------------------------------------------------
// Generators

// Wall curves of a mapped channel; lower_wall(x) < upper_wall(x) required.
struct GeometryMap {
  std::function<double(double)> lower_wall;
  std::function<double(double)> upper_wall;
};

// patch ids used by generated channel meshes
namespace channel_patch {
constexpr int inlet = 1;
constexpr int outlet = 2;
constexpr int lower_wall = 3;
constexpr int upper_wall = 4;
}  // namespace channel_patch

// Structured (nx+1) x (ny+1) grid mapped between the wall curves, each quad
// split into two triangles.
inline Mesh generate_channel(int nx, int ny, double x0, double x1,
                             const GeometryMap& gmap) {
  if (nx < 1 || ny < 1) throw Error("generate_channel: nx, ny must be >= 1");
  Mesh mesh;
  const auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const double x = x0 + (x1 - x0) * i / nx;
      const double yl = gmap.lower_wall(x);
      const double yu = gmap.upper_wall(x);
      if (!(yl < yu)) throw DegenerateGeometry("generate_channel: walls cross");
      mesh.vertices.push_back({x, yl + (yu - yl) * j / ny});
    }
  }
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  }
  for (int j = 0; j < ny; ++j) {
    mesh.boundary_edges.push_back({vid(0, j + 1), vid(0, j), channel_patch::inlet});
    mesh.boundary_edges.push_back({vid(nx, j), vid(nx, j + 1), channel_patch::outlet});
  }
  for (int i = 0; i < nx; ++i) {
    mesh.boundary_edges.push_back({vid(i, 0), vid(i + 1, 0), channel_patch::lower_wall});
    mesh.boundary_edges.push_back({vid(i + 1, ny), vid(i, ny), channel_patch::upper_wall});
  }
  mesh.patch_names = {{channel_patch::inlet, "inlet"},
                      {channel_patch::outlet, "outlet"},
                      {channel_patch::lower_wall, "lower_wall"},
                      {channel_patch::upper_wall, "upper_wall"}};
  detail::orient_triangles(mesh);
  detail::finalize_boundary(mesh);
  return mesh;
}

// Rectangle with wrap-around vertex identification in both directions.
// The pairing lives in Mesh::periodic; boundary edges stay empty.
inline Mesh generate_periodic_strip(int nx, int ny, double lx, double ly) {
  if (nx < 2 || ny < 2) throw Error("generate_periodic_strip: nx, ny must be >= 2");
  Mesh mesh;
  const auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.vertices.push_back({lx * i / nx, ly * j / ny});
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  }
  mesh.periodic.resize(mesh.vertices.size());
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.periodic[vid(i, j)] = vid(i % nx, j % ny);
  return mesh;
}

}  // namespace mcl2d
