#include "lpi/mesh.hpp"

#include "lpi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <utility>

namespace lpi {

Vec3 TriangleMesh::triangle_normal(std::size_t t) const {
  const auto& tri = triangles[t];
  const Vec3& a = vertices[tri[0]];
  return (vertices[tri[1]] - a).cross(vertices[tri[2]] - a);
}

double TriangleMesh::triangle_area(std::size_t t) const { return 0.5 * triangle_normal(t).norm(); }

double TriangleMesh::area() const {
  double total = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) total += triangle_area(t);
  return total;
}

double TriangleMesh::signed_volume() const {
  double total = 0.0;
  for (const auto& tri : triangles) {
    total += vertices[tri[0]].dot(vertices[tri[1]].cross(vertices[tri[2]]));
  }
  return total / 6.0;
}

bool is_watertight(const TriangleMesh& mesh) {
  if (mesh.empty()) return false;
  // Directed edge counts; a closed, consistently wound surface uses each
  // directed edge once and its reverse once.
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> directed;
  for (const auto& tri : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      const std::uint32_t a = tri[e];
      const std::uint32_t b = tri[(e + 1) % 3];
      if (a == b) return false;
      if (++directed[{a, b}] > 1) return false;
    }
  }
  for (const auto& [edge, count] : directed) {
    if (directed.find({edge.second, edge.first}) == directed.end()) return false;
  }
  return true;
}

TriangleMesh denormalized(TriangleMesh mesh, const Normalization& normalization) {
  for (auto& v : mesh.vertices) v = normalization.invert(v);
  return mesh;
}

void write_obj(std::ostream& out, const TriangleMesh& mesh) {
  out << std::setprecision(17);
  for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_obj(out, mesh);
  if (!out) throw IoError("failed writing " + path.string());
}

namespace {

std::uint32_t resolve_index(const std::string& token, std::size_t vertex_count, std::size_t line) {
  const std::string head = token.substr(0, token.find('/'));
  long long idx = 0;
  try {
    std::size_t used = 0;
    idx = std::stoll(head, &used);
    if (used != head.size()) throw std::invalid_argument(head);
  } catch (const std::exception&) {
    throw FormatError("line " + std::to_string(line) + ": bad face index '" + token + "'");
  }
  if (idx < 0) idx += static_cast<long long>(vertex_count) + 1;
  if (idx < 1 || idx > static_cast<long long>(vertex_count)) {
    throw FormatError("line " + std::to_string(line) + ": face index out of range");
  }
  return static_cast<std::uint32_t>(idx - 1);
}

}  // namespace

TriangleMesh read_obj(std::istream& in) {
  TriangleMesh mesh;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::istringstream ls(raw);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z()) || !v.allFinite()) {
        throw FormatError("line " + std::to_string(line) + ": bad vertex");
      }
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<std::uint32_t> poly;
      std::string token;
      while (ls >> token) poly.push_back(resolve_index(token, mesh.vertices.size(), line));
      if (poly.size() < 3) throw FormatError("line " + std::to_string(line) + ": face with fewer than 3 vertices");
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) mesh.triangles.push_back({poly[0], poly[k], poly[k + 1]});
    }
  }
  if (in.bad()) throw IoError("read error");
  return mesh;
}

TriangleMesh read_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_obj(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace lpi
