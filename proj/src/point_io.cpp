#include "lpi/point_io.hpp"

#include "lpi/errors.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace lpi {
namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

enum class PlyType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

std::optional<PlyType> parse_ply_type(const std::string& name) {
  if (name == "char" || name == "int8") return PlyType::Int8;
  if (name == "uchar" || name == "uint8") return PlyType::UInt8;
  if (name == "short" || name == "int16") return PlyType::Int16;
  if (name == "ushort" || name == "uint16") return PlyType::UInt16;
  if (name == "int" || name == "int32") return PlyType::Int32;
  if (name == "uint" || name == "uint32") return PlyType::UInt32;
  if (name == "float" || name == "float32") return PlyType::Float32;
  if (name == "double" || name == "float64") return PlyType::Float64;
  return std::nullopt;
}

std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::Int8:
    case PlyType::UInt8: return 1;
    case PlyType::Int16:
    case PlyType::UInt16: return 2;
    case PlyType::Int32:
    case PlyType::UInt32:
    case PlyType::Float32: return 4;
    case PlyType::Float64: return 8;
  }
  return 0;
}

template <typename T>
T load(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

double ply_value(PlyType t, const char* p) {
  switch (t) {
    case PlyType::Int8: return load<std::int8_t>(p);
    case PlyType::UInt8: return load<std::uint8_t>(p);
    case PlyType::Int16: return load<std::int16_t>(p);
    case PlyType::UInt16: return load<std::uint16_t>(p);
    case PlyType::Int32: return load<std::int32_t>(p);
    case PlyType::UInt32: return load<std::uint32_t>(p);
    case PlyType::Float32: return load<float>(p);
    case PlyType::Float64: return load<double>(p);
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  PlyType type;
  std::size_t offset;
};

}  // namespace

PointCloud read_xyz(std::istream& in) {
  PointCloud cloud;
  std::string line;
  std::size_t line_no = 0;
  std::optional<bool> labeled;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream row(line);
    std::vector<std::string> tokens;
    for (std::string tok; row >> tok;) tokens.push_back(tok);
    if (tokens.empty()) continue;
    if (tokens.size() != 3 && tokens.size() != 4) {
      throw FormatError("xyz line " + std::to_string(line_no) + ": expected 3 or 4 fields");
    }
    const bool has_label = tokens.size() == 4;
    if (labeled && *labeled != has_label) {
      throw FormatError("xyz line " + std::to_string(line_no) + ": inconsistent label column");
    }
    labeled = has_label;
    Vec3 p;
    try {
      for (int k = 0; k < 3; ++k) {
        std::size_t used = 0;
        p[k] = std::stod(tokens[static_cast<std::size_t>(k)], &used);
        if (used != tokens[static_cast<std::size_t>(k)].size()) throw std::invalid_argument("trailing");
      }
      if (has_label) {
        std::size_t used = 0;
        cloud.segment_labels.push_back(std::stoi(tokens[3], &used));
        if (used != tokens[3].size()) throw std::invalid_argument("trailing");
      }
    } catch (const std::exception&) {
      throw FormatError("xyz line " + std::to_string(line_no) + ": malformed number");
    }
    cloud.points.push_back(p);
  }
  return cloud;
}

void write_xyz(std::ostream& out, const PointCloud& cloud) {
  out << std::setprecision(17);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    out << p.x() << ' ' << p.y() << ' ' << p.z();
    if (cloud.has_labels()) out << ' ' << cloud.segment_labels[i];
    out << '\n';
  }
}

PointCloud read_ply(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) throw FormatError("missing ply magic");

  bool binary_le = false;
  std::size_t vertex_count = 0;
  bool in_vertex = false;
  bool vertex_seen = false;
  std::vector<PlyProperty> props;
  std::size_t stride = 0;
  for (;;) {
    if (!std::getline(in, line)) throw FormatError("truncated ply header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream hs(line);
    std::string key;
    hs >> key;
    if (key == "end_header") break;
    if (key == "format") {
      std::string fmt;
      hs >> fmt;
      binary_le = fmt == "binary_little_endian";
    } else if (key == "element") {
      std::string name;
      std::size_t count = 0;
      if (!(hs >> name >> count)) throw FormatError("ply: malformed element line");
      in_vertex = name == "vertex";
      if (in_vertex) {
        vertex_count = count;
        vertex_seen = true;
      } else if (!vertex_seen) {
        throw FormatError("ply: vertex element must come first");
      }
    } else if (key == "property" && in_vertex) {
      std::string type_name, name;
      hs >> type_name;
      if (type_name == "list") throw FormatError("ply: list properties on vertices are unsupported");
      hs >> name;
      const auto type = parse_ply_type(type_name);
      if (!type) throw FormatError("ply: unknown property type " + type_name);
      props.push_back({name, *type, stride});
      stride += ply_size(*type);
    }
  }
  if (!binary_le) throw FormatError("ply: only binary_little_endian is supported");
  if (!vertex_seen) throw FormatError("ply: no vertex element");

  auto find = [&](const std::string& name) -> const PlyProperty* {
    for (const auto& p : props)
      if (p.name == name) return &p;
    return nullptr;
  };
  const PlyProperty* px = find("x");
  const PlyProperty* py = find("y");
  const PlyProperty* pz = find("z");
  const PlyProperty* ps = find("segment");
  if (!px || !py || !pz) throw FormatError("ply: vertex element lacks x/y/z");

  PointCloud cloud;
  cloud.points.reserve(vertex_count);
  std::vector<char> record(stride);
  for (std::size_t i = 0; i < vertex_count; ++i) {
    if (!in.read(record.data(), static_cast<std::streamsize>(stride))) {
      throw FormatError("ply: truncated vertex data");
    }
    cloud.points.emplace_back(ply_value(px->type, record.data() + px->offset),
                              ply_value(py->type, record.data() + py->offset),
                              ply_value(pz->type, record.data() + pz->offset));
    if (ps) cloud.segment_labels.push_back(static_cast<int>(ply_value(ps->type, record.data() + ps->offset)));
  }
  return cloud;
}

void write_ply(std::ostream& out, const PointCloud& cloud) {
  out << "ply\nformat binary_little_endian 1.0\nelement vertex " << cloud.size()
      << "\nproperty float x\nproperty float y\nproperty float z\n";
  if (cloud.has_labels()) out << "property int segment\n";
  out << "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const std::array<float, 3> xyz{static_cast<float>(cloud.points[i].x()),
                                   static_cast<float>(cloud.points[i].y()),
                                   static_cast<float>(cloud.points[i].z())};
    out.write(reinterpret_cast<const char*>(xyz.data()), sizeof(xyz));
    if (cloud.has_labels()) {
      const std::int32_t label = cloud.segment_labels[i];
      out.write(reinterpret_cast<const char*>(&label), sizeof(label));
    }
  }
}

PointCloud read_point_cloud(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  PointCloud cloud;
  if (ext == ".xyz" || ext == ".txt") {
    cloud = read_xyz(in);
  } else if (ext == ".ply") {
    cloud = read_ply(in);
  } else {
    throw FormatError("unsupported point cloud extension '" + ext + "' (use .xyz or .ply)");
  }
  cloud.validate();
  return cloud;
}

void write_point_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  if (path.extension() == ".ply") {
    write_ply(out, cloud);
  } else {
    write_xyz(out, cloud);
  }
}

}  // namespace lpi
