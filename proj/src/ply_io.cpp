#include "graspkit/ply_io.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "graspkit/errors.hpp"

namespace graspkit {

namespace {

struct PlyProperty {
  std::string type;
  std::string name;
};

std::size_t property_size(const std::string& type, const std::string& path) {
  if (type == "char" || type == "uchar" || type == "int8" || type == "uint8")
    return 1;
  if (type == "short" || type == "ushort" || type == "int16" ||
      type == "uint16")
    return 2;
  if (type == "int" || type == "uint" || type == "int32" || type == "uint32" ||
      type == "float" || type == "float32")
    return 4;
  if (type == "double" || type == "float64")
    return 8;
  throw MalformedFileError(path + ": unsupported property type '" + type + "'");
}

double decode_scalar(const char* bytes, const std::string& type) {
  if (type == "float" || type == "float32") {
    float v;
    std::memcpy(&v, bytes, sizeof v);
    return static_cast<double>(v);
  }
  double v;
  std::memcpy(&v, bytes, sizeof v);
  return v;
}

std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream stream(line);
  std::string token;
  while (stream >> token) tokens.push_back(token);
  return tokens;
}

PointCloud3d finalize(std::vector<Eigen::Vector3d>& raw, const std::string& path,
                      LoadDiagnostics* diagnostics) {
  std::vector<Eigen::Vector3d> kept;
  kept.reserve(raw.size());
  std::size_t dropped = 0;
  for (const auto& p : raw) {
    if (p.allFinite())
      kept.push_back(p);
    else
      ++dropped;
  }
  if (diagnostics) diagnostics->dropped_nonfinite = dropped;
  if (kept.empty())
    throw EmptyAfterFilteringError(path + ": no finite points left");
  return PointCloud3d::from_vectors(kept);
}

PointCloud3d load_ply(std::ifstream& in, const std::string& path,
                      LoadDiagnostics* diagnostics) {
  std::string line;
  int line_no = 0;
  auto next_line = [&]() -> std::string& {
    if (!std::getline(in, line))
      throw MalformedFileError(path + ": unexpected end of header at line " +
                               std::to_string(line_no + 1));
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };

  if (next_line() != "ply")
    throw MalformedFileError(path + ": line 1: missing 'ply' magic");

  bool binary = false;
  bool format_seen = false;
  long vertex_count = -1;
  std::vector<PlyProperty> vertex_properties;
  bool in_vertex_element = false;
  bool vertex_is_first_element = true;
  bool any_element_seen = false;

  while (true) {
    const auto tokens = split_tokens(next_line());
    if (tokens.empty()) continue;
    if (tokens[0] == "comment" || tokens[0] == "obj_info") continue;
    if (tokens[0] == "format") {
      if (tokens.size() < 2)
        throw MalformedFileError(path + ": line " + std::to_string(line_no) +
                                 ": malformed format line");
      if (tokens[1] == "ascii")
        binary = false;
      else if (tokens[1] == "binary_little_endian")
        binary = true;
      else
        throw MalformedFileError(path + ": line " + std::to_string(line_no) +
                                 ": unsupported format '" + tokens[1] + "'");
      format_seen = true;
    } else if (tokens[0] == "element") {
      if (tokens.size() < 3)
        throw MalformedFileError(path + ": line " + std::to_string(line_no) +
                                 ": malformed element line");
      if (tokens[1] == "vertex") {
        if (any_element_seen) vertex_is_first_element = false;
        vertex_count = std::strtol(tokens[2].c_str(), nullptr, 10);
        in_vertex_element = true;
      } else {
        in_vertex_element = false;
      }
      any_element_seen = true;
    } else if (tokens[0] == "property") {
      if (!in_vertex_element) continue;
      if (tokens.size() >= 2 && tokens[1] == "list")
        throw MalformedFileError(path + ": line " + std::to_string(line_no) +
                                 ": list properties on vertices unsupported");
      if (tokens.size() < 3)
        throw MalformedFileError(path + ": line " + std::to_string(line_no) +
                                 ": malformed property line");
      vertex_properties.push_back({tokens[1], tokens[2]});
    } else if (tokens[0] == "end_header") {
      break;
    } else {
      throw MalformedFileError(path + ": line " + std::to_string(line_no) +
                               ": unrecognized header keyword '" + tokens[0] +
                               "'");
    }
  }

  if (!format_seen)
    throw MalformedFileError(path + ": header has no format line");
  if (vertex_count < 0)
    throw MalformedFileError(path + ": header has no vertex element");
  if (!vertex_is_first_element)
    throw MalformedFileError(
        path + ": vertex element must come first (unsupported layout)");

  int x_idx = -1, y_idx = -1, z_idx = -1;
  for (std::size_t i = 0; i < vertex_properties.size(); ++i) {
    if (vertex_properties[i].name == "x") x_idx = static_cast<int>(i);
    if (vertex_properties[i].name == "y") y_idx = static_cast<int>(i);
    if (vertex_properties[i].name == "z") z_idx = static_cast<int>(i);
  }
  if (x_idx < 0 || y_idx < 0 || z_idx < 0)
    throw MalformedFileError(path + ": vertex element lacks x/y/z properties");

  std::vector<Eigen::Vector3d> raw;
  raw.reserve(static_cast<std::size_t>(vertex_count));

  if (binary) {
    std::size_t stride = 0;
    std::vector<std::size_t> offsets(vertex_properties.size());
    for (std::size_t i = 0; i < vertex_properties.size(); ++i) {
      offsets[i] = stride;
      stride += property_size(vertex_properties[i].type, path);
    }
    std::vector<char> row(stride);
    for (long v = 0; v < vertex_count; ++v) {
      in.read(row.data(), static_cast<std::streamsize>(stride));
      if (!in)
        throw MalformedFileError(
            path + ": truncated binary vertex data at vertex " +
            std::to_string(v) + " (offset " +
            std::to_string(static_cast<long long>(in.gcount())) + ")");
      raw.emplace_back(
          decode_scalar(row.data() + offsets[static_cast<std::size_t>(x_idx)],
                        vertex_properties[static_cast<std::size_t>(x_idx)].type),
          decode_scalar(row.data() + offsets[static_cast<std::size_t>(y_idx)],
                        vertex_properties[static_cast<std::size_t>(y_idx)].type),
          decode_scalar(row.data() + offsets[static_cast<std::size_t>(z_idx)],
                        vertex_properties[static_cast<std::size_t>(z_idx)].type));
    }
  } else {
    for (long v = 0; v < vertex_count; ++v) {
      const auto tokens = split_tokens(next_line());
      if (tokens.size() < vertex_properties.size())
        throw MalformedFileError(path + ": line " + std::to_string(line_no) +
                                 ": expected " +
                                 std::to_string(vertex_properties.size()) +
                                 " values, got " +
                                 std::to_string(tokens.size()));
      auto parse = [&](int idx) {
        const std::string& s = tokens[static_cast<std::size_t>(idx)];
        try {
          return std::stod(s);
        } catch (const std::exception&) {
          throw MalformedFileError(path + ": line " + std::to_string(line_no) +
                                   ": bad number '" + s + "'");
        }
      };
      raw.emplace_back(parse(x_idx), parse(y_idx), parse(z_idx));
    }
  }
  return finalize(raw, path, diagnostics);
}

PointCloud3d load_xyz_text(std::ifstream& in, const std::string& path,
                           LoadDiagnostics* diagnostics) {
  std::vector<Eigen::Vector3d> raw;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto tokens = split_tokens(line);
    if (tokens.size() != 3)
      throw MalformedFileError(path + ": line " + std::to_string(line_no) +
                               ": expected 3 columns, got " +
                               std::to_string(tokens.size()));
    Eigen::Vector3d p;
    for (int k = 0; k < 3; ++k) {
      try {
        p[k] = std::stod(tokens[static_cast<std::size_t>(k)]);
      } catch (const std::exception&) {
        throw MalformedFileError(path + ": line " + std::to_string(line_no) +
                                 ": bad number '" +
                                 tokens[static_cast<std::size_t>(k)] + "'");
      }
    }
    raw.push_back(p);
  }
  return finalize(raw, path, diagnostics);
}

}  // namespace

PointCloud3d load_point_cloud(const std::string& path,
                              LoadDiagnostics* diagnostics) {
  if (!std::filesystem::exists(path))
    throw FileNotFoundError("point cloud file not found: " + path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFoundError("cannot open: " + path);

  std::array<char, 3> magic{};
  in.read(magic.data(), 3);
  in.seekg(0);
  if (in.gcount() == 3 && magic[0] == 'p' && magic[1] == 'l' && magic[2] == 'y')
    return load_ply(in, path, diagnostics);
  in.clear();
  in.seekg(0);
  return load_xyz_text(in, path, diagnostics);
}

void save_point_cloud_ply(const std::string& path, const PointCloud3d& cloud,
                          bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileNotFoundError("cannot open for writing: " + path);
  out << "ply\n"
      << (binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n")
      << "element vertex " << cloud.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "end_header\n";
  if (binary) {
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
      const Eigen::Vector3f p = cloud.point(i).cast<float>();
      out.write(reinterpret_cast<const char*>(p.data()), 3 * sizeof(float));
    }
  } else {
    char buffer[96];
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
      const Eigen::Vector3f p = cloud.point(i).cast<float>();
      std::snprintf(buffer, sizeof buffer, "%.9g %.9g %.9g\n",
                    static_cast<double>(p.x()), static_cast<double>(p.y()),
                    static_cast<double>(p.z()));
      out << buffer;
    }
  }
}

void save_colored_ply(const std::string& path,
                      const std::vector<ColoredPoint>& points) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileNotFoundError("cannot open for writing: " + path);
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << points.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "end_header\n";
  for (const auto& cp : points) {
    const Eigen::Vector3f p = cp.position.cast<float>();
    out.write(reinterpret_cast<const char*>(p.data()), 3 * sizeof(float));
    const std::uint8_t rgb[3] = {cp.r, cp.g, cp.b};
    out.write(reinterpret_cast<const char*>(rgb), 3);
  }
}

}  // namespace graspkit
