#pragma once

// Per-vertex channels and PLY input/output for TriMesh.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "hosdf/bspline.hpp"
#include "hosdf/error.hpp"
#include "hosdf/marching_cubes.hpp"

namespace hosdf {

/// Adds channel `name` by evaluating `interp` at every vertex. Returns the
/// number of vertices that had to be mirrored back into the grid.
inline std::size_t sample_vertex_channel(TriMesh& mesh, const SplineInterpolant& interp, const std::string& name) {
  std::vector<double> values(mesh.vertices.size());
  std::size_t outside = 0;
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (!interp.inside(mesh.vertices[v])) ++outside;
    values[v] = interp.eval(mesh.vertices[v]);
  }
  for (auto& [n, ch] : mesh.channels)
    if (n == name) {
      ch = std::move(values);
      return outside;
    }
  mesh.channels.emplace_back(name, std::move(values));
  return outside;
}

enum class PlyFormat { Ascii, BinaryLittleEndian };

inline void write_ply(const TriMesh& mesh, const std::filesystem::path& path, PlyFormat format = PlyFormat::BinaryLittleEndian,
                      const std::vector<std::string>& comments = {}) {
  for (const auto& [name, ch] : mesh.channels)
    if (ch.size() != mesh.vertices.size()) throw std::invalid_argument("channel " + name + " does not match vertex count");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "ply\nformat " << (format == PlyFormat::Ascii ? "ascii" : "binary_little_endian") << " 1.0\n";
  for (const auto& c : comments) out << "comment " << c << '\n';
  out << "element vertex " << mesh.vertices.size() << '\n';
  out << "property double x\nproperty double y\nproperty double z\n";
  for (const auto& [name, ch] : mesh.channels) out << "property double " << name << '\n';
  out << "element face " << mesh.triangles.size() << '\n';
  out << "property list uchar int vertex_indices\nend_header\n";

  if (format == PlyFormat::Ascii) {
    out << std::setprecision(17);
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
      const Vec3& p = mesh.vertices[v];
      out << p.x << ' ' << p.y << ' ' << p.z;
      for (const auto& [name, ch] : mesh.channels) out << ' ' << ch[v];
      out << '\n';
    }
    for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  } else {
    static_assert(std::endian::native == std::endian::little, "binary PLY writer assumes a little-endian host");
    auto put = [&](auto v) { out.write(reinterpret_cast<const char*>(&v), sizeof(v)); };
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
      put(mesh.vertices[v].x);
      put(mesh.vertices[v].y);
      put(mesh.vertices[v].z);
      for (const auto& [name, ch] : mesh.channels) put(ch[v]);
    }
    for (const auto& t : mesh.triangles) {
      put(std::uint8_t{3});
      for (auto i : t) put(static_cast<std::int32_t>(i));
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

/// Reads the PLY files produced by write_ply (double vertex properties,
/// triangle faces), ASCII or binary little-endian.
inline TriMesh read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "ply") throw IoError(path.string() + " is not a PLY file");
  bool ascii = false;
  std::size_t nv = 0, nf = 0;
  std::vector<std::string> props;
  std::string element;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string f;
      ls >> f;
      if (f == "ascii") ascii = true;
      else if (f != "binary_little_endian") throw IoError("unsupported PLY format " + f);
    } else if (word == "element") {
      ls >> element;
      if (element == "vertex") ls >> nv;
      else if (element == "face") ls >> nf;
      else throw IoError("unsupported PLY element " + element);
    } else if (word == "property") {
      std::string type, name;
      ls >> type;
      if (element == "vertex") {
        if (type != "double") throw IoError("PLY reader expects double vertex properties");
        ls >> name;
        props.push_back(name);
      }
    } else if (word == "end_header") {
      break;
    }
  }
  if (props.size() < 3 || props[0] != "x" || props[1] != "y" || props[2] != "z") throw IoError("PLY vertices need x y z first");

  TriMesh mesh;
  mesh.vertices.resize(nv);
  for (std::size_t c = 3; c < props.size(); ++c) mesh.channels.emplace_back(props[c], std::vector<double>(nv));
  std::vector<double> row(props.size());
  for (std::size_t v = 0; v < nv; ++v) {
    for (auto& x : row) {
      if (ascii) in >> x;
      else in.read(reinterpret_cast<char*>(&x), sizeof(x));
    }
    if (!in) throw IoError("truncated PLY vertex data in " + path.string());
    mesh.vertices[v] = {row[0], row[1], row[2]};
    for (std::size_t c = 3; c < props.size(); ++c) mesh.channels[c - 3].second[v] = row[c];
  }
  mesh.triangles.resize(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    if (ascii) {
      int count = 0;
      in >> count;
      if (count != 3) throw IoError("PLY reader supports triangles only");
      for (auto& i : mesh.triangles[f]) in >> i;
    } else {
      std::uint8_t count = 0;
      in.read(reinterpret_cast<char*>(&count), 1);
      if (count != 3) throw IoError("PLY reader supports triangles only");
      for (auto& i : mesh.triangles[f]) {
        std::int32_t v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof(v));
        i = static_cast<std::uint32_t>(v);
      }
    }
    if (!in) throw IoError("truncated PLY face data in " + path.string());
  }
  for (const auto& t : mesh.triangles)
    for (auto i : t)
      if (i >= nv) throw IoError("PLY face index out of range in " + path.string());
  return mesh;
}

} // namespace hosdf
