#pragma once

// MetaImage (.mhd header + .raw payload) reader and writer.
//
// Supported: NDims = 3, ElementType in {MET_SHORT, MET_FLOAT, MET_DOUBLE},
// uncompressed payload in a separate file, either byte order. Values are
// converted to double on read.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "hosdf/error.hpp"
#include "hosdf/grid.hpp"

namespace hosdf {

enum class ElementType { Short, Float, Double };

inline const char* element_type_name(ElementType t) {
  switch (t) {
    case ElementType::Short: return "MET_SHORT";
    case ElementType::Float: return "MET_FLOAT";
    case ElementType::Double: return "MET_DOUBLE";
  }
  return "MET_DOUBLE";
}

inline std::size_t element_size(ElementType t) {
  switch (t) {
    case ElementType::Short: return 2;
    case ElementType::Float: return 4;
    case ElementType::Double: return 8;
  }
  return 8;
}

struct MetaImageHeader {
  GridGeometry geometry;
  ElementType element_type = ElementType::Double;
  bool msb = false;
  std::filesystem::path data_file;
  std::map<std::string, std::string> extra; // keys not interpreted here
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T, std::size_t N>
std::array<T, N> parse_triple(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  std::array<T, N> out{};
  for (auto& v : out) {
    if (!(in >> v)) throw IoError("MetaImage key " + key + " needs " + std::to_string(N) + " values: '" + value + "'");
  }
  std::string rest;
  if (in >> rest) throw IoError("MetaImage key " + key + " has extra values: '" + value + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "True" || v == "true" || v == "1") return true;
  if (v == "False" || v == "false" || v == "0") return false;
  throw IoError("MetaImage key " + key + " is not a boolean: '" + v + "'");
}

template <typename T>
T byteswap_value(T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  std::memcpy(&v, b, sizeof(T));
  return v;
}

template <typename T>
void decode(const std::vector<char>& raw, bool swap, std::vector<double>& out) {
  const std::size_t n = raw.size() / sizeof(T);
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    T v;
    std::memcpy(&v, raw.data() + i * sizeof(T), sizeof(T));
    if (swap) v = byteswap_value(v);
    out[i] = static_cast<double>(v);
  }
}

} // namespace detail

inline MetaImageHeader read_metaimage_header(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open MetaImage header " + path.string());

  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("malformed MetaImage line: '" + line + "'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (kv.count(key)) throw IoError("duplicate MetaImage key " + key);
    kv.emplace(key, value);
  }

  auto take = [&](const std::string& key) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end()) throw IoError("MetaImage header " + path.string() + " lacks required key " + key);
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto take_optional = [&](std::initializer_list<const char*> keys) -> std::optional<std::pair<std::string, std::string>> {
    std::optional<std::pair<std::string, std::string>> found;
    for (const char* k : keys) {
      auto it = kv.find(k);
      if (it == kv.end()) continue;
      if (found && found->second != it->second)
        throw IoError(std::string("contradictory MetaImage keys ") + found->first + " and " + k);
      found = std::make_pair(std::string(k), it->second);
      kv.erase(it);
    }
    return found;
  };

  MetaImageHeader h;
  const std::string object_type = take("ObjectType");
  if (object_type != "Image") throw IoError("unsupported MetaImage ObjectType " + object_type);
  const std::string ndims = take("NDims");
  if (ndims != "3") throw IoError("only NDims = 3 is supported, got " + ndims);

  const auto dims = detail::parse_triple<long long, 3>("DimSize", take("DimSize"));
  auto spacing_kv = take_optional({"ElementSpacing", "ElementSize"});
  if (!spacing_kv) throw IoError("MetaImage header " + path.string() + " lacks required key ElementSpacing");
  const auto spacing = detail::parse_triple<double, 3>(spacing_kv->first, spacing_kv->second);
  std::array<double, 3> origin{0, 0, 0};
  if (auto o = take_optional({"Offset", "Origin", "Position"})) origin = detail::parse_triple<double, 3>(o->first, o->second);

  const std::string et = take("ElementType");
  if (et == "MET_SHORT") h.element_type = ElementType::Short;
  else if (et == "MET_FLOAT") h.element_type = ElementType::Float;
  else if (et == "MET_DOUBLE") h.element_type = ElementType::Double;
  else throw IoError("unsupported MetaImage ElementType " + et);

  if (auto msb = take_optional({"BinaryDataByteOrderMSB", "ElementByteOrderMSB"})) h.msb = detail::parse_bool(msb->first, msb->second);
  if (auto c = take_optional({"CompressedData"}); c && detail::parse_bool(c->first, c->second))
    throw IoError("compressed MetaImage payloads are not supported");
  if (auto b = take_optional({"BinaryData"}); b && !detail::parse_bool(b->first, b->second))
    throw IoError("ASCII MetaImage payloads are not supported");
  if (auto n = take_optional({"ElementNumberOfChannels"}); n && n->second != "1")
    throw IoError("multi-channel MetaImage payloads are not supported");

  const std::string data_file = take("ElementDataFile");
  if (data_file == "LOCAL" || data_file.rfind("LIST", 0) == 0 || data_file.find('%') != std::string::npos)
    throw IoError("ElementDataFile must name a single raw file, got " + data_file);

  try {
    h.geometry = GridGeometry({dims[0], dims[1], dims[2]}, spacing, origin);
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("invalid MetaImage geometry: ") + e.what());
  }
  const std::filesystem::path df(data_file);
  h.data_file = df.is_absolute() ? df : path.parent_path() / df;
  h.extra = std::move(kv);
  return h;
}

inline ScalarField read_metaimage(const std::filesystem::path& path) {
  const MetaImageHeader h = read_metaimage_header(path);
  std::ifstream in(h.data_file, std::ios::binary);
  if (!in) throw IoError("cannot open MetaImage payload " + h.data_file.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::size_t expected = h.geometry.size() * element_size(h.element_type);
  if (raw.size() != expected)
    throw IoError("MetaImage payload " + h.data_file.string() + " has " + std::to_string(raw.size()) +
                  " bytes, header implies " + std::to_string(expected));

  const bool swap = h.msb != (std::endian::native == std::endian::big);
  std::vector<double> values;
  switch (h.element_type) {
    case ElementType::Short: detail::decode<std::int16_t>(raw, swap, values); break;
    case ElementType::Float: detail::decode<float>(raw, swap, values); break;
    case ElementType::Double: detail::decode<double>(raw, swap, values); break;
  }
  for (double v : values)
    if (!std::isfinite(v)) throw IoError("MetaImage payload " + h.data_file.string() + " contains non-finite values");
  return ScalarField(h.geometry, std::move(values));
}

/// Writes `<path>` (header) and a sibling `.raw` payload, little-endian.
/// `extra` lines are emitted before ElementDataFile, which must stay last.
inline void write_metaimage(const ScalarField& field, const std::filesystem::path& path,
                            ElementType type = ElementType::Double,
                            const std::map<std::string, std::string>& extra = {}) {
  std::filesystem::path raw_path = path;
  raw_path.replace_extension(".raw");
  const auto& g = field.geometry();

  {
    std::ofstream out(raw_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + raw_path.string());
    auto put = [&](auto v) {
      if constexpr (std::endian::native == std::endian::big) v = detail::byteswap_value(v);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    };
    for (double v : field) {
      switch (type) {
        case ElementType::Short: {
          const double c = std::clamp(std::round(v), double(std::numeric_limits<std::int16_t>::min()),
                                      double(std::numeric_limits<std::int16_t>::max()));
          put(static_cast<std::int16_t>(c));
          break;
        }
        case ElementType::Float: put(static_cast<float>(v)); break;
        case ElementType::Double: put(v); break;
      }
    }
    if (!out) throw IoError("failed writing " + raw_path.string());
  }

  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17);
  out << "ObjectType = Image\nNDims = 3\n";
  out << "BinaryData = True\nBinaryDataByteOrderMSB = False\nCompressedData = False\n";
  out << "Offset = " << g.origin[0] << ' ' << g.origin[1] << ' ' << g.origin[2] << '\n';
  out << "ElementSpacing = " << g.spacing[0] << ' ' << g.spacing[1] << ' ' << g.spacing[2] << '\n';
  out << "DimSize = " << g.dims[0] << ' ' << g.dims[1] << ' ' << g.dims[2] << '\n';
  out << "ElementType = " << element_type_name(type) << '\n';
  for (const auto& [k, v] : extra) out << k << " = " << v << '\n';
  out << "ElementDataFile = " << raw_path.filename().string() << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

} // namespace hosdf
