#include "nol/mesh_io.hpp"

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "nol/error.hpp"
#include "nol/serialize.hpp"

namespace nol {
namespace {

enum class PlyFormat { kAscii, kBinaryLE, kBinaryBE };

struct PlyProperty {
  std::string name;
  std::string type;
  bool is_list = false;
  std::string count_type;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

int type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "float" || t == "int32" || t == "uint32" || t == "float32") return 4;
  if (t == "double" || t == "float64") return 8;
  throw InputError("ply: unknown property type '" + t + "'");
}

class BinaryReader {
 public:
  BinaryReader(const std::string& data, std::size_t pos, bool big_endian)
      : data_(data), pos_(pos), big_endian_(big_endian) {}

  double read(const std::string& t) {
    const int n = type_size(t);
    if (pos_ + n > data_.size()) throw InputError("ply: truncated binary body");
    unsigned char buf[8];
    std::memcpy(buf, data_.data() + pos_, n);
    pos_ += n;
    const bool swap = big_endian_ != (std::endian::native == std::endian::big);
    if (swap) {
      for (int i = 0; i < n / 2; ++i) std::swap(buf[i], buf[n - 1 - i]);
    }
    if (t == "char" || t == "int8") return static_cast<std::int8_t>(buf[0]);
    if (t == "uchar" || t == "uint8") return buf[0];
    if (t == "short" || t == "int16") return load<std::int16_t>(buf);
    if (t == "ushort" || t == "uint16") return load<std::uint16_t>(buf);
    if (t == "int" || t == "int32") return load<std::int32_t>(buf);
    if (t == "uint" || t == "uint32") return load<std::uint32_t>(buf);
    if (t == "float" || t == "float32") return load<float>(buf);
    return load<double>(buf);
  }

 private:
  template <typename T>
  static double load(const unsigned char* buf) {
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return static_cast<double>(v);
  }

  const std::string& data_;
  std::size_t pos_;
  bool big_endian_;
};

void add_polygon(std::vector<TriangleMesh::Face>& faces, const std::vector<int>& poly) {
  if (poly.size() < 3) throw InputError("face with fewer than 3 vertices");
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) faces.push_back({poly[0], poly[i], poly[i + 1]});
}

TriangleMesh build_mesh(std::vector<Vec3> vertices, std::vector<TriangleMesh::Face> faces) {
  if (vertices.empty() || faces.empty()) throw InputError("mesh has no vertices or faces");
  return TriangleMesh(std::move(vertices), std::move(faces));
}

}  // namespace

TriangleMesh parse_obj(const std::string& text) {
  std::vector<Vec3> vertices;
  std::vector<TriangleMesh::Face> faces;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z())) throw InputError("obj: bad vertex on line " + std::to_string(line_no));
      vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string tok;
      while (ls >> tok) {
        const std::string head = tok.substr(0, tok.find('/'));
        int idx = 0;
        try {
          idx = std::stoi(head);
        } catch (const std::exception&) {
          throw InputError("obj: bad face index on line " + std::to_string(line_no));
        }
        if (idx < 0) idx = static_cast<int>(vertices.size()) + idx + 1;
        if (idx < 1 || idx > static_cast<int>(vertices.size())) {
          throw InputError("obj: face index out of range on line " + std::to_string(line_no));
        }
        poly.push_back(idx - 1);
      }
      add_polygon(faces, poly);
    }
  }
  return build_mesh(std::move(vertices), std::move(faces));
}

TriangleMesh parse_ply(const std::string& bytes) {
  std::size_t pos = 0;
  auto next_line = [&]() {
    const std::size_t end = bytes.find('\n', pos);
    if (end == std::string::npos) throw InputError("ply: truncated header");
    std::string line = bytes.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };
  if (next_line() != "ply") throw InputError("ply: missing magic");
  PlyFormat format = PlyFormat::kAscii;
  std::vector<PlyElement> elements;
  for (;;) {
    const std::string line = next_line();
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "end_header") break;
    if (kw == "format") {
      std::string f;
      ls >> f;
      if (f == "ascii") format = PlyFormat::kAscii;
      else if (f == "binary_little_endian") format = PlyFormat::kBinaryLE;
      else if (f == "binary_big_endian") format = PlyFormat::kBinaryBE;
      else throw InputError("ply: unknown format '" + f + "'");
    } else if (kw == "element") {
      PlyElement e;
      if (!(ls >> e.name >> e.count)) throw InputError("ply: bad element line");
      elements.push_back(e);
    } else if (kw == "property") {
      if (elements.empty()) throw InputError("ply: property before element");
      PlyProperty p;
      std::string t;
      ls >> t;
      if (t == "list") {
        p.is_list = true;
        ls >> p.count_type >> p.type >> p.name;
        type_size(p.count_type);
      } else {
        p.type = t;
        ls >> p.name;
      }
      type_size(p.type);
      elements.back().properties.push_back(p);
    }
  }

  std::vector<Vec3> vertices;
  std::vector<TriangleMesh::Face> faces;
  std::istringstream ascii(format == PlyFormat::kAscii ? bytes.substr(pos) : std::string());
  BinaryReader bin(bytes, pos, format == PlyFormat::kBinaryBE);
  auto read_value = [&](const std::string& type) {
    if (format != PlyFormat::kAscii) return bin.read(type);
    double v;
    if (!(ascii >> v)) throw InputError("ply: truncated ascii body");
    return v;
  };

  for (const PlyElement& e : elements) {
    for (std::size_t i = 0; i < e.count; ++i) {
      Vec3 v = Vec3::Zero();
      std::vector<int> poly;
      for (const PlyProperty& p : e.properties) {
        if (p.is_list) {
          const double n = read_value(p.count_type);
          if (n < 0 || n > 1e6) throw InputError("ply: bad list length");
          std::vector<int> items(static_cast<std::size_t>(n));
          for (int& item : items) item = static_cast<int>(read_value(p.type));
          if (e.name == "face" && (p.name == "vertex_indices" || p.name == "vertex_index")) poly = items;
        } else {
          const double x = read_value(p.type);
          if (e.name == "vertex") {
            if (p.name == "x") v.x() = x;
            if (p.name == "y") v.y() = x;
            if (p.name == "z") v.z() = x;
          }
        }
      }
      if (e.name == "vertex") vertices.push_back(v);
      if (e.name == "face") {
        for (int idx : poly) {
          if (idx < 0) throw InputError("ply: negative face index");
        }
        add_polygon(faces, poly);
      }
    }
  }
  for (const auto& f : faces) {
    for (int idx : f) {
      if (idx >= static_cast<int>(vertices.size())) throw InputError("ply: face index out of range");
    }
  }
  return build_mesh(std::move(vertices), std::move(faces));
}

TriangleMesh load_mesh(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  std::string ext = path.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".obj") return parse_obj(bytes);
  if (ext == ".ply") return parse_ply(bytes);
  throw InputError("unsupported mesh format: " + path.string());
}

std::string to_obj(const TriangleMesh& mesh) {
  std::string out;
  char buf[128];
  for (const Vec3& v : mesh.vertices()) {
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out += buf;
  }
  for (const auto& f : mesh.faces()) {
    std::snprintf(buf, sizeof(buf), "f %d %d %d\n", f[0] + 1, f[1] + 1, f[2] + 1);
    out += buf;
  }
  return out;
}

}  // namespace nol
