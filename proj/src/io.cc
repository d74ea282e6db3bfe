#include "uavgeo/io.h"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "uavgeo/error.h"

namespace uavgeo {

static_assert(std::endian::native == std::endian::little,
              "binary readers assume a little-endian host");

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr double kQuaternionNormTol = 1e-6;

std::vector<std::string> SplitWhitespace(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

template <typename T>
bool ParseNumber(const std::string& s, T* out) {
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, *out);
  return ec == std::errc() && ptr == end;
}

// ---------------------------------------------------------------------------
// PLY

enum class PlyType { kInt8, kUint8, kInt16, kUint16, kInt32, kUint32, kFloat32,
                     kFloat64 };

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::kFloat32;
  bool is_list = false;
  PlyType count_type = PlyType::kUint8;
};

struct PlyElement {
  std::string name;
  size_t count = 0;
  std::vector<PlyProperty> properties;
};

struct PlyFile {
  std::vector<PlyElement> elements;
  std::string data;
  size_t offset = 0;  // start of the binary payload
};

size_t PlyTypeSize(PlyType t) {
  switch (t) {
    case PlyType::kInt8:
    case PlyType::kUint8:
      return 1;
    case PlyType::kInt16:
    case PlyType::kUint16:
      return 2;
    case PlyType::kInt32:
    case PlyType::kUint32:
    case PlyType::kFloat32:
      return 4;
    case PlyType::kFloat64:
      return 8;
  }
  return 0;
}

PlyType ParsePlyType(const std::string& s, const std::string& source) {
  if (s == "char" || s == "int8") return PlyType::kInt8;
  if (s == "uchar" || s == "uint8") return PlyType::kUint8;
  if (s == "short" || s == "int16") return PlyType::kInt16;
  if (s == "ushort" || s == "uint16") return PlyType::kUint16;
  if (s == "int" || s == "int32") return PlyType::kInt32;
  if (s == "uint" || s == "uint32") return PlyType::kUint32;
  if (s == "float" || s == "float32") return PlyType::kFloat32;
  if (s == "double" || s == "float64") return PlyType::kFloat64;
  throw FormatError(source + ": unknown PLY property type '" + s + "'");
}

template <typename T>
T LoadRaw(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

double LoadPly(PlyType t, const char* p) {
  switch (t) {
    case PlyType::kInt8:
      return LoadRaw<int8_t>(p);
    case PlyType::kUint8:
      return LoadRaw<uint8_t>(p);
    case PlyType::kInt16:
      return LoadRaw<int16_t>(p);
    case PlyType::kUint16:
      return LoadRaw<uint16_t>(p);
    case PlyType::kInt32:
      return LoadRaw<int32_t>(p);
    case PlyType::kUint32:
      return LoadRaw<uint32_t>(p);
    case PlyType::kFloat32:
      return LoadRaw<float>(p);
    case PlyType::kFloat64:
      return LoadRaw<double>(p);
  }
  return 0.0;
}

PlyFile ParsePlyHeader(std::string data, const std::string& source) {
  PlyFile ply;
  size_t pos = 0;
  const auto next_line = [&](std::string* line) {
    const size_t nl = data.find('\n', pos);
    if (nl == std::string::npos) {
      throw FormatError(source + ": PLY header is not terminated");
    }
    *line = data.substr(pos, nl - pos);
    if (!line->empty() && line->back() == '\r') line->pop_back();
    pos = nl + 1;
  };

  std::string line;
  next_line(&line);
  if (line != "ply") throw FormatError(source + ": missing PLY magic");
  bool have_format = false;
  while (true) {
    next_line(&line);
    const std::vector<std::string> tok = SplitWhitespace(line);
    if (tok.empty()) continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "format") {
      if (tok.size() < 2) throw FormatError(source + ": bad PLY format line");
      if (tok[1] != "binary_little_endian") {
        throw UnsupportedFormatError(source + ": PLY format '" + tok[1] +
                                     "' is not supported");
      }
      have_format = true;
    } else if (tok[0] == "element") {
      PlyElement el;
      if (tok.size() != 3 || !ParseNumber(tok[2], &el.count)) {
        throw FormatError(source + ": bad PLY element line '" + line + "'");
      }
      el.name = tok[1];
      ply.elements.push_back(std::move(el));
    } else if (tok[0] == "property") {
      if (ply.elements.empty()) {
        throw FormatError(source + ": PLY property before any element");
      }
      PlyProperty prop;
      if (tok.size() == 5 && tok[1] == "list") {
        prop.is_list = true;
        prop.count_type = ParsePlyType(tok[2], source);
        prop.type = ParsePlyType(tok[3], source);
        prop.name = tok[4];
      } else if (tok.size() == 3) {
        prop.type = ParsePlyType(tok[1], source);
        prop.name = tok[2];
      } else {
        throw FormatError(source + ": bad PLY property line '" + line + "'");
      }
      ply.elements.back().properties.push_back(std::move(prop));
    } else {
      throw FormatError(source + ": unexpected PLY header line '" + line + "'");
    }
  }
  if (!have_format) throw FormatError(source + ": PLY format line missing");
  ply.data = std::move(data);
  ply.offset = pos;
  return ply;
}

// Walks the payload element by element. The visitor receives each row's start
// pointer; rows containing lists are sized on the fly.
template <typename Visitor>
void WalkPly(const PlyFile& ply, const std::string& source, Visitor&& visit) {
  size_t pos = ply.offset;
  const size_t size = ply.data.size();
  const auto need = [&](size_t n) {
    if (pos + n > size) {
      throw TruncatedFileError(source + ": PLY payload shorter than header");
    }
  };
  for (size_t e = 0; e < ply.elements.size(); ++e) {
    const PlyElement& el = ply.elements[e];
    for (size_t row = 0; row < el.count; ++row) {
      const size_t row_start = pos;
      for (const PlyProperty& p : el.properties) {
        if (p.is_list) {
          need(PlyTypeSize(p.count_type));
          const double n = LoadPly(p.count_type, ply.data.data() + pos);
          if (!(n >= 0.0)) throw FormatError(source + ": negative list size");
          pos += PlyTypeSize(p.count_type);
          const size_t bytes = static_cast<size_t>(n) * PlyTypeSize(p.type);
          need(bytes);
          pos += bytes;
        } else {
          need(PlyTypeSize(p.type));
          pos += PlyTypeSize(p.type);
        }
      }
      visit(e, row, ply.data.data() + row_start);
    }
  }
}

int FindProperty(const PlyElement& el, const std::string& name) {
  for (size_t i = 0; i < el.properties.size(); ++i) {
    if (el.properties[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

// Byte offset of property `index` within a row without lists before it.
size_t FixedOffset(const PlyElement& el, int index) {
  size_t off = 0;
  for (int i = 0; i < index; ++i) off += PlyTypeSize(el.properties[i].type);
  return off;
}

struct VertexLayout {
  size_t element = 0;
  size_t offsets[3] = {0, 0, 0};
  PlyType types[3] = {PlyType::kFloat32, PlyType::kFloat32, PlyType::kFloat32};
};

VertexLayout FindVertexLayout(const PlyFile& ply, const std::string& source) {
  for (size_t e = 0; e < ply.elements.size(); ++e) {
    const PlyElement& el = ply.elements[e];
    if (el.name != "vertex") continue;
    VertexLayout layout;
    layout.element = e;
    const char* names[3] = {"x", "y", "z"};
    for (int k = 0; k < 3; ++k) {
      const int idx = FindProperty(el, names[k]);
      if (idx < 0) {
        throw UnsupportedFormatError(source + ": PLY vertex has no '" +
                                     names[k] + "' property");
      }
      const PlyProperty& p = el.properties[idx];
      if (p.is_list ||
          (p.type != PlyType::kFloat32 && p.type != PlyType::kFloat64)) {
        throw UnsupportedFormatError(source +
                                     ": PLY coordinates must be float32 or "
                                     "float64");
      }
      for (int i = 0; i < idx; ++i) {
        if (el.properties[i].is_list) {
          throw UnsupportedFormatError(source +
                                       ": list property precedes a vertex "
                                       "coordinate");
        }
      }
      layout.offsets[k] = FixedOffset(el, idx);
      layout.types[k] = p.type;
    }
    return layout;
  }
  throw UnsupportedFormatError(source + ": PLY has no vertex element");
}

void AppendRaw(std::string* out, const void* p, size_t n) {
  out->append(static_cast<const char*>(p), n);
}

std::string PlyHeader(size_t num_vertices, std::optional<size_t> num_faces) {
  std::string h =
      "ply\nformat binary_little_endian 1.0\nelement vertex " +
      std::to_string(num_vertices) +
      "\nproperty double x\nproperty double y\nproperty double z\n";
  if (num_faces) {
    h += "element face " + std::to_string(*num_faces) +
         "\nproperty list uchar int vertex_indices\n";
  }
  h += "end_header\n";
  return h;
}

// ---------------------------------------------------------------------------
// Netpbm-style header tokens (PFM / PGM).

struct HeaderReader {
  const std::string& data;
  size_t pos = 0;

  // Next whitespace-delimited token, skipping '#' comments when allowed.
  std::string Token(bool allow_comments) {
    while (pos < data.size()) {
      const char c = data[pos];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else if (allow_comments && c == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    const size_t start = pos;
    while (pos < data.size() &&
           !std::isspace(static_cast<unsigned char>(data[pos]))) {
      ++pos;
    }
    return data.substr(start, pos - start);
  }

  // Consumes the single whitespace byte separating header and payload.
  bool EndHeader() {
    if (pos >= data.size() ||
        !std::isspace(static_cast<unsigned char>(data[pos]))) {
      return false;
    }
    ++pos;
    return true;
  }
};

void ParseImageSize(HeaderReader* reader, bool allow_comments,
                    const std::string& source, int* width, int* height) {
  const std::string ws = reader->Token(allow_comments);
  const std::string hs = reader->Token(allow_comments);
  if (!ParseNumber(ws, width) || !ParseNumber(hs, height) || *width < 1 ||
      *height < 1) {
    throw FormatError(source + ": bad image size in header");
  }
}

// ---------------------------------------------------------------------------
// JSON helpers

template <typename T>
T Required(const json& j, const char* key, const std::string& source) {
  if (!j.contains(key)) {
    throw ParseError(source + ": missing required field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(source + ": field '" + key + "': " + e.what());
  }
}

template <typename T>
std::optional<T> Optional(const json& j, const char* key,
                          const std::string& source) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(source + ": field '" + key + "': " + e.what());
  }
}

json ParseJsonFile(const fs::path& path) {
  const std::string text = ReadFileBytes(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void RequireFile(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) {
    throw IoError("missing " + what + ": " + p.string());
  }
}

}  // namespace

// ---------------------------------------------------------------------------

std::string ReadFileBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return ss.str();
}

void WriteFileBytes(const fs::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.close();
  if (!out) throw IoError("write failed: " + path.string());
}

std::string FormatDouble(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value,
                                       std::chars_format::general, 17);
  if (ec != std::errc()) throw Error("cannot format number");
  return std::string(buf, ptr);
}

CameraRecord CameraRecord::FromPose(std::string image_id,
                                    const CameraModel& camera,
                                    const ViewPose& pose) {
  CameraRecord r;
  r.image_id = std::move(image_id);
  r.camera = camera;
  r.orientation = Eigen::Quaterniond(pose.Rotation());
  r.orientation.normalize();
  if (r.orientation.w() < 0.0) r.orientation.coeffs() *= -1.0;
  r.center = pose.Center();
  return r;
}

ViewPose CameraRecord::Pose() const {
  return ViewPose(orientation.normalized().toRotationMatrix(), center);
}

std::vector<CameraRecord> ParseCameras(const std::string& text,
                                       const std::string& source) {
  std::vector<CameraRecord> records;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> tok = SplitWhitespace(line);
    if (tok.empty() || tok[0][0] == '#') continue;
    const std::string where = source + ":" + std::to_string(line_no);
    if (tok.size() != 14) {
      throw ParseError(where + ": expected 14 fields, got " +
                       std::to_string(tok.size()));
    }
    int w = 0;
    int h = 0;
    double v[11];
    if (!ParseNumber(tok[1], &w) || !ParseNumber(tok[2], &h)) {
      throw ParseError(where + ": image size must be integers");
    }
    for (int i = 0; i < 11; ++i) {
      if (!ParseNumber(tok[3 + i], &v[i]) || !std::isfinite(v[i])) {
        throw ParseError(where + ": field " + std::to_string(4 + i) +
                         " is not a finite number");
      }
    }
    CameraRecord r;
    r.image_id = tok[0];
    try {
      r.camera = CameraModel(w, h, v[0], v[1], v[2], v[3]);
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    r.orientation = Eigen::Quaterniond(v[4], v[5], v[6], v[7]);
    if (std::abs(r.orientation.norm() - 1.0) > kQuaternionNormTol) {
      throw ValidationError(where + ": quaternion is not normalized");
    }
    r.center = Eigen::Vector3d(v[8], v[9], v[10]);
    records.push_back(std::move(r));
  }
  return records;
}

std::string SerializeCameras(const std::vector<CameraRecord>& records) {
  std::string out = "# image_id width height fx fy cx cy qw qx qy qz tx ty tz\n";
  for (const CameraRecord& r : records) {
    if (r.image_id.empty() ||
        r.image_id.find_first_of(" \t\r\n") != std::string::npos ||
        r.image_id[0] == '#') {
      throw ValidationError("camera image id '" + r.image_id +
                            "' is empty or contains whitespace");
    }
    const CameraModel& c = r.camera;
    out += r.image_id;
    out += ' ' + std::to_string(c.Width()) + ' ' + std::to_string(c.Height());
    for (double x : {c.Fx(), c.Fy(), c.Cx(), c.Cy(), r.orientation.w(),
                     r.orientation.x(), r.orientation.y(), r.orientation.z(),
                     r.center.x(), r.center.y(), r.center.z()}) {
      out += ' ';
      out += FormatDouble(x);
    }
    out += '\n';
  }
  return out;
}

std::vector<CameraRecord> ReadCameras(const fs::path& path) {
  return ParseCameras(ReadFileBytes(path), path.string());
}

void WriteCameras(const fs::path& path,
                  const std::vector<CameraRecord>& records) {
  WriteFileBytes(path, SerializeCameras(records));
}

PointCloud ReadPointCloud(const fs::path& path) {
  const std::string source = path.string();
  const PlyFile ply = ParsePlyHeader(ReadFileBytes(path), source);
  const VertexLayout layout = FindVertexLayout(ply, source);
  PointCloud cloud;
  cloud.reserve(ply.elements[layout.element].count);
  WalkPly(ply, source, [&](size_t e, size_t, const char* row) {
    if (e != layout.element) return;
    cloud.emplace_back(LoadPly(layout.types[0], row + layout.offsets[0]),
                       LoadPly(layout.types[1], row + layout.offsets[1]),
                       LoadPly(layout.types[2], row + layout.offsets[2]));
  });
  return cloud;
}

void WritePointCloud(const fs::path& path, const PointCloud& cloud) {
  std::string out = PlyHeader(cloud.size(), std::nullopt);
  out.reserve(out.size() + cloud.size() * 24);
  for (const auto& p : cloud) AppendRaw(&out, p.data(), 3 * sizeof(double));
  WriteFileBytes(path, out);
}

TriangleMesh ReadMesh(const fs::path& path) {
  const std::string source = path.string();
  const PlyFile ply = ParsePlyHeader(ReadFileBytes(path), source);
  const VertexLayout layout = FindVertexLayout(ply, source);
  std::optional<size_t> face_element;
  int face_prop = -1;
  for (size_t e = 0; e < ply.elements.size(); ++e) {
    if (ply.elements[e].name != "face") continue;
    face_element = e;
    face_prop = FindProperty(ply.elements[e], "vertex_indices");
    if (face_prop < 0) face_prop = FindProperty(ply.elements[e], "vertex_index");
  }
  if (!face_element || face_prop < 0 ||
      !ply.elements[*face_element].properties[face_prop].is_list) {
    throw UnsupportedFormatError(source + ": PLY mesh needs a face element "
                                          "with a vertex_indices list");
  }
  const PlyElement& faces = ply.elements[*face_element];

  TriangleMesh mesh;
  WalkPly(ply, source, [&](size_t e, size_t, const char* row) {
    if (e == layout.element) {
      mesh.vertices.emplace_back(
          LoadPly(layout.types[0], row + layout.offsets[0]),
          LoadPly(layout.types[1], row + layout.offsets[1]),
          LoadPly(layout.types[2], row + layout.offsets[2]));
      return;
    }
    if (e != *face_element) return;
    const char* p = row;
    for (int i = 0; i < face_prop; ++i) {
      const PlyProperty& prop = faces.properties[i];
      if (prop.is_list) {
        const auto n = static_cast<size_t>(LoadPly(prop.count_type, p));
        p += PlyTypeSize(prop.count_type) + n * PlyTypeSize(prop.type);
      } else {
        p += PlyTypeSize(prop.type);
      }
    }
    const PlyProperty& prop = faces.properties[face_prop];
    const auto n = static_cast<size_t>(LoadPly(prop.count_type, p));
    p += PlyTypeSize(prop.count_type);
    std::vector<uint32_t> idx(n);
    for (size_t k = 0; k < n; ++k) {
      const double v = LoadPly(prop.type, p + k * PlyTypeSize(prop.type));
      if (v < 0.0) throw FormatError(source + ": negative face index");
      idx[k] = static_cast<uint32_t>(v);
    }
    for (size_t k = 1; k + 1 < n; ++k) {
      mesh.triangles.push_back({idx[0], idx[k], idx[k + 1]});
    }
  });
  mesh.Validate();
  if (const size_t bad = mesh.CountDegenerate()) {
    std::clog << "warning: " << source << ": " << bad
              << " degenerate triangles will be skipped when rendering\n";
  }
  return mesh;
}

void WriteMesh(const fs::path& path, const TriangleMesh& mesh) {
  mesh.Validate();
  std::string out = PlyHeader(mesh.vertices.size(), mesh.triangles.size());
  for (const auto& p : mesh.vertices) {
    AppendRaw(&out, p.data(), 3 * sizeof(double));
  }
  for (const auto& t : mesh.triangles) {
    const uint8_t n = 3;
    AppendRaw(&out, &n, 1);
    for (uint32_t i : t) {
      const auto v = static_cast<int32_t>(i);
      AppendRaw(&out, &v, sizeof(v));
    }
  }
  WriteFileBytes(path, out);
}

DepthMap ReadDepth(const fs::path& path) {
  const std::string source = path.string();
  const std::string data = ReadFileBytes(path);
  HeaderReader reader{data};
  const std::string magic = reader.Token(false);
  if (magic == "PF") {
    throw UnsupportedFormatError(source + ": color PFM is not supported");
  }
  if (magic != "Pf") throw FormatError(source + ": bad PFM magic");
  int w = 0;
  int h = 0;
  ParseImageSize(&reader, false, source, &w, &h);
  double scale = 0.0;
  if (!ParseNumber(reader.Token(false), &scale) || scale == 0.0 ||
      !std::isfinite(scale)) {
    throw FormatError(source + ": bad PFM scale");
  }
  if (scale > 0.0) {
    throw UnsupportedFormatError(source + ": big-endian PFM is not supported");
  }
  if (!reader.EndHeader()) throw FormatError(source + ": bad PFM header end");
  const size_t n = static_cast<size_t>(w) * h;
  if (data.size() - reader.pos < n * sizeof(float)) {
    throw TruncatedFileError(source + ": PFM payload shorter than header");
  }
  DepthMap depth(w, h);
  depth.camera_id = path.stem().string();
  const char* base = data.data() + reader.pos;
  for (int v = 0; v < h; ++v) {
    // PFM rows run bottom-up.
    const char* row = base + static_cast<size_t>(h - 1 - v) * w * sizeof(float);
    for (int u = 0; u < w; ++u) {
      const float f = LoadRaw<float>(row + u * sizeof(float));
      depth.At(u, v) = std::isfinite(f) && f > 0.0f ? f : 0.0;
    }
  }
  return depth;
}

void WriteDepth(const fs::path& path, const DepthMap& depth) {
  depth.Validate();
  std::string out = "Pf\n" + std::to_string(depth.width) + " " +
                    std::to_string(depth.height) + "\n-1.0\n";
  out.reserve(out.size() + depth.Size() * sizeof(float));
  for (int v = depth.height - 1; v >= 0; --v) {
    for (int u = 0; u < depth.width; ++u) {
      const auto f = static_cast<float>(depth.At(u, v));
      AppendRaw(&out, &f, sizeof(f));
    }
  }
  WriteFileBytes(path, out);
}

Mask ReadMask(const fs::path& path) {
  const std::string source = path.string();
  const std::string data = ReadFileBytes(path);
  HeaderReader reader{data};
  if (reader.Token(false) != "P5") {
    throw FormatError(source + ": not a binary PGM (P5)");
  }
  int w = 0;
  int h = 0;
  ParseImageSize(&reader, true, source, &w, &h);
  int maxval = 0;
  if (!ParseNumber(reader.Token(true), &maxval) || maxval < 1) {
    throw FormatError(source + ": bad PGM maxval");
  }
  if (maxval > 255) {
    throw UnsupportedFormatError(source + ": 16-bit PGM is not supported");
  }
  if (!reader.EndHeader()) throw FormatError(source + ": bad PGM header end");
  const size_t n = static_cast<size_t>(w) * h;
  if (data.size() - reader.pos < n) {
    throw TruncatedFileError(source + ": PGM payload shorter than header");
  }
  Mask mask(w, h);
  for (size_t i = 0; i < n; ++i) {
    mask.values[i] = data[reader.pos + i] != 0 ? 255 : 0;
  }
  return mask;
}

void WriteMask(const fs::path& path, const Mask& mask) {
  if (mask.Size() != static_cast<size_t>(mask.width) * mask.height ||
      mask.width < 1 || mask.height < 1) {
    throw ValidationError("mask size does not match its dimensions");
  }
  std::string out = "P5\n" + std::to_string(mask.width) + " " +
                    std::to_string(mask.height) + "\n255\n";
  out.reserve(out.size() + mask.Size());
  for (uint8_t m : mask.values) out.push_back(m ? '\xff' : '\0');
  WriteFileBytes(path, out);
}

fs::path SceneManifest::Resolve(const std::string& ref) const {
  const fs::path p(ref);
  return p.is_absolute() ? p : base_dir / p;
}

fs::path PredictionManifest::Resolve(const std::string& ref) const {
  const fs::path p(ref);
  return p.is_absolute() ? p : base_dir / p;
}

SceneManifest ReadManifest(const fs::path& path) {
  const std::string source = path.string();
  const json j = ParseJsonFile(path);
  if (!j.is_object()) throw ParseError(source + ": manifest must be an object");
  SceneManifest m;
  m.base_dir = path.parent_path();
  m.schema_version = Required<int>(j, "schema_version", source);
  if (m.schema_version != kManifestSchemaVersion) {
    throw ValidationError(source + ": unsupported schema_version " +
                          std::to_string(m.schema_version));
  }
  m.scene_id = Required<std::string>(j, "scene_id", source);
  m.dataset = Optional<std::string>(j, "dataset", source).value_or(m.scene_id);
  m.gt_cloud = Optional<std::string>(j, "gt_cloud", source);
  if (j.contains("metadata")) {
    const json& md = j.at("metadata");
    m.metadata.voxel_size =
        Optional<double>(md, "voxel_size", source).value_or(0.25);
    m.metadata.gsd = Optional<double>(md, "gsd", source);
    m.metadata.altitude = Optional<double>(md, "altitude", source);
    m.metadata.hfov = Optional<double>(md, "hfov", source);
  }
  if (!(m.metadata.voxel_size > 0.0)) {
    throw ValidationError(source + ": voxel_size must be positive");
  }
  if (!j.contains("views") || !j.at("views").is_array()) {
    throw ParseError(source + ": missing 'views' array");
  }
  std::set<std::string> ids;
  for (const json& jv : j.at("views")) {
    ManifestView v;
    v.image_id = Required<std::string>(jv, "image_id", source);
    v.camera_file = Required<std::string>(jv, "camera", source);
    v.depth_file = Required<std::string>(jv, "depth", source);
    v.mask_file = Required<std::string>(jv, "mask", source);
    v.split = Optional<std::string>(jv, "split", source).value_or("test");
    v.acquisition =
        Optional<std::string>(jv, "acquisition", source).value_or("nadir");
    if (v.split != "train" && v.split != "test") {
      throw ValidationError(source + ": view " + v.image_id +
                            " has invalid split '" + v.split + "'");
    }
    if (v.acquisition != "nadir" && v.acquisition != "oblique" &&
        v.acquisition != "manual") {
      throw ValidationError(source + ": view " + v.image_id +
                            " has invalid acquisition '" + v.acquisition + "'");
    }
    if (!ids.insert(v.image_id).second) {
      throw ValidationError(source + ": duplicate image id " + v.image_id);
    }
    m.views.push_back(std::move(v));
  }

  // Referential integrity before any evaluation starts.
  for (const ManifestView& v : m.views) {
    RequireFile(m.Resolve(v.camera_file), "camera file");
    RequireFile(m.Resolve(v.depth_file), "depth file");
    RequireFile(m.Resolve(v.mask_file), "mask file");
  }
  if (m.gt_cloud) RequireFile(m.Resolve(*m.gt_cloud), "ground-truth cloud");
  return m;
}

void WriteManifest(const fs::path& path, const SceneManifest& m) {
  json j;
  j["schema_version"] = m.schema_version;
  j["scene_id"] = m.scene_id;
  j["dataset"] = m.dataset.empty() ? m.scene_id : m.dataset;
  if (m.gt_cloud) j["gt_cloud"] = *m.gt_cloud;
  json md;
  md["voxel_size"] = m.metadata.voxel_size;
  if (m.metadata.gsd) md["gsd"] = *m.metadata.gsd;
  if (m.metadata.altitude) md["altitude"] = *m.metadata.altitude;
  if (m.metadata.hfov) md["hfov"] = *m.metadata.hfov;
  j["metadata"] = md;
  j["views"] = json::array();
  for (const ManifestView& v : m.views) {
    j["views"].push_back({{"image_id", v.image_id},
                          {"camera", v.camera_file},
                          {"depth", v.depth_file},
                          {"mask", v.mask_file},
                          {"split", v.split},
                          {"acquisition", v.acquisition}});
  }
  WriteFileBytes(path, j.dump(2) + "\n");
}

PredictionManifest ReadPredictionManifest(const fs::path& path) {
  const std::string source = path.string();
  const json j = ParseJsonFile(path);
  if (!j.is_object()) {
    throw ParseError(source + ": prediction manifest must be an object");
  }
  PredictionManifest m;
  m.base_dir = path.parent_path();
  m.schema_version = Required<int>(j, "schema_version", source);
  if (m.schema_version != kManifestSchemaVersion) {
    throw ValidationError(source + ": unsupported schema_version " +
                          std::to_string(m.schema_version));
  }
  m.model = Required<std::string>(j, "model", source);
  m.input_mode = Optional<std::string>(j, "input_mode", source).value_or("rgb");
  m.camera_file = Required<std::string>(j, "cameras", source);
  m.has_intrinsics =
      Optional<bool>(j, "has_intrinsics", source).value_or(true);
  if (!j.contains("views") || !j.at("views").is_array()) {
    throw ParseError(source + ": missing 'views' array");
  }
  std::set<std::string> ids;
  for (const json& jv : j.at("views")) {
    PredictionViewRef v;
    v.image_id = Required<std::string>(jv, "image_id", source);
    v.depth_file = Optional<std::string>(jv, "depth", source);
    v.points_file = Optional<std::string>(jv, "points", source);
    if (!v.depth_file && !v.points_file) {
      throw ValidationError(source + ": prediction " + v.image_id +
                            " has neither depth nor points");
    }
    if (!ids.insert(v.image_id).second) {
      throw ValidationError(source + ": duplicate image id " + v.image_id);
    }
    m.views.push_back(std::move(v));
  }
  RequireFile(m.Resolve(m.camera_file), "prediction camera file");
  for (const PredictionViewRef& v : m.views) {
    if (v.depth_file) RequireFile(m.Resolve(*v.depth_file), "predicted depth");
    if (v.points_file) {
      RequireFile(m.Resolve(*v.points_file), "predicted point map");
    }
  }
  return m;
}

void WritePredictionManifest(const fs::path& path,
                             const PredictionManifest& m) {
  json j;
  j["schema_version"] = m.schema_version;
  j["model"] = m.model;
  j["input_mode"] = m.input_mode;
  j["cameras"] = m.camera_file;
  j["has_intrinsics"] = m.has_intrinsics;
  j["views"] = json::array();
  for (const PredictionViewRef& v : m.views) {
    json jv;
    jv["image_id"] = v.image_id;
    if (v.depth_file) jv["depth"] = *v.depth_file;
    if (v.points_file) jv["points"] = *v.points_file;
    j["views"].push_back(jv);
  }
  WriteFileBytes(path, j.dump(2) + "\n");
}

}  // namespace uavgeo
