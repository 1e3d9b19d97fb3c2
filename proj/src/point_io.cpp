#include "jrmpc/point_io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "jrmpc/errors.hpp"
#include "jrmpc/init.hpp"

namespace jrmpc {

namespace {

std::string lower_extension(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return {};
  std::string ext = path.substr(dot + 1);
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double parse_number(std::string_view tok, const std::string& path, std::size_t line) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(path, line, "not a number: '" + std::string(tok) + "'");
  }
  if (!std::isfinite(v)) throw ParseError(path, line, "non-finite coordinate");
  return v;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return in;
}

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<std::string> properties;
  bool has_list = false;
};

Points parse_ply(std::istream& in, const std::string& path) {
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next() || line != "ply") throw ParseError(path, lineno == 0 ? 1 : lineno, "missing 'ply' magic");
  std::vector<PlyElement> elements;
  bool saw_format = false;
  bool saw_end = false;
  while (next()) {
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "format") {
      if (tok.size() < 2) throw ParseError(path, lineno, "malformed format line");
      if (tok[1] != "ascii") throw ParseError(path, lineno, "only ASCII PLY is supported (got '" + std::string(tok[1]) + "')");
      saw_format = true;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) throw ParseError(path, lineno, "malformed element line");
      PlyElement e;
      e.name = std::string(tok[1]);
      std::size_t count = 0;
      const auto [ptr, ec] = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), count);
      if (ec != std::errc() || ptr != tok[2].data() + tok[2].size()) {
        throw ParseError(path, lineno, "bad element count");
      }
      e.count = count;
      elements.push_back(std::move(e));
    } else if (tok[0] == "property") {
      if (elements.empty()) throw ParseError(path, lineno, "property before any element");
      if (tok.size() >= 2 && tok[1] == "list") {
        if (tok.size() != 5) throw ParseError(path, lineno, "malformed list property");
        elements.back().has_list = true;
        elements.back().properties.emplace_back(tok[4]);
      } else {
        if (tok.size() != 3) throw ParseError(path, lineno, "malformed property line");
        elements.back().properties.emplace_back(tok[2]);
      }
    } else if (tok[0] == "end_header") {
      saw_end = true;
      break;
    } else {
      throw ParseError(path, lineno, "unknown header keyword '" + std::string(tok[0]) + "'");
    }
  }
  if (!saw_end) throw ParseError(path, lineno + 1, "header not terminated by end_header");
  if (!saw_format) throw ParseError(path, lineno, "missing format line");

  const PlyElement* vertex = nullptr;
  for (const auto& e : elements) {
    if (e.name == "vertex") vertex = &e;
  }
  if (vertex == nullptr) throw ParseError(path, lineno, "no vertex element");
  if (vertex->has_list) throw ParseError(path, lineno, "list properties on vertices are not supported");
  int ix = -1, iy = -1, iz = -1;
  for (std::size_t p = 0; p < vertex->properties.size(); ++p) {
    if (vertex->properties[p] == "x") ix = static_cast<int>(p);
    if (vertex->properties[p] == "y") iy = static_cast<int>(p);
    if (vertex->properties[p] == "z") iz = static_cast<int>(p);
  }
  if (ix < 0 || iy < 0 || iz < 0) throw ParseError(path, lineno, "vertex element lacks x/y/z");

  Points pts(3, static_cast<Eigen::Index>(vertex->count));
  for (const auto& e : elements) {
    for (std::size_t r = 0; r < e.count; ++r) {
      if (!next()) {
        throw ParseError(path, lineno + 1,
                         "truncated: expected " + std::to_string(e.count) + " " + e.name +
                             " rows, found " + std::to_string(r));
      }
      if (&e != vertex) continue;
      const auto tok = split_ws(line);
      if (tok.size() != e.properties.size()) {
        throw ParseError(path, lineno,
                         "expected " + std::to_string(e.properties.size()) + " values, found " +
                             std::to_string(tok.size()));
      }
      const auto c = static_cast<Eigen::Index>(r);
      pts(0, c) = parse_number(tok[static_cast<std::size_t>(ix)], path, lineno);
      pts(1, c) = parse_number(tok[static_cast<std::size_t>(iy)], path, lineno);
      pts(2, c) = parse_number(tok[static_cast<std::size_t>(iz)], path, lineno);
    }
  }
  return pts;
}

Points parse_xyz(std::istream& in, const std::string& path) {
  std::vector<double> coords;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != 3) {
      throw ParseError(path, lineno, "expected 3 values, found " + std::to_string(tok.size()));
    }
    for (const auto& t : tok) coords.push_back(parse_number(t, path, lineno));
  }
  Points pts(3, static_cast<Eigen::Index>(coords.size() / 3));
  for (std::size_t i = 0; i < coords.size(); ++i) {
    pts(static_cast<Eigen::Index>(i % 3), static_cast<Eigen::Index>(i / 3)) = coords[i];
  }
  return pts;
}

void append_number(std::string& out, double v) {
  // Shortest text that parses back to the same double.
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

PointFormat format_from_path(const std::string& path) {
  const std::string ext = lower_extension(path);
  if (ext == "ply") return PointFormat::ply_ascii;
  if (ext == "xyz" || ext == "txt" || ext == "pts") return PointFormat::xyz;
  throw ContractViolation("cannot infer point format from '" + path + "'");
}

PointSet parse_point_file(const std::string& path, PointFormat format, std::size_t id) {
  std::ifstream in = open_input(path);
  Points pts = format == PointFormat::ply_ascii ? parse_ply(in, path) : parse_xyz(in, path);
  return PointSet(id, std::move(pts));
}

PointSet parse_point_file(const std::string& path) {
  return parse_point_file(path, format_from_path(path));
}

void write_point_file(const PointSet& set, const std::string& path, PointFormat format,
                      double scale) {
  std::string out;
  if (format == PointFormat::ply_ascii) {
    out += "ply\nformat ascii 1.0\nelement vertex " + std::to_string(set.size()) +
           "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  }
  for (Eigen::Index i = 0; i < set.points.cols(); ++i) {
    for (int d = 0; d < 3; ++d) {
      if (d > 0) out += ' ';
      append_number(out, set.points(d, i) * scale);
    }
    out += '\n';
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
  file << out;
  file.close();
  if (!file) throw std::runtime_error("failed writing '" + path + "'");
}

void write_point_file(const PointSet& set, const std::string& path, double scale) {
  write_point_file(set, path, format_from_path(path), scale);
}

double normalize_sets(std::vector<PointSet>& sets) {
  if (sets.empty()) return 1.0;
  std::vector<RigidTransform> ids(sets.size());
  const double d = bounding_box_diameter(transformed_union(sets, ids));
  if (!(d > 0.0)) return 1.0;
  for (auto& s : sets) s.points /= d;
  return d;
}

}  // namespace jrmpc
