#include "gofd/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gofd/error.hpp"

namespace gofd {

namespace {

std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

std::vector<std::string> tokens(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& msg) {
  fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + msg);
}

template <class T>
T parse_number(const std::string& tok, std::size_t line) {
  T v{};
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size()) parse_fail(line, "bad number '" + tok + "'");
  return v;
}

const char* fmt_slope(double v, std::string& buf) {
  buf = std::isfinite(v) ? format_double(v) : "nan";
  return buf.c_str();
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

SimplicialMesh parse_mesh(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  auto next = [&](std::vector<std::string>& toks) {
    while (std::getline(in, raw)) {
      ++lineno;
      toks = tokens(strip_comment(raw));
      if (!toks.empty()) return true;
    }
    return false;
  };
  std::vector<std::string> t;
  if (!next(t)) parse_fail(lineno + 1, "missing header");
  if (t.size() != 6 || t[0] != "gofd-mesh" || t[1] != "1") parse_fail(lineno, "expected 'gofd-mesh 1 <dim> <N_v> <N_e> <0|1>'");
  MeshFileHeader h;
  h.dim = parse_number<int>(t[2], lineno);
  h.vertices = parse_number<std::size_t>(t[3], lineno);
  h.elements = parse_number<std::size_t>(t[4], lineno);
  int flag = parse_number<int>(t[5], lineno);
  if (h.dim < 1 || h.dim > 3) parse_fail(lineno, "dimension must be 1, 2 or 3");
  if (flag != 0 && flag != 1) parse_fail(lineno, "marker flag must be 0 or 1");
  h.has_boundary_markers = flag == 1;
  const std::size_t vcols = h.dim + (h.has_boundary_markers ? 1 : 0);

  std::vector<Point> verts(h.vertices, Point{0, 0, 0});
  std::vector<std::uint8_t> flags(h.vertices, 0);
  for (std::size_t i = 0; i < h.vertices; ++i) {
    if (!next(t)) parse_fail(lineno + 1, "expected " + std::to_string(h.vertices) + " vertex lines, got " + std::to_string(i));
    if (t.size() != vcols) parse_fail(lineno, "vertex line needs " + std::to_string(vcols) + " fields");
    for (int r = 0; r < h.dim; ++r) verts[i][r] = parse_number<double>(t[r], lineno);
    if (h.has_boundary_markers) {
      int m = parse_number<int>(t[h.dim], lineno);
      if (m != 0 && m != 1) parse_fail(lineno, "boundary marker must be 0 or 1");
      flags[i] = static_cast<std::uint8_t>(m);
    }
  }
  std::vector<Element> elems(h.elements, Element{-1, -1, -1, -1});
  for (std::size_t e = 0; e < h.elements; ++e) {
    if (!next(t)) parse_fail(lineno + 1, "expected " + std::to_string(h.elements) + " element lines, got " + std::to_string(e));
    if (t.size() != static_cast<std::size_t>(h.dim + 1)) parse_fail(lineno, "element line needs " + std::to_string(h.dim + 1) + " indices");
    for (int i = 0; i <= h.dim; ++i) {
      long v = parse_number<long>(t[i], lineno);
      if (v < 0 || static_cast<std::size_t>(v) >= h.vertices) parse_fail(lineno, "vertex index out of range");
      elems[e][i] = static_cast<int>(v);
    }
  }
  if (next(t)) parse_fail(lineno, "unexpected data after " + std::to_string(h.elements) + " elements");
  SimplicialMesh mesh(h.dim, std::move(verts), std::move(elems), flags);
  if (h.has_boundary_markers) return mesh;
  return SimplicialMesh(h.dim, mesh.vertices(), mesh.elements(), boundary_flags_from_facets(mesh));
}

std::string format_mesh(const SimplicialMesh& mesh) {
  const int d = mesh.dim();
  std::string out = "gofd-mesh 1 " + std::to_string(d) + " " + std::to_string(mesh.num_vertices()) + " " +
                    std::to_string(mesh.num_elements()) + " 1\n";
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    for (int r = 0; r < d; ++r) out += format_double(mesh.vertex(i)[r]) + ' ';
    out += mesh.is_boundary(i) ? "1\n" : "0\n";
  }
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    auto el = mesh.element(e);
    for (int i = 0; i <= d; ++i) {
      out += std::to_string(el[i]);
      out += i == d ? '\n' : ' ';
    }
  }
  return out;
}

SimplicialMesh read_mesh(const std::filesystem::path& path) { return parse_mesh(read_text(path)); }

void write_mesh(const std::filesystem::path& path, const SimplicialMesh& mesh) { write_text(path, format_mesh(mesh)); }

std::string format_vtk(const SimplicialMesh& mesh, std::span<const VertexField> fields, const std::string& title) {
  for (const auto& [name, values] : fields)
    if (values.size() != mesh.num_vertices())
      fail(ErrorCode::ParameterMismatch, "field '" + name + "' has " + std::to_string(values.size()) +
                                             " values for " + std::to_string(mesh.num_vertices()) + " vertices");
  const int d = mesh.dim();
  std::string out = "# vtk DataFile Version 3.0\n" + title + "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out += "POINTS " + std::to_string(mesh.num_vertices()) + " double\n";
  for (const auto& p : mesh.vertices()) out += format_double(p[0]) + ' ' + format_double(p[1]) + ' ' + format_double(p[2]) + '\n';
  const std::size_t ne = mesh.num_elements();
  out += "CELLS " + std::to_string(ne) + " " + std::to_string(ne * (d + 2)) + "\n";
  for (std::size_t e = 0; e < ne; ++e) {
    out += std::to_string(d + 1);
    for (int v : mesh.element(e)) out += ' ' + std::to_string(v);
    out += '\n';
  }
  const char* type = d == 1 ? "3\n" : d == 2 ? "5\n" : "10\n";
  out += "CELL_TYPES " + std::to_string(ne) + "\n";
  for (std::size_t e = 0; e < ne; ++e) out += type;
  if (!fields.empty()) {
    out += "POINT_DATA " + std::to_string(mesh.num_vertices()) + "\n";
    for (const auto& [name, values] : fields) {
      out += "SCALARS " + name + " double 1\nLOOKUP_TABLE default\n";
      for (double v : values) out += format_double(v) + '\n';
    }
  }
  return out;
}

void write_vtk(const std::filesystem::path& path, const SimplicialMesh& mesh, std::span<const VertexField> fields,
               const std::string& title) {
  write_text(path, format_vtk(mesh, fields, title));
}

std::string format_convergence_csv(const ConvergenceTable& table) {
  std::string out = "ne,h_bar,l2_error,linf_error,iterations,seconds\n";
  for (const auto& r : table.rows) {
    out += std::to_string(r.ne) + ',' + format_double(r.h_bar) + ',' + format_double(r.l2) + ',' +
           format_double(r.linf) + ',' + std::to_string(r.iterations) + ',' + format_double(r.seconds);
    if (!r.converged) out += ",not_converged";
    out += '\n';
  }
  std::string a, b;
  const bool fit = table.rows.size() >= 2;
  out += "# slopes: l2=";
  out += fmt_slope(fit ? table.slope_l2 : NAN, a);
  out += ", linf=";
  out += fmt_slope(fit ? table.slope_linf : NAN, b);
  out += '\n';
  return out;
}

void write_convergence_csv(const std::filesystem::path& path, const ConvergenceTable& table) {
  write_text(path, format_convergence_csv(table));
}

std::map<std::string, std::string> parse_config(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const char* ws = " \t\r";
    s.erase(0, s.find_first_not_of(ws));
    auto end = s.find_last_not_of(ws);
    s.erase(end == std::string::npos ? 0 : end + 1);
    return s;
  };
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) parse_fail(lineno, "expected key=value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) parse_fail(lineno, "empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_config(const std::filesystem::path& path) { return parse_config(read_text(path)); }

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace gofd
