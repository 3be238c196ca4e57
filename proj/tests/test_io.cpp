#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "gofd/error.hpp"
#include "gofd/io.hpp"

using namespace gofd;

namespace {

std::filesystem::path scratch(const std::string& name) {
  return std::filesystem::temp_directory_path() / "gofd_io_test" / name;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("doubles survive formatting") {
  for (double v : {0.1, -1.0 / 3, 1e-300, 6.02214076e23, 0.0}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("mesh files round trip") {
  for (auto kind : {MeshKind::interval, MeshKind::disk, MeshKind::ball}) {
    auto m = generate_benchmark_mesh(kind, 3);
    auto text = format_mesh(m);
    auto back = parse_mesh(text);
    CHECK(back.dim() == m.dim());
    CHECK(back.vertices() == m.vertices());
    CHECK(back.elements() == m.elements());
    CHECK(back.boundary_flags() == m.boundary_flags());
    CHECK(format_mesh(back) == text);
  }
  auto m = generate_benchmark_mesh(MeshKind::lshape, 2);
  auto path = scratch("l.mesh");
  write_mesh(path, m);
  CHECK(read_mesh(path).vertices() == m.vertices());
}

TEST_CASE("three-vertex interval file") {
  const std::string text =
      "# comment\n"
      "gofd-mesh 1 1 3 2 0\n"
      "0\n0.5\n1\n"
      "0 1\n1 2\n";
  auto m = parse_mesh(text);
  CHECK(m.num_vertices() == 3);
  CHECK(m.num_elements() == 2);
  CHECK(m.is_boundary(0));
  CHECK_FALSE(m.is_boundary(1));
  CHECK(m.is_boundary(2));
}

TEST_CASE("malformed mesh files") {
  CHECK(code_of([] { parse_mesh("gofd-mesh 1 1 3 2 0\n0\n0.5\n0 1\n1 2\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_mesh("mesh 1 1 2 1 0\n0\n1\n0 1\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_mesh("gofd-mesh 1 1 2 1 0\n0\nx\n0 1\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_mesh("gofd-mesh 1 1 2 1 0\n0\n1\n0 5\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_mesh("gofd-mesh 1 1 2 1 0\n0\n1\n0 1\n1 0\n"); }) == ErrorCode::ParseError);
  try {
    parse_mesh("gofd-mesh 1 1 2 1 0\n0\nx\n0 1\n");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK(code_of([] { read_mesh(scratch("does_not_exist.mesh")); }) == ErrorCode::IoError);
}

TEST_CASE("VTK output") {
  auto m = generate_benchmark_mesh(MeshKind::disk, 1);
  std::vector<double> u(m.num_vertices(), 1.5);
  std::vector<VertexField> fields{{"u", u}};
  auto text = format_vtk(m, fields, "test");
  CHECK(text.find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
  CHECK(text.find("POINTS " + std::to_string(m.num_vertices()) + " double") != std::string::npos);
  CHECK(text.find("CELLS " + std::to_string(m.num_elements()) + " " + std::to_string(4 * m.num_elements())) !=
        std::string::npos);
  CHECK(text.find("CELL_TYPES " + std::to_string(m.num_elements()) + "\n5\n") != std::string::npos);
  CHECK(text.find("SCALARS u double 1") != std::string::npos);
  CHECK(format_vtk(m, {}).find("POINT_DATA") == std::string::npos);
  std::vector<double> short_field(2);
  std::vector<VertexField> bad{{"v", short_field}};
  CHECK(code_of([&] { format_vtk(m, bad); }) == ErrorCode::ParameterMismatch);
  auto path = scratch("sub/dir/m.vtk");
  write_vtk(path, m, fields, "test");
  CHECK(read_text(path) == text);
}

TEST_CASE("convergence CSV") {
  ConvergenceTable t;
  ConvergenceRow a{16, 0.125, 1e-2, 2e-2, 7, 0.5, true};
  ConvergenceRow b{32, 0.0625, 2.5e-3, 1e-2, 9, 0.75, false};
  t.rows = {a, b};
  t.sort_and_fit();
  auto csv = format_convergence_csv(t);
  CHECK(csv.rfind("ne,h_bar,l2_error,linf_error,iterations,seconds\n", 0) == 0);
  CHECK(csv.find("32,0.0625,0.0025,0.01,9,0.75,not_converged\n") != std::string::npos);
  const auto at = csv.find("# slopes: l2=");
  REQUIRE(at != std::string::npos);
  double l2 = 0, linf = 0;
  REQUIRE(std::sscanf(csv.c_str() + at, "# slopes: l2=%lf, linf=%lf", &l2, &linf) == 2);
  CHECK(l2 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(linf == doctest::Approx(1.0).epsilon(1e-12));
  ConvergenceTable one;
  one.rows = {a};
  one.sort_and_fit();
  CHECK(format_convergence_csv(one).find("l2=nan, linf=nan") != std::string::npos);
  CHECK(format_convergence_csv(t) == csv);
}

TEST_CASE("configuration files") {
  auto c = parse_config("# header\ndim = 2\ns=0.3  # order\n\ndim=3\n");
  CHECK(c.at("dim") == "3");
  CHECK(c.at("s") == "0.3");
  CHECK(c.size() == 2);
  CHECK(code_of([] { parse_config("dim 2\n"); }) == ErrorCode::ParseError);
  write_text(scratch("cfg.ini"), "mesh=disk:8\n");
  CHECK(read_config(scratch("cfg.ini")).at("mesh") == "disk:8");
}
