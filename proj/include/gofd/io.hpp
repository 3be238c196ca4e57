#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gofd/mesh.hpp"
#include "gofd/problems.hpp"

namespace gofd {

struct MeshFileHeader {
  int dim = 0;
  std::size_t vertices = 0;
  std::size_t elements = 0;
  bool has_boundary_markers = false;
};

// Shortest text that reads back as the same double.
std::string format_double(double v);

SimplicialMesh parse_mesh(const std::string& text);
std::string format_mesh(const SimplicialMesh& mesh);
SimplicialMesh read_mesh(const std::filesystem::path& path);
void write_mesh(const std::filesystem::path& path, const SimplicialMesh& mesh);

using VertexField = std::pair<std::string, std::span<const double>>;

std::string format_vtk(const SimplicialMesh& mesh, std::span<const VertexField> fields, const std::string& title = "gofd");
void write_vtk(const std::filesystem::path& path, const SimplicialMesh& mesh, std::span<const VertexField> fields,
               const std::string& title = "gofd");

std::string format_convergence_csv(const ConvergenceTable& table);
void write_convergence_csv(const std::filesystem::path& path, const ConvergenceTable& table);

// key=value lines; '#' starts a comment; later keys override earlier ones.
std::map<std::string, std::string> parse_config(const std::string& text);
std::map<std::string, std::string> read_config(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace gofd
