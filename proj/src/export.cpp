#include "export.hpp"

#include <cstdio>
#include <fstream>

#include "error.hpp"

namespace efem {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

struct Cell {
  std::array<int, 4> points;
  Vec3 E;
  int side;
};

}  // namespace

std::string format_vtk(const SolutionField& sol) {
  const Mesh& mesh = sol.mesh();
  const int dim = mesh.dim();
  const int nv = dim + 1;

  std::vector<Vec3> points(mesh.nodes().begin(), mesh.nodes().end());
  std::vector<double> phi = sol.nodal();
  std::vector<Cell> cells;
  cells.reserve(mesh.num_elements());

  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto el = mesh.element(e);
    const auto* dec = sol.decomposition(e);
    if (!dec) {
      Cell c{{-1, -1, -1, -1}, {}, 0};
      for (int i = 0; i < nv; ++i) c.points[i] = el[i];
      const Vec3 mid = mesh.geometry(e).centroid();
      const int side = sol.side_in(e, mid);
      c.E = sol.evaluate_in(e, mid, side).E;
      c.side = side;
      cells.push_back(c);
      continue;
    }
    for (const auto& child : dec->children) {
      Cell c{{-1, -1, -1, -1}, {}, child.sign};
      Vec3 mid{};
      for (int i = 0; i < nv; ++i) {
        const int v = child.vertices[i];
        mid += dec->points[v];
        if (v < nv) {
          c.points[i] = el[v];
        } else {
          c.points[i] = static_cast<int>(points.size());
          points.push_back(dec->points[v]);
          phi.push_back(sol.evaluate_in(e, dec->points[v], child.sign).phi);
        }
      }
      c.E = sol.evaluate_in(e, mid * (1.0 / nv), child.sign).E;
      cells.push_back(c);
    }
  }

  std::string out;
  out += "# vtk DataFile Version 3.0\nenriched FEM electrostatic field\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out += "POINTS " + std::to_string(points.size()) + " double\n";
  for (const auto& p : points) {
    out += format_double(p.x) + ' ' + format_double(p.y) + ' ' + format_double(p.z) + '\n';
  }
  out += "CELLS " + std::to_string(cells.size()) + ' ' + std::to_string(cells.size() * (nv + 1)) + '\n';
  for (const auto& c : cells) {
    out += std::to_string(nv);
    for (int i = 0; i < nv; ++i) out += ' ' + std::to_string(c.points[i]);
    out += '\n';
  }
  out += "CELL_TYPES " + std::to_string(cells.size()) + '\n';
  const std::string type = dim == 2 ? "5\n" : "10\n";
  for (std::size_t i = 0; i < cells.size(); ++i) out += type;

  out += "POINT_DATA " + std::to_string(points.size()) + "\nSCALARS phi double 1\nLOOKUP_TABLE default\n";
  for (double v : phi) out += format_double(v) + '\n';

  out += "CELL_DATA " + std::to_string(cells.size()) + "\nVECTORS E double\n";
  for (const auto& c : cells) {
    out += format_double(c.E.x) + ' ' + format_double(c.E.y) + ' ' + format_double(c.E.z) + '\n';
  }
  out += "SCALARS side int 1\nLOOKUP_TABLE default\n";
  for (const auto& c : cells) out += std::to_string(c.side) + '\n';
  return out;
}

void export_vtk(const SolutionField& sol, const std::filesystem::path& path) { write_text(path, format_vtk(sol)); }

std::string format_csv(const std::vector<LineSample>& samples, int dim) {
  std::string out = dim == 2 ? "x,y,phi,Ex,Ey,side\n" : "x,y,z,phi,Ex,Ey,Ez,side\n";
  for (const auto& s : samples) {
    out += format_double(s.x.x) + ',' + format_double(s.x.y) + ',';
    if (dim == 3) out += format_double(s.x.z) + ',';
    out += format_double(s.phi) + ',' + format_double(s.E.x) + ',' + format_double(s.E.y) + ',';
    if (dim == 3) out += format_double(s.E.z) + ',';
    out += std::to_string(s.side) + '\n';
  }
  return out;
}

void export_csv(const std::vector<LineSample>& samples, int dim, const std::filesystem::path& path) {
  write_text(path, format_csv(samples, dim));
}

}  // namespace efem
