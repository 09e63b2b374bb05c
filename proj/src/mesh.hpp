#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vec.hpp"

namespace efem {

/// Node indices of a simplex; unused trailing slots hold -1 (2D triangles).
using Element = std::array<int, 4>;

struct BoundaryFace {
  int element = -1;
  int local_face = -1;  // face opposite the local node with this index
  int tag = -1;         // index into Mesh::tag_names()
};

/// Affine geometry of one P1 simplex.
struct ElementGeometry {
  int dim = 2;
  std::array<Vec3, 4> coords{};
  double measure = 0.0;
  std::array<Vec3, 4> grads{};  // constant shape-function gradients

  int num_nodes() const { return dim + 1; }
  std::array<double, 4> barycentric(const Vec3& x) const;
  /// Longest edge length.
  double size() const;
  /// Outward unit normal of the face opposite local node f.
  Vec3 face_normal(int f) const;
  Vec3 centroid() const;
};

ElementGeometry make_geometry(int dim, std::span<const Vec3> coords);

/// Local node indices (within the element) that span the face opposite node f.
std::array<int, 3> local_face_nodes(int dim, int f);

/// Immutable simplex mesh with boundary tags and face adjacency.
class Mesh {
 public:
  Mesh(int dim, std::vector<Vec3> nodes, std::vector<Element> elements,
       std::vector<BoundaryFace> boundary, std::vector<std::string> tag_names);

  int dim() const { return dim_; }
  int nodes_per_element() const { return dim_ + 1; }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_elements() const { return elements_.size(); }

  const Vec3& node(std::size_t i) const { return nodes_[i]; }
  std::span<const Vec3> nodes() const { return nodes_; }
  std::span<const int> element(std::size_t e) const {
    return std::span<const int>(elements_[e].data(), static_cast<std::size_t>(dim_ + 1));
  }
  const std::vector<Element>& elements() const { return elements_; }

  /// Neighbor across local face f, or -1 on the domain boundary.
  int neighbor(std::size_t e, int f) const { return neighbors_[e][static_cast<std::size_t>(f)]; }
  std::size_t num_interior_faces() const { return interior_faces_; }

  const std::vector<BoundaryFace>& boundary_faces() const { return boundary_; }
  const std::vector<std::string>& tag_names() const { return tag_names_; }
  /// Index of a tag, or -1.
  int find_tag(const std::string& name) const;

  ElementGeometry geometry(std::size_t e) const;

 private:
  void build_adjacency();
  void validate() const;

  int dim_;
  std::vector<Vec3> nodes_;
  std::vector<Element> elements_;
  std::vector<BoundaryFace> boundary_;
  std::vector<std::string> tag_names_;
  std::vector<std::array<int, 4>> neighbors_;
  std::size_t interior_faces_ = 0;
};

struct Box {
  Vec3 lo{0.0, 0.0, 0.0};
  Vec3 hi{1.0, 1.0, 1.0};
};

/// Structured simplex mesh of a box. 2D cells are split along the (i,j)-(i+1,j+1)
/// diagonal; 3D cells into 6 tetrahedra around the lo-hi main diagonal.
/// Boundary tags: left/right (x), bottom/top (y), front/back (z).
Mesh generate_structured(int dim, int nx, int ny, int nz = 1, const Box& box = {});

Mesh read_mesh(const std::filesystem::path& path);
Mesh parse_mesh(const std::string& text);
void write_mesh(const Mesh& mesh, const std::filesystem::path& path);
std::string format_mesh(const Mesh& mesh);

}  // namespace efem
