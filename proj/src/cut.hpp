#pragma once

#include <array>
#include <span>
#include <vector>

#include "vec.hpp"

namespace efem {

/// Sign-homogeneous sub-simplex of a cut element; vertices index CutDecomposition::points.
struct Child {
  std::array<int, 4> vertices{-1, -1, -1, -1};
  int sign = 0;
  double measure = 0.0;
};

/// Piece of an element face lying on one side of the interface.
struct FacePiece {
  std::array<Vec3, 3> vertices{};  // dim vertices (segment in 2D, triangle in 3D)
  int sign = 0;
  double measure = 0.0;
  Vec3 centroid;
};

struct CutFace {
  int local_face = -1;  // face opposite this local node
  bool crossed = false;
  std::vector<FacePiece> pieces;
};

/// Split of one cut simplex along the linear interpolant of the nodal distances.
struct CutDecomposition {
  int dim = 2;
  std::array<double, 4> d{};
  /// Element nodes (local order) followed by virtual interface nodes.
  std::vector<Vec3> points;
  /// Local element edge carrying each virtual node (indexed from points.size() - virtual count).
  std::vector<std::array<int, 2>> virtual_edges;
  std::vector<Child> children;
  /// Interface pieces inside the element: segments (2D) or triangles (3D), as point indices.
  std::vector<std::array<int, 3>> interface_facets;
  double parent_measure = 0.0;
  /// Set when a child is thinner than the degeneracy threshold; callers treat the element as uncut.
  bool degenerate = false;

  int num_nodes() const { return dim + 1; }
  int virtual_index(int i, int j) const;
  double measure(int sign) const;
  int majority_sign() const { return measure(+1) >= measure(-1) ? +1 : -1; }
};

inline constexpr double degenerate_child_ratio = 1e-14;

/// Split a simplex with strictly mixed nodal signs into sign-homogeneous children.
CutDecomposition split_simplex(int dim, std::span<const Vec3> coords, std::span<const double> d);

/// Every exterior face of a cut element, partitioned into sign-homogeneous pieces.
std::vector<CutFace> cut_exterior_faces(const CutDecomposition& decomposition);

/// Tetrahedron quality: longest edge cubed over volume, normalized to 1 for the regular tet.
double tet_aspect_ratio(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

}  // namespace efem
