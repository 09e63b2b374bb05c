#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "assembly.hpp"

namespace efem {

/// Uniform bin grid over element bounding boxes for point location.
class PointLocator {
 public:
  explicit PointLocator(const Mesh& mesh);
  /// First (lowest index) element containing x, or -1.
  int locate(const Vec3& x) const;
  /// Every element containing x (within a relative barycentric tolerance).
  std::vector<int> locate_all(const Vec3& x) const;

 private:
  const std::vector<int>& bin(const Vec3& x) const;
  bool contains(int e, const Vec3& x) const;

  const Mesh* mesh_;
  Vec3 lo_, hi_;
  std::array<int, 3> dims_{1, 1, 1};
  std::vector<std::vector<int>> bins_;
  std::vector<ElementGeometry> geometry_;
  std::vector<int> empty_;
};

struct FieldValue {
  double phi = 0.0;
  Vec3 E;        // grad phi
  int side = 0;  // +1 / -1 material side used for the gradient
};

/// Solved potential with recovered enrichment, evaluable anywhere in the mesh.
class SolutionField {
 public:
  SolutionField(std::shared_ptr<const Mesh> mesh, const AssembledSystem& system, std::vector<double> phi);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  const std::vector<double>& nodal() const { return phi_; }
  const Classification& classification() const { return cls_; }
  const PointLocator& locator() const { return locator_; }

  bool enriched(std::size_t e) const { return enriched_index_[e] >= 0; }
  /// Recovered enrichment DoF of an enriched element.
  double phi_star(std::size_t e) const;
  const CutDecomposition* decomposition(std::size_t e) const;
  const std::vector<EnrichedElement>& enriched_elements() const { return enriched_; }
  const std::vector<double>& phi_star_values() const { return phi_star_; }

  /// Interpolated level set inside element e.
  double distance_in(std::size_t e, const Vec3& x) const;
  /// Material side of x inside element e; points on the interface use the hint.
  int side_in(std::size_t e, const Vec3& x, int side_hint = +1) const;
  /// phi and E inside element e, with the gradient taken on the requested side.
  FieldValue evaluate_in(std::size_t e, const Vec3& x, int side) const;
  /// phi and E at x; throws outside_domain when x is not in the mesh.
  FieldValue evaluate(const Vec3& x, int side_hint = +1) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  std::vector<double> phi_;
  Classification cls_;
  std::vector<EnrichedElement> enriched_;
  std::vector<int> enriched_index_;
  std::vector<double> phi_star_;
  std::vector<ElementGeometry> geometry_;
  PointLocator locator_;
};

/// phi*_e = r_e . phi_e for every enriched element, in AssembledSystem::enriched order.
std::vector<double> recover_enrichment(const Mesh& mesh, const AssembledSystem& system,
                                       std::span<const double> phi);

struct Segment {
  Vec3 a, b;
  Vec3 at(double t) const { return a + (b - a) * t; }
  double length() const { return norm(b - a); }
};

/// Part of a segment inside one element and on one material side.
struct LinePiece {
  double t0 = 0.0, t1 = 0.0;
  int element = -1;
  int side = 0;
};

/// Pieces covering the segment in increasing t, split at element boundaries
/// and interface crossings. Overlaps along shared faces resolve to the lowest element.
std::vector<LinePiece> line_pieces(const SolutionField& sol, const Segment& seg);

struct LineSample {
  Vec3 x;
  double t = 0.0;
  double phi = 0.0;
  Vec3 E;
  int side = 0;
};

/// count evenly spaced samples, plus a one-sided pair at every interface crossing.
std::vector<LineSample> sample_line(const SolutionField& sol, const Segment& seg, int count);

struct InterfaceCrossing {
  double t = 0.0;
  Vec3 x;
  int element = -1;
  Vec3 normal;  // unit, pointing to the positive side
};

/// Crossings of the segment with the discrete (element-wise linear) interface.
std::vector<InterfaceCrossing> interface_crossings(const SolutionField& sol, const Segment& seg);

using ScalarField = std::function<double(const Vec3&)>;

/// sqrt of the line integral of (phi_h - reference)^2 by composite trapezoid with at
/// least min_samples points and forced nodes at element and interface crossings.
double l2_line_error(const SolutionField& sol, const ScalarField& reference, const Segment& seg,
                     int min_samples = 1000);

/// Largest jump of phi_h between neighboring elements at the points where the segment crosses
/// element boundaries.
double interelement_mismatch(const SolutionField& sol, const Segment& seg);

}  // namespace efem
