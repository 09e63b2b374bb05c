#pragma once

#include <memory>
#include <vector>

#include "problem.hpp"

namespace efem {

/// Potential and field at a point of a closed-form solution.
struct AnalyticValue {
  double phi = 0.0;
  Vec3 E;          // grad phi
  int region = 1;  // 1 or 2
};

/// Bi-material slab between electrodes at y=0 (phi=0) and y=1 (phi=1). Region 1
/// (eps1 = q eps2) lies above interface_y. q may be +inf (conductor limit).
AnalyticValue planar_solution(double q, double y, double interface_y = 0.5);

/// Dielectric sphere of radius r_o in a uniform unit field along the polar axis;
/// q = eps_inside / eps_outside. Region 1 is the inside.
double sphere_region1(double q, double r, double cos_theta);
double sphere_region2(double q, double r_o, double r, double cos_theta);
double sphere_solution(double q, double r_o, double r, double cos_theta);

/// Infinite dielectric cylinder (2D disc) in a uniform unit field; diagnostic only.
double cylinder_solution(double q, double radius, double r, double cos_theta);

/// Evaluator used as the error target of a case.
class ReferenceField {
 public:
  virtual ~ReferenceField() = default;
  virtual double potential(const Vec3& x) const = 0;
  /// Field on the given side of the interface (+1 positive level set, -1 negative).
  virtual Vec3 field(const Vec3& x, int side) const = 0;
  /// Interface crossings of a segment as parameters t in [0,1], increasing.
  virtual std::vector<double> crossings(const Segment& seg) const = 0;
  /// Unit interface normal at a crossing, toward the positive side.
  virtual Vec3 normal(const Vec3& x) const = 0;
};

/// Slab solution scaled to arbitrary box, electrode values and permittivities.
class PlanarReference final : public ReferenceField {
 public:
  PlanarReference(double y0, double y1, double phi0, double phi1, double interface_y, double eps_below,
                  double eps_above);
  double potential(const Vec3& x) const override;
  Vec3 field(const Vec3& x, int side) const override;
  std::vector<double> crossings(const Segment& seg) const override;
  Vec3 normal(const Vec3&) const override { return {0.0, 1.0, 0.0}; }
  double slope_below() const { return s_below_; }
  double slope_above() const { return s_above_; }

 private:
  double y0_, y1_, phi0_, yi_, s_below_, s_above_;
};

/// Round inclusion (sphere in 3D, cylinder in 2D) in a uniform field E0 along y.
class InclusionReference final : public ReferenceField {
 public:
  InclusionReference(int dim, const Vec3& center, double radius, double q, double e0, double phi_center,
                     bool inside_positive);
  double potential(const Vec3& x) const override;
  Vec3 field(const Vec3& x, int side) const override;
  std::vector<double> crossings(const Segment& seg) const override;
  Vec3 normal(const Vec3& x) const override;

 private:
  double raw(const Vec3& x, bool inside) const;
  int dim_;
  Vec3 c_;
  double radius_, q_, e0_, phi_c_;
  bool inside_positive_;
};

/// Discrete reference backed by a solved field.
class SolutionReference final : public ReferenceField {
 public:
  explicit SolutionReference(SolveResult result) : result_(std::move(result)) {}
  double potential(const Vec3& x) const override;
  Vec3 field(const Vec3& x, int side) const override;
  std::vector<double> crossings(const Segment& seg) const override;
  Vec3 normal(const Vec3& x) const override;
  const SolutionField& solution() const { return *result_.field; }
  const SolveResult& result() const { return result_; }

 private:
  SolveResult result_;
};

/// Closed-form reference matching the problem: a horizontal plane between Dirichlet
/// top and bottom electrodes, or a circle/sphere in a box with Dirichlet top and bottom.
std::unique_ptr<ReferenceField> analytic_reference(const Problem& problem);

enum class ReferenceKind { analytic, conforming, self };

/// Discrete reference on a fine mesh. conforming: standard FEM on a structured mesh
/// whose element faces contain the interface (rejected otherwise). self: enriched
/// solve with displacement terms.
std::unique_ptr<SolutionReference> reference_solve(const Problem& problem, ReferenceKind kind, double fine_h,
                                                   const SolverOptions& solver = {}, int threads = 1);

}  // namespace efem
