#pragma once

#include <string>
#include <variant>
#include <vector>

#include "mesh.hpp"

namespace efem {

/// Signed distance description of a material interface. Positive values
/// select material 1, negative values material 2.
class LevelSet {
 public:
  struct Plane {
    Vec3 point;
    Vec3 normal;  // unit length
  };
  struct Circle {  // 2D, ignores z
    Vec3 center;
    double radius = 0.0;
    bool inside_positive = false;
  };
  struct Sphere {
    Vec3 center;
    double radius = 0.0;
    bool inside_positive = false;
  };
  struct Nodal {
    std::vector<double> values;
  };

  static LevelSet plane(const Vec3& point, const Vec3& normal);
  static LevelSet circle(const Vec3& center, double radius, bool inside_positive = false);
  static LevelSet sphere(const Vec3& center, double radius, bool inside_positive = false);
  static LevelSet nodal(std::vector<double> values);

  /// Exact signed distance; nodal level sets cannot be queried off-node.
  double evaluate(const Vec3& x) const;
  /// One value per mesh node.
  std::vector<double> nodal_values(const Mesh& mesh) const;

  bool is_nodal() const { return std::holds_alternative<Nodal>(shape_); }
  std::string kind() const;
  const auto& shape() const { return shape_; }

 private:
  template <typename T>
  explicit LevelSet(T shape) : shape_(std::move(shape)) {}

  std::variant<Plane, Circle, Sphere, Nodal> shape_;
};

enum class ElementState { positive, negative, cut };

struct Classification {
  std::vector<double> nodal_d;  // snapped, never exactly zero
  std::vector<ElementState> state;
  std::size_t num_cut = 0;
};

inline constexpr double default_snap_tolerance = 1e-6;

/// Evaluate, snap near-zero nodal distances away from zero, and mark elements
/// whose nodes carry strictly mixed signs as cut.
Classification classify_elements(const Mesh& mesh, const LevelSet& levelset,
                                 double snap = default_snap_tolerance);

/// Snap one distance: |d| < tol becomes +-tol keeping the sign (zero goes to +).
double snap_distance(double d, double tol);

}  // namespace efem
