#include "levelset.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace efem {

LevelSet LevelSet::plane(const Vec3& point, const Vec3& normal) {
  const double len = norm(normal);
  if (!(len > 0.0) || !std::isfinite(len)) {
    throw Error(ErrorCode::invalid_argument, "plane normal must be nonzero and finite");
  }
  return LevelSet(Plane{point, normal * (1.0 / len)});
}

LevelSet LevelSet::circle(const Vec3& center, double radius, bool inside_positive) {
  if (!(radius > 0.0)) throw Error(ErrorCode::invalid_argument, "circle radius must be positive");
  return LevelSet(Circle{{center.x, center.y, 0.0}, radius, inside_positive});
}

LevelSet LevelSet::sphere(const Vec3& center, double radius, bool inside_positive) {
  if (!(radius > 0.0)) throw Error(ErrorCode::invalid_argument, "sphere radius must be positive");
  return LevelSet(Sphere{center, radius, inside_positive});
}

LevelSet LevelSet::nodal(std::vector<double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::invalid_argument, "nodal level set values must be finite");
  }
  return LevelSet(Nodal{std::move(values)});
}

double LevelSet::evaluate(const Vec3& x) const {
  struct Visitor {
    const Vec3& x;
    double operator()(const Plane& p) const { return dot(x - p.point, p.normal); }
    double operator()(const Circle& c) const {
      const double r = std::hypot(x.x - c.center.x, x.y - c.center.y);
      return c.inside_positive ? c.radius - r : r - c.radius;
    }
    double operator()(const Sphere& s) const {
      const double r = norm(x - s.center);
      return s.inside_positive ? s.radius - r : r - s.radius;
    }
    double operator()(const Nodal&) const {
      throw Error(ErrorCode::invalid_argument, "nodal level set can only be evaluated at mesh nodes");
    }
  };
  return std::visit(Visitor{x}, shape_);
}

std::vector<double> LevelSet::nodal_values(const Mesh& mesh) const {
  if (const auto* n = std::get_if<Nodal>(&shape_)) {
    if (n->values.size() != mesh.num_nodes()) {
      throw Error(ErrorCode::incompatible, "nodal level set has " + std::to_string(n->values.size()) +
                                               " values for a mesh with " + std::to_string(mesh.num_nodes()) +
                                               " nodes");
    }
    return n->values;
  }
  std::vector<double> d(mesh.num_nodes());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = evaluate(mesh.node(i));
  return d;
}

std::string LevelSet::kind() const {
  switch (shape_.index()) {
    case 0:
      return "plane";
    case 1:
      return "circle";
    case 2:
      return "sphere";
    default:
      return "nodal";
  }
}

double snap_distance(double d, double tol) {
  if (std::abs(d) >= tol) return d;
  return d < 0.0 ? -tol : tol;
}

Classification classify_elements(const Mesh& mesh, const LevelSet& levelset, double snap) {
  Classification out;
  out.nodal_d = levelset.nodal_values(mesh);

  // Node-level length scale: the largest incident element size, so every
  // element sees the same snapped value at a shared node.
  std::vector<double> node_h(mesh.num_nodes(), 0.0);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const double h = mesh.geometry(e).size();
    for (int v : mesh.element(e)) node_h[v] = std::max(node_h[v], h);
  }
  for (std::size_t i = 0; i < out.nodal_d.size(); ++i) {
    out.nodal_d[i] = snap_distance(out.nodal_d[i], snap * node_h[i]);
  }

  out.state.resize(mesh.num_elements());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    bool pos = false, neg = false;
    for (int v : mesh.element(e)) {
      (out.nodal_d[v] > 0.0 ? pos : neg) = true;
    }
    if (pos && neg) {
      out.state[e] = ElementState::cut;
      ++out.num_cut;
    } else {
      out.state[e] = pos ? ElementState::positive : ElementState::negative;
    }
  }
  return out;
}

}  // namespace efem
