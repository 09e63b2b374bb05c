#include "analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"

namespace efem {

AnalyticValue planar_solution(double q, double y, double interface_y) {
  if (!(y >= 0.0 && y <= 1.0)) throw Error(ErrorCode::outside_domain, "planar solution needs 0 <= y <= 1");
  if (!(q > 0.0)) throw Error(ErrorCode::invalid_argument, "permittivity ratio must be positive");
  const PlanarReference ref(0.0, 1.0, 0.0, 1.0, interface_y, 1.0, q);
  const Vec3 x{0.0, y, 0.0};
  const int region = y >= interface_y ? 1 : 2;
  return {ref.potential(x), ref.field(x, region == 1 ? +1 : -1), region};
}

double sphere_region1(double q, double r, double cos_theta) {
  if (r < 0.0) throw Error(ErrorCode::invalid_argument, "radius must be non-negative");
  return 3.0 * r * cos_theta / (2.0 + q);
}

double sphere_region2(double q, double r_o, double r, double cos_theta) {
  if (!(r > 0.0)) throw Error(ErrorCode::invalid_argument, "outer solution undefined at r = 0");
  return cos_theta * (r + (1.0 - q) / (2.0 + q) * r_o * r_o * r_o / (r * r));
}

double sphere_solution(double q, double r_o, double r, double cos_theta) {
  return r <= r_o ? sphere_region1(q, r, cos_theta) : sphere_region2(q, r_o, r, cos_theta);
}

double cylinder_solution(double q, double radius, double r, double cos_theta) {
  if (r < 0.0) throw Error(ErrorCode::invalid_argument, "radius must be non-negative");
  if (r <= radius) return 2.0 / (1.0 + q) * r * cos_theta;
  return cos_theta * (r + (1.0 - q) / (1.0 + q) * radius * radius / r);
}

// ---------------------------------------------------------------------------

PlanarReference::PlanarReference(double y0, double y1, double phi0, double phi1, double interface_y,
                                 double eps_below, double eps_above)
    : y0_(y0), y1_(y1), phi0_(phi0), yi_(interface_y) {
  if (!(y0 < interface_y && interface_y < y1)) {
    throw Error(ErrorCode::invalid_argument, "interface must lie strictly between the electrodes");
  }
  if (!(eps_below > 0.0 && eps_above > 0.0)) throw Error(ErrorCode::invalid_argument, "permittivity must be positive");
  // Continuity of eps * slope with the total drop fixed. Written so that an
  // infinite eps_above gives a zero upper slope rather than inf * 0.
  const double drop = phi1 - phi0;
  s_above_ = drop / ((yi_ - y0) * (eps_above / eps_below) + (y1 - yi_));
  s_below_ = (drop - s_above_ * (y1 - yi_)) / (yi_ - y0);
}

double PlanarReference::potential(const Vec3& x) const {
  if (x.y <= yi_) return phi0_ + s_below_ * (x.y - y0_);
  return phi0_ + s_below_ * (yi_ - y0_) + s_above_ * (x.y - yi_);
}

Vec3 PlanarReference::field(const Vec3&, int side) const { return {0.0, side > 0 ? s_above_ : s_below_, 0.0}; }

std::vector<double> PlanarReference::crossings(const Segment& seg) const {
  const double dy = seg.b.y - seg.a.y;
  if (dy == 0.0) return {};
  const double t = (yi_ - seg.a.y) / dy;
  if (t < 0.0 || t > 1.0) return {};
  return {t};
}

// ---------------------------------------------------------------------------

InclusionReference::InclusionReference(int dim, const Vec3& center, double radius, double q, double e0,
                                       double phi_center, bool inside_positive)
    : dim_(dim), c_(center), radius_(radius), q_(q), e0_(e0), phi_c_(phi_center), inside_positive_(inside_positive) {
  if (dim != 2 && dim != 3) throw Error(ErrorCode::invalid_argument, "inclusion reference needs dim 2 or 3");
  if (!(radius > 0.0) || !(q > 0.0)) throw Error(ErrorCode::invalid_argument, "radius and ratio must be positive");
  if (dim == 2) c_.z = 0.0;
}

namespace {

Vec3 flatten(const Vec3& x, int dim) { return dim == 2 ? Vec3{x.x, x.y, 0.0} : x; }

}  // namespace

double InclusionReference::raw(const Vec3& x, bool inside) const {
  const Vec3 rel = flatten(x, dim_) - c_;
  const double r = norm(rel);
  const double p = dim_;
  if (inside) return phi_c_ + e0_ * p / (p - 1.0 + q_) * rel.y;
  if (r == 0.0) throw Error(ErrorCode::invalid_argument, "outer solution undefined at the center");
  const double k = (1.0 - q_) / (p - 1.0 + q_);
  return phi_c_ + e0_ * rel.y * (1.0 + k * std::pow(radius_ / r, p));
}

double InclusionReference::potential(const Vec3& x) const {
  const double r = norm(flatten(x, dim_) - c_);
  return raw(x, r <= radius_);
}

Vec3 InclusionReference::field(const Vec3& x, int side) const {
  const bool inside = (side > 0) == inside_positive_;
  const double p = dim_;
  if (inside) return {0.0, e0_ * p / (p - 1.0 + q_), 0.0};
  const Vec3 rel = flatten(x, dim_) - c_;
  const double r = norm(rel);
  if (r == 0.0) throw Error(ErrorCode::invalid_argument, "outer field undefined at the center");
  const double k = (1.0 - q_) / (p - 1.0 + q_);
  const double rp = std::pow(radius_ / r, p);
  Vec3 g = rel * (-p * k * rp * rel.y / (r * r));
  g.y += 1.0 + k * rp;
  return g * e0_;
}

std::vector<double> InclusionReference::crossings(const Segment& seg) const {
  const Vec3 a = flatten(seg.a, dim_) - c_;
  const Vec3 d = flatten(seg.b, dim_) - flatten(seg.a, dim_);
  const double qa = dot(d, d);
  const double qb = 2.0 * dot(a, d);
  const double qc = dot(a, a) - radius_ * radius_;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (qa == 0.0 || disc <= 0.0) return {};
  const double s = std::sqrt(disc);
  std::vector<double> out;
  for (double t : {(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)}) {
    if (t >= 0.0 && t <= 1.0) out.push_back(t);
  }
  return out;
}

Vec3 InclusionReference::normal(const Vec3& x) const {
  Vec3 n = flatten(x, dim_) - c_;
  n = n * (1.0 / norm(n));
  return inside_positive_ ? n * -1.0 : n;
}

// ---------------------------------------------------------------------------

double SolutionReference::potential(const Vec3& x) const { return result_.field->evaluate(x).phi; }

Vec3 SolutionReference::field(const Vec3& x, int side) const {
  const SolutionField& sol = *result_.field;
  const auto candidates = sol.locator().locate_all(x);
  if (candidates.empty()) throw Error(ErrorCode::outside_domain, "point outside the reference mesh");
  // Prefer an element that actually holds material on the requested side.
  for (int e : candidates) {
    if (sol.enriched(e)) return sol.evaluate_in(e, x, side).E;
  }
  for (int e : candidates) {
    if (sol.side_in(e, x, side) == side) return sol.evaluate_in(e, x, side).E;
  }
  return sol.evaluate_in(candidates.front(), x, side).E;
}

std::vector<double> SolutionReference::crossings(const Segment& seg) const {
  std::vector<double> out;
  for (const auto& c : interface_crossings(*result_.field, seg)) out.push_back(c.t);
  return out;
}

Vec3 SolutionReference::normal(const Vec3& x) const {
  const SolutionField& sol = *result_.field;
  const int e = sol.locator().locate(x);
  if (e < 0) throw Error(ErrorCode::outside_domain, "point outside the reference mesh");
  const ElementGeometry g = sol.mesh().geometry(e);
  const auto el = sol.mesh().element(e);
  Vec3 grad{};
  for (int i = 0; i < g.num_nodes(); ++i) grad += g.grads[i] * sol.classification().nodal_d[el[i]];
  return grad * (1.0 / norm(grad));
}

// ---------------------------------------------------------------------------

namespace {

struct Electrodes {
  double phi_bottom, phi_top;
};

Electrodes electrodes(const Problem& problem) {
  auto value = [&](const std::string& tag) {
    const auto it = problem.bcs.find(tag);
    if (it == problem.bcs.end() || it->second.kind != BoundaryCondition::Kind::dirichlet) {
      throw Error(ErrorCode::incompatible, "analytic reference needs a Dirichlet condition on '" + tag + "'");
    }
    return it->second.value;
  };
  for (const auto& [tag, bc] : problem.bcs) {
    if (tag != "bottom" && tag != "top" && bc.kind == BoundaryCondition::Kind::dirichlet) {
      throw Error(ErrorCode::incompatible, "analytic reference expects only top and bottom electrodes");
    }
  }
  return {value("bottom"), value("top")};
}

}  // namespace

std::unique_ptr<ReferenceField> analytic_reference(const Problem& problem) {
  if (problem.mesh.file) throw Error(ErrorCode::incompatible, "analytic reference needs a structured box mesh");
  const Box& box = problem.mesh.box;
  const Electrodes el = electrodes(problem);
  const MaterialPair& m = problem.materials;

  const auto& shape = problem.levelset.shape();
  if (const auto* p = std::get_if<LevelSet::Plane>(&shape)) {
    if (std::abs(std::abs(p->normal.y) - 1.0) > 1e-12) {
      throw Error(ErrorCode::incompatible, "analytic planar reference needs an interface parallel to the electrodes");
    }
    const bool above_positive = p->normal.y > 0.0;
    return std::make_unique<PlanarReference>(box.lo.y, box.hi.y, el.phi_bottom, el.phi_top, p->point.y,
                                             m.eps(above_positive ? -1 : +1), m.eps(above_positive ? +1 : -1));
  }

  const double e0 = (el.phi_top - el.phi_bottom) / (box.hi.y - box.lo.y);
  auto inclusion = [&](int dim, const Vec3& c, double radius, bool inside_positive) {
    if (problem.mesh.dim != dim) throw Error(ErrorCode::incompatible, "level set dimension does not match the mesh");
    const double eps_in = m.eps(inside_positive ? +1 : -1);
    const double eps_out = m.eps(inside_positive ? -1 : +1);
    const double phi_c = el.phi_bottom + e0 * (c.y - box.lo.y);
    return std::make_unique<InclusionReference>(dim, c, radius, eps_in / eps_out, e0, phi_c, inside_positive);
  };
  if (const auto* c = std::get_if<LevelSet::Circle>(&shape)) return inclusion(2, c->center, c->radius, c->inside_positive);
  if (const auto* s = std::get_if<LevelSet::Sphere>(&shape)) return inclusion(3, s->center, s->radius, s->inside_positive);
  throw Error(ErrorCode::incompatible, "no closed-form reference for a " + problem.levelset.kind() + " level set");
}

std::unique_ptr<SolutionReference> reference_solve(const Problem& problem, ReferenceKind kind, double fine_h,
                                                   const SolverOptions& solver, int threads) {
  if (kind == ReferenceKind::analytic) throw Error(ErrorCode::invalid_argument, "analytic references are not solved");
  if (problem.mesh.file) throw Error(ErrorCode::incompatible, "reference solves need a structured box mesh");
  auto mesh = std::make_shared<const Mesh>(problem.mesh.build(fine_h));

  SolveOptions opts;
  opts.solver = solver;
  opts.assembly.threads = threads;
  if (kind == ReferenceKind::conforming) {
    // Every element must lie on one side, with interface nodes allowed at zero.
    const std::vector<double> d = problem.levelset.nodal_values(*mesh);
    const double tol = 1e-9 * mesh->geometry(0).size();
    for (std::size_t e = 0; e < mesh->num_elements(); ++e) {
      bool pos = false, neg = false;
      for (int n : mesh->element(e)) {
        if (n < 0) continue;
        pos = pos || d[n] > tol;
        neg = neg || d[n] < -tol;
      }
      if (pos && neg) {
        throw Error(ErrorCode::incompatible,
                    "mesh at h = " + std::to_string(fine_h) + " does not conform to the interface");
      }
    }
    opts.assembly.mode = Mode::standard_fem;
    // Nodes on the interface only create slivers; keep them negligible.
    opts.assembly.snap = 1e-12;
  } else {
    opts.assembly.mode = Mode::efem;
  }
  return std::make_unique<SolutionReference>(solve_problem(problem, std::move(mesh), opts));
}

}  // namespace efem
