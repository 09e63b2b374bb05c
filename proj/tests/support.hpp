#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "analytic.hpp"
#include "assembly.hpp"
#include "mesh.hpp"
#include "problem.hpp"

namespace testing_support {

using efem::Vec3;

// Plain Gaussian elimination, kept separate from the library LU so it can serve as an oracle.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
    }
    if (a[p][k] == 0.0) throw std::runtime_error("singular test matrix");
    std::swap(a[p], a[k]);
    std::swap(b[p], b[k]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

// Layered slab between electrodes at y=0 (0 V) and y=1 (1 V), sides insulated.
inline efem::Problem planar_problem(double eps1, double eps2, double h, double interface_y = 0.5) {
  efem::Problem p;
  p.mesh.dim = 2;
  p.mesh.h = h;
  p.levelset = efem::LevelSet::plane({0.0, interface_y, 0.0}, {0.0, 1.0, 0.0});
  p.materials = efem::MaterialPair(eps1, eps2);
  p.bcs["bottom"] = efem::BoundaryCondition::dirichlet(0.0);
  p.bcs["top"] = efem::BoundaryCondition::dirichlet(1.0);
  p.bcs["left"] = efem::BoundaryCondition::neumann();
  p.bcs["right"] = efem::BoundaryCondition::neumann();
  return p;
}

inline efem::SolveResult solve(const efem::Problem& p, efem::Mode mode, bool direct = false, double tol = 1e-10) {
  efem::SolveOptions o;
  o.assembly.mode = mode;
  o.solver.tol = tol;
  o.direct = direct;
  auto mesh = std::make_shared<const efem::Mesh>(p.mesh.build());
  return efem::solve_problem(p, mesh, o);
}

inline Vec3 random_point(std::mt19937_64& rng, int dim) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {u(rng), u(rng), dim == 3 ? u(rng) : 0.0};
}

inline Vec3 random_unit(std::mt19937_64& rng, int dim) {
  for (;;) {
    const Vec3 v = random_point(rng, dim);
    const double n = efem::norm(v);
    if (n > 0.1 && n < 1.0) return v * (1.0 / n);
  }
}

// Random positively oriented simplex whose measure is not tiny relative to its size.
inline std::vector<Vec3> random_simplex(std::mt19937_64& rng, int dim) {
  for (;;) {
    std::vector<Vec3> v(static_cast<std::size_t>(dim + 1));
    for (auto& p : v) p = random_point(rng, dim);
    double m = efem::signed_measure(dim, v.data());
    if (m < 0.0) {
      std::swap(v[0], v[1]);
      m = -m;
    }
    if (m > (dim == 2 ? 0.05 : 0.01)) return v;
  }
}

inline double linear_interp(const efem::ElementGeometry& g, const std::vector<double>& d, const Vec3& x) {
  const auto l = g.barycentric(x);
  double s = 0.0;
  for (int i = 0; i < g.num_nodes(); ++i) s += l[static_cast<std::size_t>(i)] * d[static_cast<std::size_t>(i)];
  return s;
}

}  // namespace testing_support
