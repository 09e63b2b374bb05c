#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "analytic.hpp"
#include "error.hpp"
#include "support.hpp"

using namespace efem;

namespace {

// Inclined layered problem with material 1 above y = x - 0.1.
Problem inclined(double eps1) {
  Problem p = testing_support::planar_problem(eps1, 1.0, 0.1);
  const double s = std::sqrt(0.5);
  p.levelset = LevelSet::plane({0, -0.1, 0}, {-s, s, 0});
  return p;
}

double line_distance(const SolutionReference& a, const SolutionReference& b, const Segment& seg) {
  return l2_line_error(a.solution(), [&](const Vec3& x) { return b.potential(x); }, seg);
}

}  // namespace

TEST(Planar, InterfaceValue) {
  const auto v = planar_solution(3, 0.5);
  EXPECT_DOUBLE_EQ(v.phi, 0.75);
  EXPECT_NEAR(planar_solution(3, 0.25).E.y, 1.5, 1e-15);
  EXPECT_NEAR(planar_solution(3, 0.75).E.y, 0.5, 1e-15);
  EXPECT_EQ(planar_solution(3, 0.75).region, 1);
}

TEST(Planar, UnitRatioHasSingleSlope) {
  for (double y : {0.0, 0.2, 0.5, 0.8, 1.0}) {
    const auto v = planar_solution(1, y);
    EXPECT_NEAR(v.phi, y, 1e-15);
    EXPECT_NEAR(v.E.y, 1.0, 1e-15);
  }
}

TEST(Planar, ConductorLimit) {
  const auto v = planar_solution(std::numeric_limits<double>::infinity(), 0.75);
  EXPECT_EQ(v.phi, 1.0);
  EXPECT_EQ(v.E.y, 0.0);
  EXPECT_NEAR(planar_solution(std::numeric_limits<double>::infinity(), 0.25).E.y, 2.0, 1e-15);
  EXPECT_THROW(planar_solution(3, 1.5), Error);
}

TEST(Sphere, ContinuousAtSurface) {
  for (double q : {0.2, 1.0, 3.0, 80.0}) {
    for (double c : {-1.0, -0.3, 0.0, 0.6, 1.0}) {
      const double expect = 3.0 * 0.1 * c / (2.0 + q);
      EXPECT_NEAR(sphere_region1(q, 0.1, c), expect, 1e-15);
      EXPECT_NEAR(sphere_region2(q, 0.1, 0.1, c), expect, 1e-15);
    }
  }
}

TEST(Sphere, UnitRatioIsUniform) {
  for (double r : {0.05, 0.3, 2.0}) EXPECT_NEAR(sphere_region2(1.0, 0.1, r, 0.4), r * 0.4, 1e-15);
}

TEST(Sphere, InsideValue) {
  EXPECT_NEAR(sphere_solution(3, 0.1, 0.05, 1.0), 0.03, 1e-15);
  EXPECT_THROW(sphere_region2(3, 0.1, 0.0, 1.0), Error);
}

TEST(Inclusion, JumpConditions) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI), v(-1.0, 1.0);
  for (int dim : {2, 3}) {
    const double q = 3.0, radius = 0.2;
    const Vec3 c{0.4, 0.5, dim == 3 ? 0.45 : 0.0};
    InclusionReference ref(dim, c, radius, q, 1.3, 0.65, true);
    for (int k = 0; k < 50; ++k) {
      Vec3 n;
      if (dim == 2) {
        const double a = u(rng);
        n = {std::cos(a), std::sin(a), 0};
      } else {
        n = testing_support::random_unit(rng, 3);
      }
      const Vec3 x = c + n * radius;
      const Vec3 ein = ref.field(x, +1), eout = ref.field(x, -1);
      EXPECT_NEAR(dot(ref.normal(x), n), -1.0, 1e-12);  // toward the inside (positive)
      EXPECT_NEAR(q * dot(ein, n), dot(eout, n), 1e-12);
      const Vec3 t_in = ein - n * dot(ein, n), t_out = eout - n * dot(eout, n);
      EXPECT_LT(norm(t_in - t_out), 1e-12);
      EXPECT_NEAR(ref.potential(x - n * 1e-13), ref.potential(x + n * 1e-13), 1e-12);
    }
  }
}

TEST(Planar, ReferenceJumpConditions) {
  PlanarReference ref(0, 1, 0, 1, 0.5, 1.0, 3.0);
  const Vec3 x{0.3, 0.5, 0};
  EXPECT_NEAR(3.0 * ref.field(x, +1).y, ref.field(x, -1).y, 1e-12);
  EXPECT_NEAR(ref.potential(x), 0.75, 1e-15);
  const auto t = ref.crossings({{0.3, 0, 0}, {0.3, 1, 0}});
  ASSERT_EQ(t.size(), 1u);
  EXPECT_NEAR(t[0], 0.5, 1e-15);
}

// Fourth-order central differences; the second-order stencil's own truncation error
// near the surface is larger than the bound.
TEST(Sphere, SatisfiesLaplace) {
  std::mt19937_64 rng(31);
  const Vec3 c{0.5, 0.5, 0.5};
  const double radius = 0.1, h = 1e-3, e0 = 1.0;
  const double scale = e0 * 1.0;  // potential drop across the unit box
  InclusionReference ref(3, c, radius, 3.0, e0, 0.5, true);
  int done = 0;
  while (done < 200) {
    const Vec3 x = c + testing_support::random_point(rng, 3) * 0.4;
    if (std::abs(norm(x - c) - radius) < 5 * h) continue;
    ++done;
    double lap = -3.0 * 30.0 * ref.potential(x);
    for (int a = 0; a < 3; ++a) {
      Vec3 d;
      d[static_cast<std::size_t>(a)] = h;
      lap += 16.0 * (ref.potential(x + d) + ref.potential(x - d)) - (ref.potential(x + d * 2.0) + ref.potential(x - d * 2.0));
    }
    lap /= 12.0 * h * h;
    EXPECT_LT(std::abs(lap), 1e-4 * scale) << "r = " << norm(x - c);
  }
}

TEST(AnalyticReference, MatchesLayeredProblem) {
  const auto ref = analytic_reference(testing_support::planar_problem(3, 1, 0.2));
  EXPECT_NEAR(ref->potential({0.2, 0.5, 0}), 0.75, 1e-15);
  EXPECT_NEAR(ref->field({0.2, 0.5, 0}, -1).y, 1.5, 1e-15);
}

TEST(Reference, ConformingUnitRatioIsExact) {
  const auto ref = reference_solve(inclined(1.0), ReferenceKind::conforming, 0.1);
  double err = 0.0;
  const auto& sol = ref->solution();
  for (std::size_t i = 0; i < sol.mesh().num_nodes(); ++i) err = std::max(err, std::abs(sol.nodal()[i] - sol.mesh().node(i).y));
  EXPECT_LT(err, 1e-8);
}

TEST(Reference, NonConformingMeshRejected) {
  try {
    reference_solve(inclined(3.0), ReferenceKind::conforming, 0.03);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::incompatible);
  }
}

TEST(Reference, ConformingTwoLevelsAgree) {
  SolverOptions s;
  s.tol = 1e-11;
  const auto a = reference_solve(inclined(3.0), ReferenceKind::conforming, 0.01, s);
  const auto b = reference_solve(inclined(3.0), ReferenceKind::conforming, 0.005, s);
  for (const Segment& seg : {Segment{{0, 0, 0}, {0, 1, 0}}, Segment{{0, 0.7, 0}, {1, 0.7, 0}}}) {
    EXPECT_LT(line_distance(*a, *b, seg), 1e-4);
  }
}

TEST(Reference, CylinderSelfTwoLevelsAgree) {
  Problem p = testing_support::planar_problem(3, 1, 0.01);
  p.levelset = LevelSet::circle({0.25, 0.75, 0}, 0.2, true);
  SolverOptions s;
  s.tol = 1e-10;
  const auto a = reference_solve(p, ReferenceKind::self, 0.005, s, 4);
  const auto b = reference_solve(p, ReferenceKind::self, 0.0025, s, 4);
  EXPECT_LT(line_distance(*a, *b, {{0.25, 0, 0}, {0.25, 1, 0}}), 5e-4);
}
