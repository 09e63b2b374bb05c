#include <gtest/gtest.h>

#include <random>

#include "assembly.hpp"
#include "enrichment.hpp"
#include "error.hpp"
#include "support.hpp"

using namespace efem;
using testing_support::gauss_solve;

namespace {

const std::vector<Vec3> unit_tri = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
const std::vector<double> tri_d = {-1, 1, 1};

struct CutCase {
  ElementGeometry g;
  CutDecomposition dec;
};

CutCase make_cut(const std::vector<Vec3>& c, const std::vector<double>& d) {
  const int dim = static_cast<int>(c.size()) - 1;
  return {make_geometry(dim, c), split_simplex(dim, c, d)};
}

// Gradient of the hat function on one child, from a linear fit through its vertex values.
Vec3 fitted_gradient(const CutCase& cc, const Child& ch) {
  const int dim = cc.dec.dim;
  const auto d = std::span<const double>(cc.dec.d.data(), static_cast<std::size_t>(dim + 1));
  const Vec3& p0 = cc.dec.points[static_cast<std::size_t>(ch.vertices[0])];
  const double f0 = hat_eval(cc.g, d, p0);
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  for (int k = 1; k <= dim; ++k) {
    const Vec3 dx = cc.dec.points[static_cast<std::size_t>(ch.vertices[static_cast<std::size_t>(k)])] - p0;
    a.push_back(dim == 2 ? std::vector<double>{dx.x, dx.y} : std::vector<double>{dx.x, dx.y, dx.z});
    b.push_back(hat_eval(cc.g, d, p0 + dx) - f0);
  }
  const auto x = gauss_solve(a, b);
  return {x[0], x[1], dim == 3 ? x[2] : 0.0};
}

// Full (n+1)x(n+1) enriched system with rows: K phi + B phi* and (B - D)^T phi + (Kenr - Denr) phi*.
std::vector<std::vector<double>> full_block(const ElementSystem& s, double shift) {
  const int n = s.n;
  std::vector<std::vector<double>> m(static_cast<std::size_t>(n + 1), std::vector<double>(static_cast<std::size_t>(n + 1)));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m[i][j] = s.K[i][j] + (i == j ? shift : 0.0);
    m[i][n] = s.B[i];
    m[n][i] = s.B[i] - s.D[i];
  }
  m[n][n] = s.Kenr - s.Denr;
  return m;
}

ElementSystem system_with_d(const CutCase& cc, const MaterialPair& mat) {
  ElementSystem s = element_matrices(cc.g, mat, cc.dec);
  add_displacement_terms(cc.g, mat, cc.dec, cut_exterior_faces(cc.dec), s);
  return s;
}

}  // namespace

TEST(Hat, ZeroAtNodes) {
  std::mt19937_64 rng(3);
  for (int dim : {2, 3}) {
    for (int t = 0; t < 100; ++t) {
      const auto c = testing_support::random_simplex(rng, dim);
      std::vector<double> d;
      for (int i = 0; i <= dim; ++i) d.push_back(std::uniform_real_distribution<double>(-1, 1)(rng));
      const auto g = make_geometry(dim, c);
      for (const auto& x : c) EXPECT_LT(std::abs(hat_eval(g, d, x)), 1e-12);
    }
  }
}

TEST(Hat, VanishesOnUncutElement) {
  const auto g = make_geometry(2, unit_tri);
  const std::vector<double> d = {0.2, 0.5, 1.0};
  for (const Vec3& x : {Vec3{0.2, 0.2, 0}, Vec3{0.5, 0.1, 0}, Vec3{0.01, 0.9, 0}}) {
    EXPECT_NEAR(hat_eval(g, d, x), 0.0, 1e-15);
  }
}

TEST(Hat, PeakAtVirtualNode) {
  const auto g = make_geometry(2, unit_tri);
  EXPECT_DOUBLE_EQ(hat_eval(g, tri_d, {0.5, 0, 0}), 1.0);
}

// One-sided linear representations agree on the interface.
TEST(Hat, ContinuousAcrossInterface) {
  std::mt19937_64 rng(11);
  for (int dim : {2, 3}) {
    int done = 0;
    while (done < 200) {
      const auto c = testing_support::random_simplex(rng, dim);
      const Vec3 n = testing_support::random_unit(rng, dim);
      std::vector<double> d;
      bool pos = false, neg = false;
      for (const auto& x : c) {
        d.push_back(dot(x - c[0] * 0.3 - c[1] * 0.7, n));
        (d.back() > 0 ? pos : neg) = true;
      }
      if (!(pos && neg)) continue;
      ++done;
      const auto cc = make_cut(c, d);
      const auto basis = make_enrichment_basis(cc.g, d);
      // reference point per side: a node of that sign, where the hat is zero
      int ip = -1, in = -1;
      for (int i = 0; i <= dim; ++i) (d[static_cast<std::size_t>(i)] > 0 ? ip : in) = i;
      const std::size_t first = cc.dec.points.size() - cc.dec.virtual_edges.size();
      for (std::size_t k = first; k < cc.dec.points.size(); ++k) {
        const Vec3& xi = cc.dec.points[k];
        const double from_pos = dot(basis.gradient(+1), xi - c[static_cast<std::size_t>(ip)]);
        const double from_neg = dot(basis.gradient(-1), xi - c[static_cast<std::size_t>(in)]);
        EXPECT_NEAR(from_pos, from_neg, 1e-12);
        EXPECT_NEAR(from_pos, hat_eval(cc.g, d, xi), 1e-12);
      }
    }
  }
}

TEST(ElementMatrices, UnitTriangleStiffness) {
  const auto s = standard_element(make_geometry(2, unit_tri), 1.0);
  const double expect[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(s.K[i][j], expect[i][j], 1e-15);
  }
}

TEST(ElementMatrices, EqualPermittivityCutMatchesUncut) {
  const auto cc = make_cut(unit_tri, tri_d);
  const auto cut = element_matrices(cc.g, MaterialPair(2.5, 2.5), cc.dec);
  const auto ref = standard_element(cc.g, 2.5);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(cut.K[i][j], ref.K[i][j], 1e-14);
  }
}

TEST(ElementMatrices, EnrichedBlocksMatchQuadrature) {
  const MaterialPair mat(3.0, 1.0);
  for (const auto& [c, d] : {std::pair{unit_tri, tri_d},
                             std::pair{std::vector<Vec3>{{0.1, 0, 0}, {0.9, 0.2, 0}, {0.3, 0.7, 0}},
                                       std::vector<double>{0.4, -0.3, 0.25}},
                             std::pair{std::vector<Vec3>{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}},
                                       std::vector<double>{-1, -0.5, 1, 0.7}}}) {
    const auto cc = make_cut(c, d);
    const auto s = element_matrices(cc.g, mat, cc.dec);
    const int n = cc.dec.dim + 1;
    double kenr = 0.0;
    std::array<double, 4> b{};
    for (const auto& ch : cc.dec.children) {
      const Vec3 gb = fitted_gradient(cc, ch);
      // symmetric second-order rule, weights sum to the child measure
      const int npts = cc.dec.dim == 2 ? 3 : 4;
      for (int q = 0; q < npts; ++q) {
        const double w = ch.measure / npts * mat.eps(ch.sign);
        kenr += w * dot(gb, gb);
        for (int i = 0; i < n; ++i) b[static_cast<std::size_t>(i)] += w * dot(cc.g.grads[static_cast<std::size_t>(i)], gb);
      }
    }
    EXPECT_NEAR(s.Kenr, kenr, 1e-12 * std::max(1.0, kenr));
    for (int i = 0; i < n; ++i) EXPECT_NEAR(s.B[i], b[static_cast<std::size_t>(i)], 1e-12);
  }
}

TEST(Displacement, UncutElementHasNone) {
  // with no crossed face nothing is added
  const auto g = make_geometry(2, unit_tri);
  ElementSystem s = standard_element(g, 1.0);
  CutDecomposition dec;
  dec.dim = 2;
  add_displacement_terms(g, MaterialPair(3, 1), dec, {}, s);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(s.D[i], 0.0);
  EXPECT_EQ(s.Denr, 0.0);
}

TEST(Displacement, MatchesDenseTrapezoid) {
  const MaterialPair mat(3.0, 1.0);
  for (const auto& d : {tri_d, std::vector<double>{0.4, -0.3, 0.25}}) {
    const auto cc = make_cut(unit_tri, d);
    const auto s = system_with_d(cc, mat);
    Vec3 gbar[2];
    for (const auto& ch : cc.dec.children) gbar[ch.sign > 0 ? 0 : 1] = fitted_gradient(cc, ch);

    std::array<double, 3> D{};
    double denr = 0.0;
    for (int f = 0; f < 3; ++f) {
      const auto ln = local_face_nodes(2, f);
      const Vec3 a = unit_tri[static_cast<std::size_t>(ln[0])], b = unit_tri[static_cast<std::size_t>(ln[1])];
      const Vec3 n = cc.g.face_normal(f);
      const double da = d[static_cast<std::size_t>(ln[0])], db = d[static_cast<std::size_t>(ln[1])];
      std::vector<double> cuts = {0.0, 1.0};
      if (da * db < 0) cuts.insert(cuts.begin() + 1, da / (da - db));
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const int side = (da + (db - da) * 0.5 * (cuts[k] + cuts[k + 1])) > 0 ? 1 : -1;
        const double eps = mat.eps(side);
        const int m = 50;
        const double len = norm(b - a) * (cuts[k + 1] - cuts[k]);
        for (int q = 0; q < m; ++q) {
          const double t = cuts[k] + (cuts[k + 1] - cuts[k]) * q / (m - 1);
          const double w = len / (m - 1) * (q == 0 || q == m - 1 ? 0.5 : 1.0);
          const double nbar = hat_eval(cc.g, d, a + (b - a) * t);
          for (int i = 0; i < 3; ++i) D[static_cast<std::size_t>(i)] += w * nbar * eps * dot(n, cc.g.grads[static_cast<std::size_t>(i)]);
          denr += w * nbar * eps * dot(n, gbar[side > 0 ? 0 : 1]);
        }
      }
    }
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(s.D[i], D[static_cast<std::size_t>(i)], 1e-10);
    EXPECT_NEAR(s.Denr, denr, 1e-10);
  }
}

TEST(Displacement, SumsToZeroPerElement) {
  for (int dim : {2, 3}) {
    const Mesh m = dim == 2 ? generate_structured(2, 9, 9) : generate_structured(3, 5, 5, 5);
    const auto ls = dim == 2 ? LevelSet::circle({0.45, 0.5, 0}, 0.31) : LevelSet::sphere({0.45, 0.5, 0.52}, 0.31);
    const auto cls = classify_elements(m, ls);
    AssemblyOptions o;
    int checked = 0;
    for (std::size_t e = 0; e < m.num_elements(); ++e) {
      if (cls.state[e] != ElementState::cut) continue;
      std::vector<Vec3> c;
      std::vector<double> d;
      for (int v : m.element(e)) {
        c.push_back(m.node(static_cast<std::size_t>(v)));
        d.push_back(cls.nodal_d[static_cast<std::size_t>(v)]);
      }
      const auto dec = split_simplex(dim, c, d);
      const auto s = enriched_element_system(m, e, dec, MaterialPair(3, 1), o);
      double sum = 0.0, mag = 0.0;
      for (int i = 0; i <= dim; ++i) {
        sum += s.D[i];
        mag += std::abs(s.D[i]);
      }
      EXPECT_LE(std::abs(sum), 1e-12 * mag) << "element " << e;
      ++checked;
    }
    EXPECT_GT(checked, 10);
  }
}

TEST(Condense, NoDisplacementGivesSymmetricSchur) {
  const auto cc = make_cut(unit_tri, tri_d);
  const auto s = element_matrices(cc.g, MaterialPair(3, 1), cc.dec);
  const auto c = condense(s);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      EXPECT_NEAR(c.matrix[i][j], s.K[i][j] - s.B[i] * s.B[j] / s.Kenr, 1e-14);
      EXPECT_NEAR(c.matrix[i][j], c.matrix[j][i], 1e-14);
    }
  }
}

TEST(Condense, UncutIsIdentityMap) {
  const auto s = standard_element(make_geometry(2, unit_tri), 2.0);
  const auto c = condense(s);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(c.recovery[i], 0.0);
    for (int j = 0; j < 3; ++j) EXPECT_EQ(c.matrix[i][j], s.K[i][j]);
  }
}

// Solving the full enriched block directly must give the same nodal values and phi*.
TEST(Condense, MatchesFullBlockSolve) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  const std::vector<Vec3> tet = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const std::vector<std::pair<std::vector<Vec3>, std::vector<double>>> cases = {
      {unit_tri, tri_d}, {unit_tri, {0.4, -0.3, 0.25}}, {tet, {-1, 1, 1, 1}}, {tet, {-1, -0.5, 1, 0.7}}};
  for (const auto& [c, d] : cases) {
    const auto cc = make_cut(c, d);
    for (bool with_d : {false, true}) {
      const auto s = with_d ? system_with_d(cc, MaterialPair(3, 1)) : element_matrices(cc.g, MaterialPair(3, 1), cc.dec);
      const auto cond = condense(s);
      const double shift = 0.7;  // removes the constant null space
      std::vector<double> f(static_cast<std::size_t>(s.n));
      for (auto& v : f) v = u(rng);
      auto rhs = f;
      rhs.push_back(0.0);
      const auto full = gauss_solve(full_block(s, shift), rhs);
      std::vector<std::vector<double>> kc(static_cast<std::size_t>(s.n), std::vector<double>(static_cast<std::size_t>(s.n)));
      for (int i = 0; i < s.n; ++i) {
        for (int j = 0; j < s.n; ++j) kc[i][j] = cond.matrix[i][j] + (i == j ? shift : 0.0);
      }
      const auto phi = gauss_solve(kc, f);
      double star = 0.0;
      for (int i = 0; i < s.n; ++i) {
        EXPECT_NEAR(phi[static_cast<std::size_t>(i)], full[static_cast<std::size_t>(i)], 1e-10);
        star += cond.recovery[i] * phi[static_cast<std::size_t>(i)];
      }
      EXPECT_NEAR(star, full[static_cast<std::size_t>(s.n)], 1e-10);
    }
  }
}

TEST(Condense, SingularPivotRaises) {
  ElementSystem s = standard_element(make_geometry(2, unit_tri), 1.0);
  s.cut = true;
  s.Kenr = 1.0;
  s.Denr = 1.0;
  try {
    condense(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::singular_enrichment);
  }
}

TEST(Assembly, GraphIndependentOfModeAndInterface) {
  for (int dim : {2, 3}) {
    const Mesh m = dim == 2 ? generate_structured(2, 8, 7) : generate_structured(3, 4, 4, 3);
    const CsrMatrix pattern = build_pattern(m);
    BoundaryMap bcs{{"bottom", BoundaryCondition::dirichlet(0)}, {"top", BoundaryCondition::dirichlet(1)}};
    const std::vector<LevelSet> sets = {
        LevelSet::plane({0, 0.5, 0}, {0, 1, 0}), LevelSet::plane({0.3, 0.37, 0.4}, {0.6, 0.8, 0}),
        dim == 2 ? LevelSet::circle({0.5, 0.5, 0}, 0.27) : LevelSet::sphere({0.5, 0.5, 0.5}, 0.27)};
    for (const auto& ls : sets) {
      for (Mode mode : {Mode::standard_fem, Mode::efem_no_d, Mode::efem}) {
        AssemblyOptions o;
        o.mode = mode;
        const auto sys = assemble_global(m, ls, MaterialPair(3, 1), bcs, o);
        EXPECT_TRUE(sys.matrix.same_pattern(pattern)) << mode_name(mode);
      }
    }
  }
}

TEST(Assembly, UnitRatioWithDisplacementEqualsStandard) {
  const Mesh m = generate_structured(2, 7, 7);
  BoundaryMap bcs{{"bottom", BoundaryCondition::dirichlet(0)}, {"top", BoundaryCondition::dirichlet(1)}};
  const auto ls = LevelSet::plane({0.2, 0.43, 0}, {0.28, 0.96, 0});
  AssemblyOptions o;
  o.mode = Mode::efem;
  const auto a = assemble_global(m, ls, MaterialPair(2, 2), bcs, o);
  o.mode = Mode::standard_fem;
  const auto b = assemble_global(m, ls, MaterialPair(2, 2), bcs, o);
  ASSERT_GT(a.classification.num_cut, 0u);
  for (std::size_t k = 0; k < a.matrix.values().size(); ++k) {
    EXPECT_NEAR(a.matrix.values()[k], b.matrix.values()[k], 1e-12);
  }
}

TEST(Assembly, DirichletRowsAreIdentity) {
  const Mesh m = generate_structured(2, 4, 4);
  BoundaryMap bcs{{"bottom", BoundaryCondition::dirichlet(0.25)}, {"top", BoundaryCondition::dirichlet(1)}};
  const auto sys = assemble_global(m, LevelSet::plane({0, 0.5, 0}, {0, 1, 0}), MaterialPair(3, 1), bcs);
  ASSERT_EQ(sys.dirichlet_nodes.size(), 10u);
  for (int i : sys.dirichlet_nodes) {
    for (int k = sys.matrix.row_ptr()[i]; k < sys.matrix.row_ptr()[i + 1]; ++k) {
      EXPECT_EQ(sys.matrix.values()[k], sys.matrix.cols()[k] == i ? 1.0 : 0.0);
    }
    EXPECT_EQ(sys.rhs[static_cast<std::size_t>(i)], m.node(static_cast<std::size_t>(i)).y == 0 ? 0.25 : 1.0);
  }
  // constrained columns are eliminated from free rows
  for (int i = 0; i < sys.matrix.size(); ++i) {
    if (std::find(sys.dirichlet_nodes.begin(), sys.dirichlet_nodes.end(), i) != sys.dirichlet_nodes.end()) continue;
    for (int j : sys.dirichlet_nodes) EXPECT_EQ(sys.matrix.at(i, j), 0.0);
  }
}

TEST(Assembly, NoDirichletIsSingular) {
  const Mesh m = generate_structured(2, 3, 3);
  try {
    assemble_global(m, LevelSet::plane({0, 0.5, 0}, {0, 1, 0}), MaterialPair(3, 1), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::singular_system);
  }
}

// Uniform permittivity with linear boundary data: the linear field is reproduced
// on cut meshes by the standard and the full enriched discretization.
TEST(Assembly, PatchTest) {
  struct Setup {
    int dim;
    std::string lo, hi;
    int axis;
  };
  for (const Setup& st : {Setup{2, "bottom", "top", 1}, Setup{2, "left", "right", 0}, Setup{3, "front", "back", 2}}) {
    efem::Problem p;
    p.mesh.dim = st.dim;
    p.mesh.box = Box{{0, 0, 0}, {1, 1, 1}};
    p.mesh.counts = st.dim == 2 ? std::array<int, 3>{7, 6, 1} : std::array<int, 3>{4, 5, 3};
    p.levelset = LevelSet::plane({0.3, 0.41, 0.47}, Vec3{0.36, 0.48, 0.8});
    p.materials = MaterialPair(2, 2);
    p.bcs[st.lo] = BoundaryCondition::dirichlet(-1.0);
    p.bcs[st.hi] = BoundaryCondition::dirichlet(2.0);
    for (Mode mode : {Mode::standard_fem, Mode::efem}) {
      const auto r = testing_support::solve(p, mode, true);
      ASSERT_GT(r.cut_elements, 0u);
      double err = 0.0;
      const auto& mesh = r.field->mesh();
      for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        err = std::max(err, std::abs(r.field->nodal()[i] - (-1.0 + 3.0 * mesh.node(i)[static_cast<std::size_t>(st.axis)])));
      }
      EXPECT_LT(err, 1e-8) << mode_name(mode) << " dim " << st.dim;
      for (double s : r.field->phi_star_values()) EXPECT_LT(std::abs(s), 1e-8);
    }
  }
}

// Without displacement terms the enrichment is driven even for equal permittivities.
TEST(Assembly, NoDisplacementBreaksUniformPatch) {
  auto p = testing_support::planar_problem(1.0, 1.0, 0.2);
  const auto r = testing_support::solve(p, Mode::efem_no_d, true);
  double err = 0.0;
  for (std::size_t i = 0; i < r.field->mesh().num_nodes(); ++i) {
    err = std::max(err, std::abs(r.field->nodal()[i] - r.field->mesh().node(i).y));
  }
  EXPECT_GT(err, 1e-3);
}
