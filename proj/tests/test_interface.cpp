#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "cut.hpp"
#include "error.hpp"
#include "levelset.hpp"
#include "support.hpp"

using namespace efem;
using testing_support::linear_interp;

namespace {

const std::vector<Vec3> unit_tri = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};

CutDecomposition split(const std::vector<Vec3>& c, const std::vector<double>& d) {
  return split_simplex(static_cast<int>(c.size()) - 1, c, d);
}

double face_measure(int dim, const std::vector<Vec3>& c, int f) {
  const auto ln = local_face_nodes(dim, f);
  const Vec3 p[3] = {c[static_cast<std::size_t>(ln[0])], c[static_cast<std::size_t>(ln[1])],
                     dim == 3 ? c[static_cast<std::size_t>(ln[2])] : Vec3{}};
  return simplex_measure(dim - 1, p);
}

Vec3 child_centroid(const CutDecomposition& dec, const Child& ch) {
  Vec3 c;
  for (int k = 0; k <= dec.dim; ++k) c += dec.points[static_cast<std::size_t>(ch.vertices[static_cast<std::size_t>(k)])];
  return c * (1.0 / (dec.dim + 1));
}

}  // namespace

TEST(LevelSet, PlaneDistance) {
  const auto ls = LevelSet::plane({0, 0.5, 0}, {0, 1, 0});
  EXPECT_DOUBLE_EQ(ls.evaluate({0.3, 0.8, 0}), 0.3);
}

TEST(LevelSet, CircleCenterSignFollowsConvention) {
  EXPECT_NEAR(LevelSet::circle({0.25, 0.75, 0}, 0.2).evaluate({0.25, 0.75, 0}), -0.2, 1e-15);
  EXPECT_NEAR(LevelSet::circle({0.25, 0.75, 0}, 0.2, true).evaluate({0.25, 0.75, 0}), 0.2, 1e-15);
}

TEST(LevelSet, SphereDistance) {
  EXPECT_NEAR(LevelSet::sphere({0.5, 0.5, 0.5}, 0.1).evaluate({0.5, 0.5, 0.65}), 0.05, 1e-15);
}

TEST(LevelSet, InvalidShapesRejected) {
  EXPECT_THROW(LevelSet::circle({0, 0, 0}, 0.0), Error);
  EXPECT_THROW(LevelSet::plane({0, 0, 0}, {0, 0, 0}), Error);
  const Mesh m = generate_structured(2, 1, 1);
  EXPECT_THROW(LevelSet::nodal({1.0, 2.0}).nodal_values(m), Error);
}

TEST(Classify, PlaneStraddlingElementsAreCut) {
  const Mesh m = generate_structured(2, 5, 5);
  const auto cls = classify_elements(m, LevelSet::plane({0, 0.5, 0}, {0, 1, 0}));
  std::size_t expected = 0;
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    bool above = false, below = false;
    for (int v : m.element(e)) (m.node(static_cast<std::size_t>(v)).y > 0.5 ? above : below) = true;
    const bool cut = above && below;
    expected += cut;
    EXPECT_EQ(cls.state[e] == ElementState::cut, cut) << "element " << e;
    if (!cut) EXPECT_EQ(cls.state[e], above ? ElementState::positive : ElementState::negative);
  }
  EXPECT_EQ(cls.num_cut, expected);
  EXPECT_EQ(expected, 10u);
}

TEST(Classify, ElementsTouchingOnlyAtNodesStayUncut) {
  const Mesh m = generate_structured(2, 5, 5);
  const auto cls = classify_elements(m, LevelSet::plane({0, 0.4, 0}, {0, 1, 0}));
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    double ymin = 1.0;
    for (int v : m.element(e)) ymin = std::min(ymin, m.node(static_cast<std::size_t>(v)).y);
    if (ymin > 0.39) EXPECT_EQ(cls.state[e], ElementState::positive) << "element " << e;
  }
}

TEST(Classify, AllPositiveHasNoCuts) {
  const Mesh m = generate_structured(2, 4, 4);
  const auto cls = classify_elements(m, LevelSet::plane({0, -1, 0}, {0, 1, 0}));
  EXPECT_EQ(cls.num_cut, 0u);
  for (auto s : cls.state) EXPECT_EQ(s, ElementState::positive);
}

TEST(Classify, ZeroSnapsPositive) {
  const Mesh m = generate_structured(2, 1, 1);
  // element 0 holds nodes 0, 1, 3
  const auto cls = classify_elements(m, LevelSet::nodal({0.0, 1.0, 1.0, 1.0}), 1e-6);
  EXPECT_EQ(cls.state[0], ElementState::positive);
  EXPECT_GT(cls.nodal_d[0], 0.0);
  EXPECT_EQ(snap_distance(0.0, 1e-6), 1e-6);
  EXPECT_EQ(snap_distance(-1e-9, 1e-6), -1e-6);
  EXPECT_EQ(snap_distance(0.5, 1e-6), 0.5);
}

TEST(Split, TriangleExample) {
  const auto dec = split(unit_tri, {-1, 1, 1});
  ASSERT_EQ(dec.children.size(), 3u);
  const Vec3 a = dec.points[static_cast<std::size_t>(dec.virtual_index(0, 1))];
  const Vec3 b = dec.points[static_cast<std::size_t>(dec.virtual_index(0, 2))];
  EXPECT_NEAR(norm(a - Vec3{0.5, 0, 0}), 0.0, 1e-15);
  EXPECT_NEAR(norm(b - Vec3{0, 0.5, 0}), 0.0, 1e-15);
  EXPECT_NEAR(dec.measure(-1), 0.125, 1e-15);
  EXPECT_NEAR(dec.measure(+1), 0.375, 1e-15);
  int pos = 0;
  for (const auto& c : dec.children) pos += c.sign > 0;
  EXPECT_EQ(pos, 2);
}

TEST(Split, SignFlipKeepsGeometry) {
  const auto a = split(unit_tri, {-1, 1, 1});
  const auto b = split(unit_tri, {1, -1, -1});
  ASSERT_EQ(a.children.size(), b.children.size());
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) EXPECT_EQ(a.points[i], b.points[i]);
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    EXPECT_EQ(a.children[i].vertices, b.children[i].vertices);
    EXPECT_EQ(a.children[i].sign, -b.children[i].sign);
    EXPECT_DOUBLE_EQ(a.children[i].measure, b.children[i].measure);
  }
}

TEST(Split, TetrahedronOneNodeSplit) {
  const std::vector<Vec3> tet = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const auto dec = split(tet, {-1, 1, 1, 1});
  ASSERT_EQ(dec.children.size(), 4u);
  double v = 0.0;
  for (const auto& c : dec.children) v += c.measure;
  EXPECT_NEAR(v, 1.0 / 6.0, 1e-12);
  EXPECT_NEAR(dec.measure(-1), 1.0 / 48.0, 1e-15);
}

TEST(Split, TetrahedronTwoNodeSplit) {
  const std::vector<Vec3> tet = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const auto dec = split(tet, {-1, -1, 1, 1});
  EXPECT_EQ(dec.children.size(), 6u);
  EXPECT_NEAR(dec.measure(1) + dec.measure(-1), 1.0 / 6.0, 1e-12);
}

TEST(CutFaces, TriangleBottomEdge) {
  const auto dec = split(unit_tri, {-1, 1, 1});
  const auto faces = cut_exterior_faces(dec);
  ASSERT_EQ(faces.size(), 3u);
  for (const auto& f : faces) {
    if (f.local_face == 2) {  // edge (0,0)-(1,0)
      ASSERT_TRUE(f.crossed);
      ASSERT_EQ(f.pieces.size(), 2u);
      for (const auto& p : f.pieces) {
        EXPECT_NEAR(p.measure, 0.5, 1e-15);
        EXPECT_EQ(p.sign, p.centroid.x < 0.5 ? -1 : 1);
      }
    } else if (f.local_face == 0) {  // edge (1,0)-(0,1), both ends positive
      EXPECT_FALSE(f.crossed);
      ASSERT_EQ(f.pieces.size(), 1u);
      EXPECT_NEAR(f.pieces[0].measure, std::sqrt(2.0), 1e-15);
      EXPECT_EQ(f.pieces[0].sign, 1);
    }
  }
}

TEST(CutFaces, TetFaceAreasConserved) {
  const std::vector<Vec3> tet = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (const std::vector<double>& d : {std::vector<double>{-1, 1, 1, 1}, std::vector<double>{-1, 2, -0.5, 1}}) {
    const auto dec = split(tet, d);
    for (const auto& f : cut_exterior_faces(dec)) {
      double a = 0.0;
      for (const auto& p : f.pieces) a += p.measure;
      EXPECT_NEAR(a, face_measure(3, tet, f.local_face), 1e-12);
    }
  }
}

// Randomized simplices cut by random planes: measures, virtual nodes and signs.
TEST(Split, RandomCutsConserveMeasure) {
  std::mt19937_64 rng(2024);
  for (int dim : {2, 3}) {
    int done = 0;
    while (done < 1000) {
      const auto c = testing_support::random_simplex(rng, dim);
      const Vec3 n = testing_support::random_unit(rng, dim);
      const Vec3 p = testing_support::random_point(rng, dim) * 0.5;
      std::vector<double> d;
      bool pos = false, neg = false;
      for (const auto& x : c) {
        d.push_back(dot(x - p, n));
        (d.back() > 0 ? pos : neg) = true;
      }
      if (!(pos && neg)) continue;
      ++done;
      const auto dec = split(c, d);
      const auto g = make_geometry(dim, c);
      if (dec.degenerate) continue;
      double total = 0.0;
      for (const auto& ch : dec.children) {
        total += ch.measure;
        const double dc = linear_interp(g, d, child_centroid(dec, ch));
        EXPECT_EQ(dc > 0 ? 1 : -1, ch.sign);
        for (int k = 0; k <= dim; ++k) {
          const double dv = linear_interp(g, d, dec.points[static_cast<std::size_t>(ch.vertices[static_cast<std::size_t>(k)])]);
          EXPECT_TRUE(dv * ch.sign >= -1e-12 * 2.0) << dv;
        }
      }
      EXPECT_NEAR(total / g.measure, 1.0, 1e-10);
      double dmax = 0.0;
      for (double v : d) dmax = std::max(dmax, std::abs(v));
      const std::size_t first = dec.points.size() - dec.virtual_edges.size();
      for (std::size_t k = first; k < dec.points.size(); ++k) {
        EXPECT_LT(std::abs(linear_interp(g, d, dec.points[k])), 1e-12 * dmax);
      }
      for (const auto& f : cut_exterior_faces(dec)) {
        double a = 0.0;
        for (const auto& piece : f.pieces) a += piece.measure;
        EXPECT_NEAR(a / face_measure(dim, c, f.local_face), 1.0, 1e-10);
      }
      EXPECT_EQ(dec.children.size(), dim == 2 ? 3u : (std::count_if(d.begin(), d.end(), [](double v) { return v > 0; }) == 2 ? 6u : 4u));
    }
  }
}
