#include "cut.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "mesh.hpp"

namespace efem {

namespace {

int sign_of(double v) { return v > 0.0 ? 1 : -1; }

Vec3 zero_crossing(const Vec3& xi, const Vec3& xj, double di, double dj) {
  return xi + (xj - xi) * (di / (di - dj));
}

using Tet = std::array<int, 4>;

// Split a triangular prism into three tets. bottom[k]-top[k] are the lateral
// edges. Quad-face diagonals pass through the lowest-ranked vertex of each
// face, which always yields a conforming split.
std::array<Tet, 3> split_prism(std::array<int, 3> bottom, std::array<int, 3> top,
                               const std::vector<int>& rank) {
  std::array<int, 6> v{bottom[0], bottom[1], bottom[2], top[0], top[1], top[2]};
  int m = 0;
  for (int i = 1; i < 6; ++i) {
    if (rank[v[i]] < rank[v[m]]) m = i;
  }
  if (m >= 3) {
    std::swap_ranges(v.begin(), v.begin() + 3, v.begin() + 3);
    m -= 3;
  }
  const std::array<int, 6> w{v[m], v[(m + 1) % 3], v[(m + 2) % 3], v[3 + m], v[3 + (m + 1) % 3],
                             v[3 + (m + 2) % 3]};
  if (std::min(rank[w[1]], rank[w[5]]) < std::min(rank[w[2]], rank[w[4]])) {
    return {Tet{w[0], w[1], w[2], w[5]}, Tet{w[0], w[1], w[5], w[4]}, Tet{w[0], w[4], w[5], w[3]}};
  }
  return {Tet{w[0], w[1], w[2], w[4]}, Tet{w[0], w[4], w[2], w[5]}, Tet{w[0], w[4], w[5], w[3]}};
}

double child_measure(int dim, const std::vector<Vec3>& pts, const Child& c) {
  std::array<Vec3, 4> v{};
  for (int i = 0; i <= dim; ++i) v[i] = pts[c.vertices[i]];
  return simplex_measure(dim, v.data());
}

}  // namespace

double tet_aspect_ratio(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const std::array<Vec3, 4> v{a, b, c, d};
  double longest = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) longest = std::max(longest, norm(v[i] - v[j]));
  }
  const double vol = simplex_measure(3, v.data());
  if (vol <= 0.0) return std::numeric_limits<double>::infinity();
  return longest * longest * longest / (6.0 * std::sqrt(2.0) * vol);
}

int CutDecomposition::virtual_index(int i, int j) const {
  const int first = static_cast<int>(points.size() - virtual_edges.size());
  for (std::size_t k = 0; k < virtual_edges.size(); ++k) {
    const auto& e = virtual_edges[k];
    if ((e[0] == i && e[1] == j) || (e[0] == j && e[1] == i)) return first + static_cast<int>(k);
  }
  return -1;
}

double CutDecomposition::measure(int sign) const {
  double m = 0.0;
  for (const auto& c : children) {
    if (c.sign == sign) m += c.measure;
  }
  return m;
}

CutDecomposition split_simplex(int dim, std::span<const Vec3> coords, std::span<const double> d) {
  const int n = dim + 1;
  CutDecomposition out;
  out.dim = dim;
  std::vector<int> pos, neg;
  for (int i = 0; i < n; ++i) {
    out.d[i] = d[i];
    out.points.push_back(coords[i]);
    if (d[i] == 0.0) throw Error(ErrorCode::invalid_argument, "split_simplex needs snapped (nonzero) distances");
    (d[i] > 0.0 ? pos : neg).push_back(i);
  }
  if (pos.empty() || neg.empty()) {
    throw Error(ErrorCode::invalid_argument, "split_simplex needs strictly mixed signs");
  }
  out.parent_measure = simplex_measure(dim, coords.data());

  auto add_virtual = [&](int i, int j) {
    out.points.push_back(zero_crossing(coords[i], coords[j], d[i], d[j]));
    out.virtual_edges.push_back({i, j});
    return static_cast<int>(out.points.size()) - 1;
  };

  if (dim == 2) {
    // Lone vertex a opposes b and c.
    const bool lone_pos = pos.size() == 1;
    const int a = lone_pos ? pos[0] : neg[0];
    const auto& others = lone_pos ? neg : pos;
    const int b = others[0], c = others[1];
    const int xab = add_virtual(a, b);
    const int xac = add_virtual(a, c);
    const int sa = sign_of(d[a]), sb = -sa;
    out.children.push_back({{a, xab, xac, -1}, sa, 0.0});
    out.children.push_back({{xab, b, c, -1}, sb, 0.0});
    out.children.push_back({{xab, c, xac, -1}, sb, 0.0});
    out.interface_facets.push_back({xab, xac, -1});
  } else if (pos.size() == 1 || neg.size() == 1) {
    const bool lone_pos = pos.size() == 1;
    const int a = lone_pos ? pos[0] : neg[0];
    const auto& o = lone_pos ? neg : pos;
    const int xb = add_virtual(a, o[0]);
    const int xc = add_virtual(a, o[1]);
    const int xd = add_virtual(a, o[2]);
    const int sa = sign_of(d[a]);
    out.children.push_back({{a, xb, xc, xd}, sa, 0.0});
    std::vector<int> rank(out.points.size());
    for (std::size_t i = 0; i < rank.size(); ++i) rank[i] = static_cast<int>(i);
    for (const auto& t : split_prism({xb, xc, xd}, {o[0], o[1], o[2]}, rank)) {
      out.children.push_back({t, -sa, 0.0});
    }
    out.interface_facets.push_back({xb, xc, xd});
  } else {
    // 2-2 split: a,b positive, c,d negative; the interface is a quad.
    const int a = pos[0], b = pos[1], c = neg[0], dd = neg[1];
    const int xac = add_virtual(a, c);
    const int xad = add_virtual(a, dd);
    const int xbc = add_virtual(b, c);
    const int xbd = add_virtual(b, dd);

    struct Option {
      std::vector<Child> children;
      std::vector<std::array<int, 3>> facets;
      double quality = 0.0;
    };
    auto build = [&](int lowest, int second) {
      // Ranks: chosen virtual node lowest, then the rest in index order.
      std::vector<int> rank(out.points.size());
      int r = 2;
      for (std::size_t i = 0; i < rank.size(); ++i) {
        if (static_cast<int>(i) == lowest) {
          rank[i] = 0;
        } else if (static_cast<int>(i) == second) {
          rank[i] = 1;
        } else {
          rank[i] = r++;
        }
      }
      Option opt;
      for (const auto& t : split_prism({a, xac, xad}, {b, xbc, xbd}, rank)) opt.children.push_back({t, +1, 0.0});
      for (const auto& t : split_prism({c, xac, xbc}, {dd, xad, xbd}, rank)) opt.children.push_back({t, -1, 0.0});
      if (lowest == xac) {
        opt.facets = {{xac, xad, xbd}, {xac, xbd, xbc}};
      } else {
        opt.facets = {{xad, xbd, xbc}, {xad, xbc, xac}};
      }
      for (const auto& ch : opt.children) {
        const auto& v = ch.vertices;
        opt.quality = std::max(opt.quality, tet_aspect_ratio(out.points[v[0]], out.points[v[1]],
                                                             out.points[v[2]], out.points[v[3]]));
      }
      return opt;
    };
    Option first = build(xac, xad);
    Option second = build(xad, xac);
    Option& pick = second.quality < first.quality * (1.0 - 1e-12) ? second : first;
    out.children = std::move(pick.children);
    out.interface_facets = std::move(pick.facets);
  }

  for (auto& c : out.children) {
    c.measure = child_measure(dim, out.points, c);
    if (c.measure < degenerate_child_ratio * out.parent_measure) out.degenerate = true;
  }
  return out;
}

std::vector<CutFace> cut_exterior_faces(const CutDecomposition& dec) {
  const int dim = dec.dim;
  std::vector<CutFace> faces;
  faces.reserve(dec.num_nodes());
  auto piece = [&](std::initializer_list<Vec3> verts, int sign) {
    FacePiece p;
    int k = 0;
    for (const auto& v : verts) p.vertices[k++] = v;
    p.sign = sign;
    p.measure = simplex_measure(dim - 1, p.vertices.data());
    Vec3 c{};
    for (int i = 0; i < dim; ++i) c += p.vertices[i];
    p.centroid = c * (1.0 / dim);
    return p;
  };

  for (int f = 0; f < dec.num_nodes(); ++f) {
    CutFace cf;
    cf.local_face = f;
    const auto local = local_face_nodes(dim, f);
    std::vector<int> pos, neg;
    for (int k = 0; k < dim; ++k) (dec.d[local[k]] > 0.0 ? pos : neg).push_back(local[k]);
    cf.crossed = !pos.empty() && !neg.empty();
    const auto& P = dec.points;
    if (!cf.crossed) {
      const int s = pos.empty() ? -1 : +1;
      if (dim == 2) {
        cf.pieces.push_back(piece({P[local[0]], P[local[1]]}, s));
      } else {
        cf.pieces.push_back(piece({P[local[0]], P[local[1]], P[local[2]]}, s));
      }
    } else if (dim == 2) {
      const int p = local[0], q = local[1];
      const Vec3& xi = P[dec.virtual_index(p, q)];
      cf.pieces.push_back(piece({P[p], xi}, sign_of(dec.d[p])));
      cf.pieces.push_back(piece({xi, P[q]}, sign_of(dec.d[q])));
    } else {
      const bool lone_pos = pos.size() == 1;
      const int a = lone_pos ? pos[0] : neg[0];
      const auto& o = lone_pos ? neg : pos;
      const Vec3& xb = P[dec.virtual_index(a, o[0])];
      const Vec3& xc = P[dec.virtual_index(a, o[1])];
      const int sa = sign_of(dec.d[a]);
      cf.pieces.push_back(piece({P[a], xb, xc}, sa));
      cf.pieces.push_back(piece({xb, P[o[0]], P[o[1]]}, -sa));
      cf.pieces.push_back(piece({xb, P[o[1]], xc}, -sa));
    }
    faces.push_back(std::move(cf));
  }
  return faces;
}

}  // namespace efem
