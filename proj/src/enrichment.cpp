#include "enrichment.hpp"

#include <cmath>

#include "error.hpp"

namespace efem {

MaterialPair::MaterialPair(double e1, double e2) : eps1(e1), eps2(e2) {
  if (!(e1 > 0.0) || !(e2 > 0.0) || !std::isfinite(e1) || !std::isfinite(e2)) {
    throw Error(ErrorCode::invalid_argument, "permittivities must be finite and positive");
  }
}

EnrichmentBasis make_enrichment_basis(const ElementGeometry& g, std::span<const double> d) {
  EnrichmentBasis b;
  for (int i = 0; i < g.num_nodes(); ++i) {
    b.d[i] = d[i];
    b.grad_abs += g.grads[i] * std::abs(d[i]);
    b.grad_dist += g.grads[i] * d[i];
  }
  return b;
}

double EnrichmentBasis::value(const ElementGeometry& g, const Vec3& x) const {
  return hat_eval(g, std::span<const double>(d.data(), static_cast<std::size_t>(g.num_nodes())), x);
}

double hat_eval(const ElementGeometry& g, std::span<const double> d, const Vec3& x) {
  const auto lam = g.barycentric(x);
  double abs_sum = 0.0, interp = 0.0;
  for (int i = 0; i < g.num_nodes(); ++i) {
    abs_sum += lam[i] * std::abs(d[i]);
    interp += lam[i] * d[i];
  }
  return abs_sum - std::abs(interp);
}

ElementSystem standard_element(const ElementGeometry& g, double eps) {
  ElementSystem s;
  s.n = g.num_nodes();
  for (int i = 0; i < s.n; ++i) {
    for (int j = 0; j < s.n; ++j) s.K[i][j] = eps * g.measure * dot(g.grads[i], g.grads[j]);
  }
  return s;
}

ElementSystem element_matrices(const ElementGeometry& g, const MaterialPair& materials,
                               const CutDecomposition& dec) {
  ElementSystem s;
  s.n = g.num_nodes();
  s.cut = true;
  const auto basis = make_enrichment_basis(g, std::span<const double>(dec.d.data(), static_cast<std::size_t>(s.n)));
  for (const auto& child : dec.children) {
    const double w = materials.eps(child.sign) * child.measure;
    const Vec3 gbar = basis.gradient(child.sign);
    for (int i = 0; i < s.n; ++i) {
      for (int j = 0; j < s.n; ++j) s.K[i][j] += w * dot(g.grads[i], g.grads[j]);
      s.B[i] += w * dot(g.grads[i], gbar);
    }
    s.Kenr += w * dot(gbar, gbar);
  }
  return s;
}

void add_displacement_terms(const ElementGeometry& g, const MaterialPair& materials, const CutDecomposition& dec,
                            std::span<const CutFace> faces, ElementSystem& s) {
  const auto basis = make_enrichment_basis(g, std::span<const double>(dec.d.data(), static_cast<std::size_t>(s.n)));
  for (const auto& face : faces) {
    if (!face.crossed) continue;
    const Vec3 normal = g.face_normal(face.local_face);
    for (const auto& piece : face.pieces) {
      // N-bar is linear on each piece, so the centroid rule is exact.
      const double weight = piece.measure * basis.value(g, piece.centroid) * materials.eps(piece.sign);
      for (int i = 0; i < s.n; ++i) s.D[i] += weight * dot(normal, g.grads[i]);
      s.Denr += weight * dot(normal, basis.gradient(piece.sign));
    }
  }
}

CondensedSystem condense(const ElementSystem& s) {
  CondensedSystem c;
  c.matrix = s.K;
  if (!s.cut) return c;
  double knorm = 0.0;
  for (int i = 0; i < s.n; ++i) {
    for (int j = 0; j < s.n; ++j) knorm += s.K[i][j] * s.K[i][j];
  }
  knorm = std::sqrt(knorm);
  const double pivot = s.Kenr - s.Denr;
  if (!(std::abs(pivot) >= singular_enrichment_ratio * knorm)) {
    throw Error(ErrorCode::singular_enrichment, "enrichment pivot Kenr - Denr vanishes");
  }
  for (int j = 0; j < s.n; ++j) c.recovery[j] = -(s.B[j] - s.D[j]) / pivot;
  for (int i = 0; i < s.n; ++i) {
    for (int j = 0; j < s.n; ++j) c.matrix[i][j] += s.B[i] * c.recovery[j];
  }
  return c;
}

}  // namespace efem
