#pragma once

#include <array>
#include <span>
#include <vector>

#include "cut.hpp"
#include "mesh.hpp"

namespace efem {

/// Permittivities of the two materials: eps1 on the positive side, eps2 on the negative side.
struct MaterialPair {
  double eps1 = 1.0;
  double eps2 = 1.0;

  MaterialPair() = default;
  MaterialPair(double e1, double e2);
  static MaterialPair from_ratio(double q) { return MaterialPair(q, 1.0); }

  double eps(int sign) const { return sign > 0 ? eps1 : eps2; }
  double ratio() const { return eps1 / eps2; }
};

/// Ratio used to model the conductor limit (one permittivity dominating the other).
inline constexpr double conductor_ratio = 1e6;

using Mat4 = std::array<std::array<double, 4>, 4>;
using Vec4 = std::array<double, 4>;

/// Hat enrichment of one cut element. Its gradient is constant on each side:
/// sum_i |d_i| grad N_i - s sum_i d_i grad N_i.
struct EnrichmentBasis {
  Vec4 d{};
  Vec3 grad_abs;   // sum |d_i| grad N_i
  Vec3 grad_dist;  // sum d_i grad N_i

  Vec3 gradient(int sign) const { return grad_abs - grad_dist * static_cast<double>(sign); }
  double value(const ElementGeometry& g, const Vec3& x) const;
};

EnrichmentBasis make_enrichment_basis(const ElementGeometry& g, std::span<const double> d);

/// Pointwise hat function sum N_i|d_i| - |sum N_i d_i|.
double hat_eval(const ElementGeometry& g, std::span<const double> d, const Vec3& x);

/// Elemental blocks of the enriched system plus the inter-element displacement terms.
struct ElementSystem {
  int n = 3;
  bool cut = false;
  Mat4 K{};
  Vec4 B{};
  double Kenr = 0.0;
  Vec4 D{};
  double Denr = 0.0;
};

/// Statically condensed element matrix and the enrichment recovery row.
struct CondensedSystem {
  Mat4 matrix{};
  Vec4 recovery{};  // phi* = recovery . phi_e
};

/// Standard P1 stiffness for a single permittivity.
ElementSystem standard_element(const ElementGeometry& g, double eps);

/// Volume blocks K, B, Kenr. Integrands are constant per child, so one point per child is exact.
ElementSystem element_matrices(const ElementGeometry& g, const MaterialPair& materials,
                               const CutDecomposition& decomposition);

/// Face integrals D_i and Denr over the given faces (N-bar vanishes on uncrossed ones).
void add_displacement_terms(const ElementGeometry& g, const MaterialPair& materials,
                            const CutDecomposition& decomposition, std::span<const CutFace> faces,
                            ElementSystem& system);

/// K - B (Kenr - Denr)^-1 (B^T - D^T); throws singular_enrichment when the pivot vanishes.
CondensedSystem condense(const ElementSystem& system);

inline constexpr double singular_enrichment_ratio = 1e-14;

}  // namespace efem
