#pragma once

#include <map>
#include <string>
#include <vector>

#include "cut.hpp"
#include "enrichment.hpp"
#include "levelset.hpp"
#include "mesh.hpp"
#include "sparse.hpp"

namespace efem {

/// Discretization variants sharing one matrix graph.
enum class Mode {
  standard_fem,  // P1 with a volume-averaged permittivity on cut elements
  efem_no_d,     // enriched, inter-element displacement terms dropped
  efem,          // enriched with the displacement terms
};

std::string mode_name(Mode mode);
/// Accepts "standard", "efem-nod", "efem".
Mode parse_mode(const std::string& name);

struct BoundaryCondition {
  enum class Kind { dirichlet, neumann_zero };
  Kind kind = Kind::neumann_zero;
  double value = 0.0;  // volts, dirichlet only

  static BoundaryCondition dirichlet(double v);
  static BoundaryCondition neumann() { return {}; }
};

/// Tag name to condition; tags not listed are natural (zero normal displacement).
using BoundaryMap = std::map<std::string, BoundaryCondition>;

struct AssemblyOptions {
  Mode mode = Mode::efem;
  /// Include displacement terms on faces lying on the domain boundary.
  bool d_on_boundary = true;
  double snap = default_snap_tolerance;
  int threads = 1;
};

/// Data retained per enriched element for recovery and post-processing.
struct EnrichedElement {
  int element = -1;
  Vec4 recovery{};
  CutDecomposition decomposition;
};

struct AssembledSystem {
  CsrMatrix matrix;
  std::vector<double> rhs;
  /// Element states after fallbacks (degenerate or singular cuts become uncut).
  Classification classification;
  std::vector<EnrichedElement> enriched;
  std::vector<int> enriched_index;  // per element, -1 if not enriched
  std::vector<int> dirichlet_nodes;
  std::size_t fallbacks = 0;
};

/// Node-adjacency graph of the standard P1 discretization.
CsrMatrix build_pattern(const Mesh& mesh);

/// Element-level result before global insertion.
struct ElementContribution {
  Mat4 matrix{};
  bool enriched = false;
  bool fallback = false;
  ElementState state = ElementState::positive;
  EnrichedElement record;
};

ElementContribution element_contribution(const Mesh& mesh, std::size_t e, const Classification& cls,
                                         const MaterialPair& materials, const AssemblyOptions& options);

/// Full elemental system (before condensation) of a cut element under the given options.
ElementSystem enriched_element_system(const Mesh& mesh, std::size_t e, const CutDecomposition& dec,
                                      const MaterialPair& materials, const AssemblyOptions& options);

/// Dirichlet value per node (NaN where unconstrained).
std::vector<double> dirichlet_values(const Mesh& mesh, const BoundaryMap& bcs);

/// Row-identity Dirichlet elimination; constrained columns move to the rhs, pattern kept.
void apply_dirichlet(CsrMatrix& matrix, std::vector<double>& rhs, const std::vector<double>& values);

AssembledSystem assemble_global(const Mesh& mesh, const LevelSet& levelset, const MaterialPair& materials,
                                const BoundaryMap& bcs, const AssemblyOptions& options = {});

}  // namespace efem
