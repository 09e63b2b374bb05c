#pragma once

#include <filesystem>
#include <memory>
#include <optional>

#include "assembly.hpp"
#include "solution.hpp"

namespace efem {

/// Either a structured box mesh (by element size or counts) or a mesh file.
struct MeshSpec {
  int dim = 2;
  Box box;
  double h = 0.0;                 // used when counts are all zero
  std::array<int, 3> counts{0, 0, 0};
  std::optional<std::filesystem::path> file;

  /// Subdivisions per axis for a target element size.
  std::array<int, 3> counts_for(double target_h) const;
  /// Cell size actually produced (largest axis spacing); 0 for file meshes.
  double spacing(double target_h) const;
  Mesh build(std::optional<double> h_override = std::nullopt) const;
};

/// Everything defining one electrostatic boundary value problem.
struct Problem {
  MeshSpec mesh;
  LevelSet levelset = LevelSet::plane({0.0, 0.5, 0.0}, {0.0, 1.0, 0.0});
  MaterialPair materials;
  BoundaryMap bcs;
};

struct SolveOptions {
  AssemblyOptions assembly;
  SolverOptions solver;
  bool direct = false;
  /// Symmetric diagonal scaling before the iterative solve; the reported residual
  /// then refers to the scaled system.
  bool equilibrate = true;
};

struct SolveResult {
  std::shared_ptr<const SolutionField> field;
  SolveReport report;
  std::size_t unknowns = 0;
  std::size_t cut_elements = 0;
  std::size_t enriched_elements = 0;
  std::size_t fallbacks = 0;
  bool direct = false;
};

/// Assemble, solve (BiCGSTAB or dense LU), and recover the enrichment.
SolveResult solve_problem(const Problem& problem, std::shared_ptr<const Mesh> mesh, const SolveOptions& options);

}  // namespace efem
