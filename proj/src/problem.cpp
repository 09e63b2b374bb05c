#include "problem.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

#include "error.hpp"

namespace efem {

std::array<int, 3> MeshSpec::counts_for(double target_h) const {
  if (!(target_h > 0.0)) throw Error(ErrorCode::config, "element size h must be positive");
  std::array<int, 3> n{1, 1, 1};
  for (int k = 0; k < dim; ++k) {
    const double extent = box.hi[k] - box.lo[k];
    n[k] = std::max(1, static_cast<int>(std::lround(extent / target_h)));
  }
  return n;
}

double MeshSpec::spacing(double target_h) const {
  if (file) return 0.0;
  const auto n = (target_h > 0.0) ? counts_for(target_h) : counts;
  double s = 0.0;
  for (int k = 0; k < dim; ++k) s = std::max(s, (box.hi[k] - box.lo[k]) / n[k]);
  return s;
}

Mesh MeshSpec::build(std::optional<double> h_override) const {
  if (file) {
    if (h_override) throw Error(ErrorCode::config, "element size override needs a structured mesh");
    return read_mesh(*file);
  }
  std::array<int, 3> n = counts;
  if (h_override) {
    n = counts_for(*h_override);
  } else if (n[0] <= 0) {
    n = counts_for(h);
  }
  return generate_structured(dim, n[0], n[1], dim == 3 ? n[2] : 1, box);
}

SolveResult solve_problem(const Problem& problem, std::shared_ptr<const Mesh> mesh, const SolveOptions& options) {
  AssembledSystem system =
      assemble_global(*mesh, problem.levelset, problem.materials, problem.bcs, options.assembly);

  SolveResult out;
  out.unknowns = mesh->num_nodes();
  out.cut_elements = system.classification.num_cut + system.fallbacks;
  out.enriched_elements = system.enriched.size();
  out.fallbacks = system.fallbacks;
  out.direct = options.direct;

  std::vector<double> phi;
  if (options.direct) {
    phi = dense_lu_solve(system.matrix, system.rhs);
    out.report.residual = relative_residual(system.matrix, phi, system.rhs);
    out.report.converged = true;
  } else {
    std::vector<double> scale;
    if (options.equilibrate) scale = equilibrate(system.matrix, system.rhs);
    phi.assign(mesh->num_nodes(), 0.0);
    out.report = bicgstab(system.matrix, system.rhs, phi, options.solver);
    for (std::size_t i = 0; i < scale.size(); ++i) phi[i] *= scale[i];
    spdlog::info("bicgstab: {} iterations, relative residual {:.3e}", out.report.iterations, out.report.residual);
  }
  out.field = std::make_shared<SolutionField>(std::move(mesh), system, std::move(phi));
  return out;
}

}  // namespace efem
