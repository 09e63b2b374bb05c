#include "assembly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include <spdlog/spdlog.h>

#include "error.hpp"

namespace efem {

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::standard_fem:
      return "standard";
    case Mode::efem_no_d:
      return "efem-nod";
    case Mode::efem:
      return "efem";
  }
  return "?";
}

Mode parse_mode(const std::string& name) {
  if (name == "standard") return Mode::standard_fem;
  if (name == "efem-nod") return Mode::efem_no_d;
  if (name == "efem") return Mode::efem;
  throw Error(ErrorCode::invalid_argument, "unknown mode '" + name + "' (expected standard|efem-nod|efem)");
}

BoundaryCondition BoundaryCondition::dirichlet(double v) {
  if (!std::isfinite(v)) throw Error(ErrorCode::invalid_argument, "dirichlet value must be finite");
  return {Kind::dirichlet, v};
}

CsrMatrix build_pattern(const Mesh& mesh) {
  std::vector<std::vector<int>> rows(mesh.num_nodes());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto el = mesh.element(e);
    for (int a : el) rows[a].insert(rows[a].end(), el.begin(), el.end());
  }
  return CsrMatrix(rows);
}

namespace {

std::array<Vec3, 4> element_coords(const Mesh& mesh, std::size_t e) {
  std::array<Vec3, 4> c{};
  const auto el = mesh.element(e);
  for (std::size_t i = 0; i < el.size(); ++i) c[i] = mesh.node(el[i]);
  return c;
}

std::array<double, 4> element_distances(const Mesh& mesh, std::size_t e, const Classification& cls) {
  std::array<double, 4> d{};
  const auto el = mesh.element(e);
  for (std::size_t i = 0; i < el.size(); ++i) d[i] = cls.nodal_d[el[i]];
  return d;
}

}  // namespace

ElementSystem enriched_element_system(const Mesh& mesh, std::size_t e, const CutDecomposition& dec,
                                      const MaterialPair& materials, const AssemblyOptions& options) {
  const auto g = mesh.geometry(e);
  ElementSystem sys = element_matrices(g, materials, dec);
  if (options.mode == Mode::efem) {
    auto faces = cut_exterior_faces(dec);
    if (!options.d_on_boundary) {
      std::erase_if(faces, [&](const CutFace& f) { return mesh.neighbor(e, f.local_face) < 0; });
    }
    add_displacement_terms(g, materials, dec, faces, sys);
  }
  return sys;
}

ElementContribution element_contribution(const Mesh& mesh, std::size_t e, const Classification& cls,
                                         const MaterialPair& materials, const AssemblyOptions& options) {
  ElementContribution out;
  out.state = cls.state[e];
  const auto g = mesh.geometry(e);
  if (out.state != ElementState::cut) {
    out.matrix = standard_element(g, materials.eps(out.state == ElementState::positive ? 1 : -1)).K;
    return out;
  }

  const auto coords = element_coords(mesh, e);
  const auto d = element_distances(mesh, e, cls);
  const auto n = static_cast<std::size_t>(g.num_nodes());
  CutDecomposition dec = split_simplex(mesh.dim(), std::span<const Vec3>(coords.data(), n),
                                       std::span<const double>(d.data(), n));

  if (options.mode == Mode::standard_fem) {
    const double eps = (dec.measure(1) * materials.eps1 + dec.measure(-1) * materials.eps2) /
                       (dec.measure(1) + dec.measure(-1));
    out.matrix = standard_element(g, eps).K;
    return out;
  }

  auto fall_back = [&](const char* why) {
    const int s = dec.majority_sign();
    spdlog::debug("element {}: {}; treating as uncut ({} side)", e, why, s > 0 ? "positive" : "negative");
    out.fallback = true;
    out.state = s > 0 ? ElementState::positive : ElementState::negative;
    out.matrix = standard_element(g, materials.eps(s)).K;
  };

  if (dec.degenerate) {
    fall_back("degenerate cut");
    return out;
  }
  const ElementSystem sys = enriched_element_system(mesh, e, dec, materials, options);
  try {
    const CondensedSystem c = condense(sys);
    out.matrix = c.matrix;
    out.enriched = true;
    out.record.element = static_cast<int>(e);
    out.record.recovery = c.recovery;
    out.record.decomposition = std::move(dec);
  } catch (const Error& err) {
    if (err.code() != ErrorCode::singular_enrichment) throw;
    fall_back("singular enrichment pivot");
  }
  return out;
}

std::vector<double> dirichlet_values(const Mesh& mesh, const BoundaryMap& bcs) {
  std::vector<double> values(mesh.num_nodes(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& [name, bc] : bcs) {
    if (mesh.find_tag(name) < 0) {
      throw Error(ErrorCode::config, "boundary condition references unknown tag '" + name + "'");
    }
  }
  for (const auto& bf : mesh.boundary_faces()) {
    const auto it = bcs.find(mesh.tag_names()[bf.tag]);
    if (it == bcs.end() || it->second.kind != BoundaryCondition::Kind::dirichlet) continue;
    const auto el = mesh.element(bf.element);
    for (int k : local_face_nodes(mesh.dim(), bf.local_face)) {
      if (k < 0) continue;
      double& v = values[el[k]];
      if (!std::isnan(v) && v != it->second.value) {
        throw Error(ErrorCode::config, "conflicting dirichlet values at node " + std::to_string(el[k]));
      }
      v = it->second.value;
    }
  }
  return values;
}

void apply_dirichlet(CsrMatrix& a, std::vector<double>& rhs, const std::vector<double>& values) {
  const auto& rp = a.row_ptr();
  const auto& cols = a.cols();
  auto& vals = a.values();
  for (int i = 0; i < a.size(); ++i) {
    if (!std::isnan(values[i])) {
      for (int k = rp[i]; k < rp[i + 1]; ++k) vals[k] = cols[k] == i ? 1.0 : 0.0;
      rhs[i] = values[i];
      continue;
    }
    for (int k = rp[i]; k < rp[i + 1]; ++k) {
      const double g = values[cols[k]];
      if (!std::isnan(g)) {
        rhs[i] -= vals[k] * g;
        vals[k] = 0.0;
      }
    }
  }
}

AssembledSystem assemble_global(const Mesh& mesh, const LevelSet& levelset, const MaterialPair& materials,
                                const BoundaryMap& bcs, const AssemblyOptions& options) {
  const auto dvals = dirichlet_values(mesh, bcs);
  if (std::all_of(dvals.begin(), dvals.end(), [](double v) { return std::isnan(v); })) {
    throw Error(ErrorCode::singular_system, "no dirichlet constraint: the system is singular");
  }

  AssembledSystem out;
  out.classification = classify_elements(mesh, levelset, options.snap);
  out.matrix = build_pattern(mesh);
  out.rhs.assign(mesh.num_nodes(), 0.0);

  // Element work is independent; insertion below runs in element order.
  const std::size_t ne = mesh.num_elements();
  std::vector<ElementContribution> contrib(ne);
  const int threads = std::max(1, options.threads);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t e = begin; e < end; ++e) {
      contrib[e] = element_contribution(mesh, e, out.classification, materials, options);
    }
  };
  if (threads == 1 || ne < 1024) {
    work(0, ne);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    const std::size_t chunk = (ne + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const std::size_t b = std::min(ne, t * chunk), en = std::min(ne, b + chunk);
      pool.emplace_back([&, b, en, t] {
        try {
          work(b, en);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }

  out.enriched_index.assign(ne, -1);
  for (std::size_t e = 0; e < ne; ++e) {
    auto& c = contrib[e];
    const auto el = mesh.element(e);
    for (std::size_t i = 0; i < el.size(); ++i) {
      for (std::size_t j = 0; j < el.size(); ++j) out.matrix.add(el[i], el[j], c.matrix[i][j]);
    }
    if (c.fallback) {
      ++out.fallbacks;
      out.classification.state[e] = c.state;
      --out.classification.num_cut;
    }
    if (c.enriched) {
      out.enriched_index[e] = static_cast<int>(out.enriched.size());
      out.enriched.push_back(std::move(c.record));
    }
  }

  if (out.fallbacks > 0) {
    spdlog::warn("{} of {} cut elements treated as uncut (degenerate cut or singular enrichment)", out.fallbacks,
                 out.fallbacks + out.classification.num_cut);
  }

  apply_dirichlet(out.matrix, out.rhs, dvals);
  for (std::size_t i = 0; i < dvals.size(); ++i) {
    if (!std::isnan(dvals[i])) out.dirichlet_nodes.push_back(static_cast<int>(i));
  }
  return out;
}

}  // namespace efem
