#include "run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <spdlog/spdlog.h>

#include "error.hpp"
#include "export.hpp"

namespace efem {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

/// Relative error where the reference is significant, otherwise absolute against scale.
double scaled_error(double value, double ref, double scale) {
  if (std::isnan(ref)) return nan;
  const double denom = std::abs(ref) >= 1e-3 * scale ? std::abs(ref) : scale;
  return std::abs(value - ref) / denom;
}

nlohmann::json vec_json(const Vec3& v, int dim) {
  nlohmann::json a = nlohmann::json::array({v.x, v.y});
  if (dim == 3) a.push_back(v.z);
  return a;
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

std::vector<CrossingMetric> crossing_metrics(const SolutionField& sol, const Segment& seg, const ReferenceField* ref,
                                             double phi_scale, double field_scale) {
  std::vector<double> ref_t;
  if (ref) ref_t = ref->crossings(seg);
  std::vector<CrossingMetric> out;
  for (const auto& c : interface_crossings(sol, seg)) {
    CrossingMetric m;
    m.x = c.x;
    m.phi = sol.evaluate_in(c.element, c.x, +1).phi;
    for (int k = 0; k < 2; ++k) m.En[k] = dot(sol.evaluate_in(c.element, c.x, k == 0 ? +1 : -1).E, c.normal);
    m.phi_ref = nan;
    m.En_ref = {nan, nan};
    if (!ref_t.empty()) {
      // Pair with the nearest analytic or reference crossing.
      const double t = *std::min_element(ref_t.begin(), ref_t.end(), [&](double a, double b) {
        return std::abs(a - c.t) < std::abs(b - c.t);
      });
      m.x_ref = seg.at(t);
      m.phi_ref = ref->potential(m.x_ref);
      const Vec3 n = ref->normal(m.x_ref);
      for (int k = 0; k < 2; ++k) m.En_ref[k] = dot(ref->field(m.x_ref, k == 0 ? +1 : -1), n);
    }
    m.phi_error = scaled_error(m.phi, m.phi_ref, phi_scale);
    for (int k = 0; k < 2; ++k) m.En_error[k] = scaled_error(m.En[k], m.En_ref[k], field_scale);
    out.push_back(m);
  }
  return out;
}

}  // namespace

void apply_overrides(CaseConfig& cfg, const RunOverrides& o) {
  if (o.mode) cfg.solve.assembly.mode = *o.mode;
  if (o.h) {
    if (cfg.problem.mesh.file) throw Error(ErrorCode::config, "--h needs a structured mesh");
    if (!(*o.h > 0.0)) throw Error(ErrorCode::config, "--h must be positive");
    cfg.problem.mesh.h = *o.h;
    cfg.problem.mesh.counts = {0, 0, 0};
  }
  if (o.tol) {
    if (!(*o.tol > 0.0)) throw Error(ErrorCode::config, "--tol must be positive");
    cfg.solve.solver.tol = *o.tol;
  }
  if (o.max_iter) {
    if (*o.max_iter < 0) throw Error(ErrorCode::config, "--max-iter must be non-negative");
    cfg.solve.solver.max_iter = *o.max_iter;
  }
  if (o.threads) {
    if (*o.threads < 1) throw Error(ErrorCode::config, "--threads must be at least 1");
    cfg.solve.assembly.threads = *o.threads;
  }
  if (o.direct) cfg.solve.direct = true;
}

std::unique_ptr<ReferenceField> make_reference(const CaseConfig& cfg) {
  if (!cfg.reference) return nullptr;
  if (cfg.reference->kind == ReferenceKind::analytic) return analytic_reference(cfg.problem);
  // The reference has to be far more accurate than the errors measured against it.
  SolverOptions solver = cfg.solve.solver;
  solver.tol = std::min(solver.tol, reference_solver_tol);
  return reference_solve(cfg.problem, cfg.reference->kind, cfg.reference->h, solver, cfg.solve.assembly.threads);
}

CaseSummary evaluate_case(const CaseConfig& cfg, const ReferenceField* ref) {
  const auto start = std::chrono::steady_clock::now();
  CaseSummary s;
  s.name = cfg.name;
  s.mode = cfg.solve.assembly.mode;
  auto mesh = std::make_shared<const Mesh>(cfg.problem.mesh.build());
  s.dim = mesh->dim();
  s.h = cfg.problem.mesh.spacing(cfg.problem.mesh.h);
  s.nodes = mesh->num_nodes();
  s.elements = mesh->num_elements();
  s.result = solve_problem(cfg.problem, mesh, cfg.solve);
  const SolutionField& sol = *s.result.field;

  for (const auto& line : cfg.transects) {
    TransectMetric t;
    t.name = line.name;
    if (ref) {
      t.l2_error = l2_line_error(sol, [ref](const Vec3& x) { return ref->potential(x); }, line.segment);
    }
    t.crossings = crossing_metrics(sol, line.segment, ref, cfg.potential_scale, cfg.field_scale);
    s.transects.push_back(std::move(t));
  }
  for (const auto& line : cfg.mismatch) s.mismatch.emplace_back(line.name, interelement_mismatch(sol, line.segment));
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

nlohmann::json summary_json(const CaseSummary& s) {
  using nlohmann::json;
  json j;
  j["case"] = s.name;
  j["mode"] = mode_name(s.mode);
  j["dim"] = s.dim;
  j["h"] = s.h;
  j["nodes"] = s.nodes;
  j["elements"] = s.elements;
  j["unknowns"] = s.result.unknowns;
  j["cut_elements"] = s.result.cut_elements;
  j["enriched_elements"] = s.result.enriched_elements;
  j["fallbacks"] = s.result.fallbacks;
  j["solver"] = {{"method", s.result.direct ? "dense-lu" : "bicgstab"},
                 {"iterations", s.result.report.iterations},
                 {"restarts", s.result.report.restarts},
                 {"residual", number_or_null(s.result.report.residual)},
                 {"converged", s.result.report.converged}};
  json lines = json::array();
  for (const auto& t : s.transects) {
    json tj;
    tj["name"] = t.name;
    tj["l2_error"] = t.l2_error ? number_or_null(*t.l2_error) : json(nullptr);
    json cs = json::array();
    for (const auto& c : t.crossings) {
      cs.push_back({{"x", vec_json(c.x, s.dim)},
                    {"phi", c.phi},
                    {"phi_ref", number_or_null(c.phi_ref)},
                    {"phi_error", number_or_null(c.phi_error)},
                    {"En_pos", c.En[0]},
                    {"En_neg", c.En[1]},
                    {"En_pos_ref", number_or_null(c.En_ref[0])},
                    {"En_neg_ref", number_or_null(c.En_ref[1])},
                    {"En_pos_error", number_or_null(c.En_error[0])},
                    {"En_neg_error", number_or_null(c.En_error[1])}});
    }
    tj["crossings"] = cs;
    lines.push_back(tj);
  }
  j["transects"] = lines;
  json mm = json::array();
  for (const auto& [name, v] : s.mismatch) mm.push_back({{"name", name}, {"max_jump", v}});
  j["mismatch"] = mm;
  return j;
}

void write_artifacts(const CaseConfig& cfg, const CaseSummary& s, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create output directory " + out_dir.string() + ": " + ec.message());

  write_file(out_dir / "summary.json", summary_json(s).dump(2) + "\n");
  write_file(out_dir / "timing.json", nlohmann::json{{"wall_time_s", s.seconds}}.dump(2) + "\n");
  for (const auto& line : cfg.csv_lines) {
    export_csv(sample_line(*s.result.field, line.segment, line.count), s.dim, out_dir / ("line_" + line.name + ".csv"));
  }
  if (cfg.vtk) export_vtk(*s.result.field, out_dir / "field.vtk");
}

void check_converged(const CaseSummary& s) {
  const SolveReport& rep = s.result.report;
  if (rep.converged) return;
  char buf[128];
  std::snprintf(buf, sizeof buf, "solver did not converge: relative residual %.3e after %d iterations", rep.residual,
                rep.iterations);
  throw Error(ErrorCode::not_converged, buf);
}

CaseSummary run_case(const CaseConfig& cfg, const std::filesystem::path& out_dir) {
  const auto ref = make_reference(cfg);
  CaseSummary s = evaluate_case(cfg, ref.get());
  write_artifacts(cfg, s, out_dir);
  check_converged(s);
  return s;
}

double observed_order(const std::vector<double>& h, const std::vector<double>& errors) {
  if (h.size() != errors.size() || h.size() < 2) throw Error(ErrorCode::invalid_argument, "need at least two levels");
  const double n = static_cast<double>(h.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]);
    const double y = std::log(std::max(errors[i], std::numeric_limits<double>::min()));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceReport run_convergence(const CaseConfig& cfg, std::vector<double> h_list, const std::vector<Mode>& modes) {
  if (h_list.size() < 3) throw Error(ErrorCode::config, "a convergence sweep needs at least three mesh levels");
  if (modes.empty()) throw Error(ErrorCode::config, "no modes requested");
  if (cfg.transects.empty()) throw Error(ErrorCode::config, "a convergence sweep needs at least one analysis transect");
  if (cfg.problem.mesh.file) throw Error(ErrorCode::config, "a convergence sweep needs a structured mesh");
  std::sort(h_list.begin(), h_list.end(), std::greater<>());
  for (std::size_t i = 0; i < h_list.size(); ++i) {
    if (!(h_list[i] > 0.0)) throw Error(ErrorCode::config, "mesh sizes must be positive");
    if (i > 0 && h_list[i] == h_list[i - 1]) throw Error(ErrorCode::config, "mesh sizes must be distinct");
  }
  if (!cfg.reference) throw Error(ErrorCode::incompatible, "reference unavailable: case configures no reference");
  const auto ref = make_reference(cfg);

  ConvergenceReport report;
  report.name = cfg.name;
  for (const auto& t : cfg.transects) report.columns.push_back(t.name);
  report.columns.emplace_back("combined");

  for (Mode mode : modes) {
    ConvergenceSeries series;
    series.mode = mode;
    CaseConfig level_cfg = cfg;
    level_cfg.solve.assembly.mode = mode;
    for (double h : h_list) {
      auto mesh = std::make_shared<const Mesh>(cfg.problem.mesh.build(h));
      ConvergenceLevel lv;
      lv.h_target = h;
      lv.h = cfg.problem.mesh.spacing(h);
      lv.unknowns = mesh->num_nodes();
      const SolveResult res = solve_problem(cfg.problem, mesh, level_cfg.solve);
      if (!res.report.converged) {
        throw Error(ErrorCode::not_converged, "solver did not converge at h = " + std::to_string(h));
      }
      double sum = 0.0;
      for (const auto& t : cfg.transects) {
        const double e = l2_line_error(*res.field, [&](const Vec3& x) { return ref->potential(x); }, t.segment);
        lv.errors.push_back(e);
        sum += e * e;
      }
      lv.errors.push_back(std::sqrt(sum));
      spdlog::info("{} h={:.4g}: combined error {:.3e}", mode_name(mode), lv.h, lv.errors.back());
      series.levels.push_back(std::move(lv));
    }
    for (std::size_t c = 0; c < report.columns.size(); ++c) {
      std::vector<double> hs, es;
      bool exact = true;
      for (const auto& lv : series.levels) {
        hs.push_back(lv.h);
        es.push_back(lv.errors[c]);
        exact = exact && lv.errors[c] <= exact_error_floor;
      }
      series.exact.push_back(exact);
      series.orders.push_back(exact ? std::nullopt : std::optional<double>(observed_order(hs, es)));
    }
    report.series.push_back(std::move(series));
  }
  return report;
}

nlohmann::json convergence_json(const ConvergenceReport& r) {
  using nlohmann::json;
  json j;
  j["case"] = r.name;
  j["columns"] = r.columns;
  json series = json::array();
  for (const auto& s : r.series) {
    json sj;
    sj["mode"] = mode_name(s.mode);
    json levels = json::array();
    for (const auto& lv : s.levels) {
      levels.push_back({{"h_target", lv.h_target}, {"h", lv.h}, {"unknowns", lv.unknowns}, {"errors", lv.errors}});
    }
    sj["levels"] = levels;
    json orders = json::array();
    for (const auto& o : s.orders) orders.push_back(o ? json(*o) : json(nullptr));
    sj["orders"] = orders;
    sj["exact"] = s.exact;
    series.push_back(sj);
  }
  j["series"] = series;
  return j;
}

std::string convergence_table(const ConvergenceReport& r) {
  std::string out;
  char buf[128];
  for (const auto& s : r.series) {
    out += "mode " + mode_name(s.mode) + "\n";
    std::snprintf(buf, sizeof buf, "%10s %9s", "h", "unknowns");
    out += buf;
    for (const auto& c : r.columns) {
      std::snprintf(buf, sizeof buf, " %14s", c.c_str());
      out += buf;
    }
    out += '\n';
    for (const auto& lv : s.levels) {
      std::snprintf(buf, sizeof buf, "%10.5f %9zu", lv.h, lv.unknowns);
      out += buf;
      for (double e : lv.errors) {
        std::snprintf(buf, sizeof buf, " %14.6e", e);
        out += buf;
      }
      out += '\n';
    }
    std::snprintf(buf, sizeof buf, "%10s %9s", "order", "");
    out += buf;
    for (std::size_t c = 0; c < s.orders.size(); ++c) {
      if (s.orders[c]) {
        std::snprintf(buf, sizeof buf, " %14.3f", *s.orders[c]);
      } else {
        std::snprintf(buf, sizeof buf, " %14s", "exact");
      }
      out += buf;
    }
    out += "\n\n";
  }
  return out;
}

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::parse:
    case ErrorCode::config:
      return 2;
    case ErrorCode::not_converged:
    case ErrorCode::singular_system:
      return 3;
    case ErrorCode::orientation:
    case ErrorCode::incompatible:
    case ErrorCode::singular_enrichment:
    case ErrorCode::outside_domain:
      return 4;
    case ErrorCode::io:
      return 5;
  }
  return 1;
}

}  // namespace efem
