#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "case_config.hpp"
#include "error.hpp"

namespace efem {

/// Command-line style overrides applied on top of a case file.
struct RunOverrides {
  std::optional<Mode> mode;
  std::optional<double> h;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<int> threads;
  bool direct = false;
};

void apply_overrides(CaseConfig& cfg, const RunOverrides& o);

/// Metrics at one interface crossing of a transect. Index 0 is the positive side.
struct CrossingMetric {
  Vec3 x;
  Vec3 x_ref;
  double phi = 0.0, phi_ref = 0.0, phi_error = 0.0;
  std::array<double, 2> En{}, En_ref{}, En_error{};
};

struct TransectMetric {
  std::string name;
  std::optional<double> l2_error;
  std::vector<CrossingMetric> crossings;
};

struct CaseSummary {
  std::string name;
  Mode mode = Mode::efem;
  int dim = 2;
  double h = 0.0;  // largest structured spacing, 0 for file meshes
  std::size_t nodes = 0, elements = 0;
  SolveResult result;
  std::vector<TransectMetric> transects;
  std::vector<std::pair<std::string, double>> mismatch;
  double seconds = 0.0;
};

/// Solve one case and evaluate its analysis lines against ref (may be null).
CaseSummary evaluate_case(const CaseConfig& cfg, const ReferenceField* ref);

/// Iterative tolerance used for solved references, whatever the case requests.
inline constexpr double reference_solver_tol = 1e-11;

/// Reference field configured for a case, or null when none is requested.
std::unique_ptr<ReferenceField> make_reference(const CaseConfig& cfg);

/// Stable summary schema. Timing is left out so repeated runs compare equal.
nlohmann::json summary_json(const CaseSummary& s);

/// summary.json, timing.json, line CSVs and VTK for a finished solve.
void write_artifacts(const CaseConfig& cfg, const CaseSummary& s, const std::filesystem::path& out_dir);
/// Throws not_converged when the iterative solve stopped short of the tolerance.
void check_converged(const CaseSummary& s);

/// Full single-solve run writing summary.json, timing.json, line CSVs and VTK into
/// out_dir. Throws efem::Error; not_converged is raised after the artifacts are written.
CaseSummary run_case(const CaseConfig& cfg, const std::filesystem::path& out_dir);

struct ConvergenceLevel {
  double h_target = 0.0;
  double h = 0.0;
  std::size_t unknowns = 0;
  std::vector<double> errors;  // one per transect, then the combined error last
};

struct ConvergenceSeries {
  Mode mode = Mode::efem;
  std::vector<ConvergenceLevel> levels;
  std::vector<std::optional<double>> orders;  // null when the errors sit at round-off
  std::vector<bool> exact;
};

struct ConvergenceReport {
  std::string name;
  std::vector<std::string> columns;  // transect names then "combined"
  std::vector<ConvergenceSeries> series;
};

/// Least-squares slope of log(error) against log(h).
double observed_order(const std::vector<double>& h, const std::vector<double>& errors);

/// Errors at or below this are treated as exact (solver tolerance floor).
inline constexpr double exact_error_floor = 1e-7;

/// Error-vs-h sweep for several modes against the configured reference.
ConvergenceReport run_convergence(const CaseConfig& cfg, std::vector<double> h_list, const std::vector<Mode>& modes);

nlohmann::json convergence_json(const ConvergenceReport& r);
std::string convergence_table(const ConvergenceReport& r);

/// Process exit status for an error category.
int exit_status(ErrorCode code);

}  // namespace efem
