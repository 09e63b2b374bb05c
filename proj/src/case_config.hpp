#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "analytic.hpp"

namespace efem {

/// Named straight segment; count is the number of CSV samples (0 for analysis lines).
struct LineSpec {
  std::string name;
  Segment segment;
  int count = 0;
};

struct ReferenceSpec {
  ReferenceKind kind = ReferenceKind::analytic;
  double h = 0.0;  // fine element size for solved references
};

struct CaseConfig {
  std::string name;
  Problem problem;
  SolveOptions solve;

  std::vector<LineSpec> csv_lines;  // sampled to CSV
  std::vector<LineSpec> transects;  // line errors and interface crossing metrics
  std::vector<LineSpec> mismatch;   // inter-element potential jumps
  bool vtk = false;

  std::optional<ReferenceSpec> reference;
  std::vector<double> h_list;  // default levels for a convergence sweep
  std::vector<Mode> modes;     // default modes for a convergence sweep
  /// Scales below which errors are measured absolutely instead of relatively.
  double potential_scale = 1.0;
  double field_scale = 1.0;
};

/// Parse INI-style case text. Relative mesh paths resolve against base_dir.
CaseConfig parse_case(const std::string& text, const std::filesystem::path& base_dir = {},
                      const std::string& name = "case");
CaseConfig load_case(const std::filesystem::path& path);

/// Tag names produced by the structured generator for a dimension.
std::vector<std::string> structured_tags(int dim);

}  // namespace efem
