#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "solution.hpp"

namespace efem {

/// Legacy ASCII VTK unstructured grid. Enriched elements are written as their
/// children so the gradient jump is visible; point data phi, cell data E and side.
std::string format_vtk(const SolutionField& sol);
void export_vtk(const SolutionField& sol, const std::filesystem::path& path);

/// CSV with header x,y[,z],phi,Ex,Ey[,Ez],side at 17 significant digits.
std::string format_csv(const std::vector<LineSample>& samples, int dim);
void export_csv(const std::vector<LineSample>& samples, int dim, const std::filesystem::path& path);

/// Shortest round-trip decimal (17 significant digits).
std::string format_double(double v);

}  // namespace efem
