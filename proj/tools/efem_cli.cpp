// Command-line driver: single solves and convergence sweeps over case files.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "efem/efem.h"

namespace {

int fail(efem_status st) {
  std::fprintf(stderr, "error: %s\n", efem_last_error());
  return efem_exit_code(st);
}

struct CaseHandle {
  efem_case* ptr = nullptr;
  ~CaseHandle() { efem_case_free(ptr); }
};

struct ResultHandle {
  efem_result* ptr = nullptr;
  ~ResultHandle() { efem_result_free(ptr); }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* lv = std::getenv("EFEM_LOG_LEVEL")) {
    if (efem_set_log_level(lv) != EFEM_OK) std::fprintf(stderr, "warning: %s\n", efem_last_error());
  }

  CLI::App app{"Enriched finite element solver for two-material electrostatics"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);

  std::string case_file;
  std::string mode;
  std::optional<double> h, tol;
  std::optional<int> max_iter;
  int threads = 1;
  bool direct = false;
  std::string out_dir = "efem_out";

  auto* solve = app.add_subcommand("solve", "Solve one case and write its artifacts");
  solve->add_option("case", case_file, "Case file")->required()->check(CLI::ExistingFile);
  solve->add_option("--mode", mode, "standard, efem-nod or efem");
  solve->add_option("--h", h, "Element size of the structured mesh");
  solve->add_option("--tol", tol, "Relative residual tolerance");
  solve->add_option("--max-iter", max_iter, "Iteration limit (0 = 10 n)");
  solve->add_flag("--direct", direct, "Dense LU instead of BiCGSTAB (n <= 2000)");
  solve->add_option("--threads", threads, "Element loop threads")->check(CLI::PositiveNumber);
  solve->add_option("--out", out_dir, "Output directory");

  std::vector<double> h_list;
  std::vector<std::string> modes;
  auto* conv = app.add_subcommand("converge", "Error against the reference over several mesh sizes");
  conv->add_option("case", case_file, "Case file")->required()->check(CLI::ExistingFile);
  conv->add_option("--h-list", h_list, "Element sizes (at least three)");
  conv->add_option("--modes", modes, "Modes to compare");
  conv->add_option("--tol", tol, "Relative residual tolerance");
  conv->add_option("--threads", threads, "Element loop threads")->check(CLI::PositiveNumber);
  conv->add_option("--out", out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  CaseHandle c;
  if (efem_status st = efem_case_load(case_file.c_str(), &c.ptr); st != EFEM_OK) return fail(st);

  auto set = [&](const char* key, const std::string& value) {
    return efem_case_set_option(c.ptr, key, value.c_str());
  };
  std::vector<std::pair<const char*, std::string>> options;
  if (!mode.empty()) options.emplace_back("mode", mode);
  if (h) options.emplace_back("h", fmt(*h));
  if (tol) options.emplace_back("tol", fmt(*tol));
  if (max_iter) options.emplace_back("max_iter", std::to_string(*max_iter));
  if (direct) options.emplace_back("direct", "true");
  options.emplace_back("threads", std::to_string(threads));
  for (const auto& [key, value] : options) {
    if (efem_status st = set(key, value); st != EFEM_OK) return fail(st);
  }

  if (*solve) {
    ResultHandle r;
    const efem_status st = efem_run(c.ptr, out_dir.c_str(), &r.ptr);
    if (r.ptr) {
      efem_solve_info info{};
      efem_result_info(r.ptr, &info);
      std::printf("unknowns %zu, elements %zu, cut %zu, enriched %zu\n", info.unknowns, info.elements,
                  info.cut_elements, info.enriched_elements);
      std::printf("iterations %d, relative residual %.3e, converged %s\n", info.iterations, info.residual,
                  info.converged ? "yes" : "no");
      std::printf("wall time %.3f s\n", info.wall_seconds);
    }
    if (st != EFEM_OK) return fail(st);
    std::printf("artifacts written to %s\n", out_dir.c_str());
    return 0;
  }

  std::string mode_list;
  for (const auto& m : modes) mode_list += m + ' ';
  char* json = nullptr;
  char* table = nullptr;
  const efem_status st = efem_converge(c.ptr, h_list.empty() ? nullptr : h_list.data(), h_list.size(),
                                       modes.empty() ? nullptr : mode_list.c_str(), &json, &table);
  if (st != EFEM_OK) return fail(st);
  std::fputs(table, stdout);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  const auto path = std::filesystem::path(out_dir) / "convergence.json";
  std::ofstream f(path, std::ios::binary);
  f << json << '\n';
  efem_string_free(json);
  efem_string_free(table);
  if (!f) {
    std::fprintf(stderr, "error: cannot write %s\n", path.string().c_str());
    return 5;
  }
  std::printf("report written to %s\n", path.string().c_str());
  return 0;
}
