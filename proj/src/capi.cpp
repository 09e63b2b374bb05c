#include "efem/efem.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <algorithm>
#include <sstream>
#include <string>

#include <spdlog/spdlog.h>

#include "error.hpp"
#include "run.hpp"

struct efem_case {
  efem::CaseConfig config;
};

struct efem_result {
  efem::CaseSummary summary;
};

namespace {

thread_local std::string last_error;

const bool quiet_by_default = [] {
  spdlog::set_level(spdlog::level::warn);
  return true;
}();

efem_status to_status(efem::ErrorCode code) {
  using efem::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return EFEM_ERR_INVALID_ARGUMENT;
    case ErrorCode::parse: return EFEM_ERR_PARSE;
    case ErrorCode::config: return EFEM_ERR_CONFIG;
    case ErrorCode::orientation: return EFEM_ERR_ORIENTATION;
    case ErrorCode::incompatible: return EFEM_ERR_INCOMPATIBLE;
    case ErrorCode::singular_system:
    case ErrorCode::singular_enrichment: return EFEM_ERR_SINGULAR;
    case ErrorCode::not_converged: return EFEM_ERR_NOT_CONVERGED;
    case ErrorCode::io: return EFEM_ERR_IO;
    case ErrorCode::outside_domain: return EFEM_ERR_OUTSIDE_DOMAIN;
  }
  return EFEM_ERR_INTERNAL;
}

template <typename F>
efem_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return EFEM_OK;
  } catch (const efem::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return EFEM_ERR_INTERNAL;
}

efem_status null_argument(const char* what) {
  last_error = std::string("null argument: ") + what;
  return EFEM_ERR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

double parse_number(const std::string& key, const char* value) {
  char* end = nullptr;
  const double v = std::strtod(value, &end);
  if (end == value || *end != '\0') throw efem::Error(efem::ErrorCode::config, "option '" + key + "' expects a number");
  return v;
}

}  // namespace

extern "C" {

const char* efem_version(void) { return "1.0.0"; }

const char* efem_last_error(void) { return last_error.c_str(); }

efem_status efem_set_log_level(const char* level) {
  if (!level) return null_argument("level");
  const auto lv = spdlog::level::from_str(level);
  if (lv == spdlog::level::off && std::string(level) != "off") {
    last_error = std::string("unknown log level '") + level + "'";
    return EFEM_ERR_INVALID_ARGUMENT;
  }
  spdlog::set_level(lv);
  return EFEM_OK;
}

int efem_exit_code(efem_status status) {
  switch (status) {
    case EFEM_OK: return 0;
    case EFEM_ERR_INVALID_ARGUMENT:
    case EFEM_ERR_PARSE:
    case EFEM_ERR_CONFIG: return efem::exit_status(efem::ErrorCode::config);
    case EFEM_ERR_NOT_CONVERGED:
    case EFEM_ERR_SINGULAR: return efem::exit_status(efem::ErrorCode::not_converged);
    case EFEM_ERR_ORIENTATION:
    case EFEM_ERR_INCOMPATIBLE:
    case EFEM_ERR_OUTSIDE_DOMAIN: return efem::exit_status(efem::ErrorCode::incompatible);
    case EFEM_ERR_IO: return efem::exit_status(efem::ErrorCode::io);
    case EFEM_ERR_INTERNAL: break;
  }
  return 1;
}

efem_status efem_case_load(const char* path, efem_case** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new efem_case{efem::load_case(path)}; });
}

efem_status efem_case_parse(const char* text, const char* base_dir, efem_case** out) {
  if (!text) return null_argument("text");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new efem_case{efem::parse_case(text, base_dir ? base_dir : "")}; });
}

void efem_case_free(efem_case* c) { delete c; }

efem_status efem_case_set_option(efem_case* c, const char* key, const char* value) {
  if (!c) return null_argument("case");
  if (!key) return null_argument("key");
  if (!value) return null_argument("value");
  return guarded([&] {
    const std::string k = key;
    efem::RunOverrides o;
    if (k == "mode") {
      o.mode = efem::parse_mode(value);
    } else if (k == "h") {
      o.h = parse_number(k, value);
    } else if (k == "tol") {
      o.tol = parse_number(k, value);
    } else if (k == "max_iter" || k == "threads") {
      const double v = parse_number(k, value);
      if (v != static_cast<int>(v)) throw efem::Error(efem::ErrorCode::config, "option '" + k + "' expects an integer");
      (k == "threads" ? o.threads : o.max_iter) = static_cast<int>(v);
    } else if (k == "direct") {
      const std::string v = value;
      if (v != "true" && v != "false") throw efem::Error(efem::ErrorCode::config, "option 'direct' expects true or false");
      if (v == "false") {
        c->config.solve.direct = false;
        return;
      }
      o.direct = true;
    } else {
      throw efem::Error(efem::ErrorCode::config, "unknown option '" + k + "'");
    }
    efem::apply_overrides(c->config, o);
  });
}

efem_status efem_solve(const efem_case* c, efem_result** out) {
  if (!c) return null_argument("case");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    const auto ref = efem::make_reference(c->config);
    *out = new efem_result{efem::evaluate_case(c->config, ref.get())};
  });
}

efem_status efem_run(const efem_case* c, const char* out_dir, efem_result** out) {
  if (!c) return null_argument("case");
  if (!out_dir) return null_argument("out_dir");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    const auto ref = efem::make_reference(c->config);
    auto* r = new efem_result{efem::evaluate_case(c->config, ref.get())};
    *out = r;
    efem::write_artifacts(c->config, r->summary, out_dir);
    efem::check_converged(r->summary);
  });
}

efem_status efem_result_info(const efem_result* r, efem_solve_info* info) {
  if (!r) return null_argument("result");
  if (!info) return null_argument("info");
  const auto& s = r->summary;
  info->unknowns = s.result.unknowns;
  info->elements = s.elements;
  info->cut_elements = s.result.cut_elements;
  info->enriched_elements = s.result.enriched_elements;
  info->iterations = s.result.report.iterations;
  info->residual = s.result.report.residual;
  info->converged = s.result.report.converged ? 1 : 0;
  info->wall_seconds = s.seconds;
  return EFEM_OK;
}

efem_status efem_result_summary_json(const efem_result* r, char** json) {
  if (!r) return null_argument("result");
  if (!json) return null_argument("json");
  *json = nullptr;
  return guarded([&] { *json = dup_string(efem::summary_json(r->summary).dump(2)); });
}

efem_status efem_result_eval(const efem_result* r, const double x[3], int side, double* phi, double E[3]) {
  if (!r) return null_argument("result");
  if (!x) return null_argument("x");
  if (!phi) return null_argument("phi");
  if (side != 1 && side != -1) {
    last_error = "side must be +1 or -1";
    return EFEM_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const efem::FieldValue v = r->summary.result.field->evaluate({x[0], x[1], x[2]}, side);
    *phi = v.phi;
    if (E) {
      E[0] = v.E.x;
      E[1] = v.E.y;
      E[2] = v.E.z;
    }
  });
}

efem_status efem_result_nodal(const efem_result* r, double* values, size_t capacity, size_t* written) {
  if (!r) return null_argument("result");
  if (!written) return null_argument("written");
  if (!values && capacity > 0) return null_argument("values");
  const auto& phi = r->summary.result.field->nodal();
  const size_t n = std::min(capacity, phi.size());
  std::copy_n(phi.begin(), n, values);
  *written = n;
  return EFEM_OK;
}

void efem_result_free(efem_result* r) { delete r; }

efem_status efem_converge(const efem_case* c, const double* h_list, size_t n_h, const char* modes, char** json,
                          char** table) {
  if (!c) return null_argument("case");
  if (h_list == nullptr && n_h > 0) return null_argument("h_list");
  if (json) *json = nullptr;
  if (table) *table = nullptr;
  return guarded([&] {
    std::vector<double> hs = h_list ? std::vector<double>(h_list, h_list + n_h) : c->config.h_list;
    std::vector<efem::Mode> ms = c->config.modes;
    if (modes) {
      ms.clear();
      std::istringstream in(modes);
      for (std::string m; in >> m;) ms.push_back(efem::parse_mode(m));
    }
    if (ms.empty()) ms = {efem::Mode::efem, efem::Mode::efem_no_d, efem::Mode::standard_fem};
    const auto report = efem::run_convergence(c->config, hs, ms);
    std::string j = efem::convergence_json(report).dump(2);
    std::string t = efem::convergence_table(report);
    if (json) *json = dup_string(j);
    if (table) {
      try {
        *table = dup_string(t);
      } catch (...) {
        if (json) {
          std::free(*json);
          *json = nullptr;
        }
        throw;
      }
    }
  });
}

void efem_string_free(char* s) { std::free(s); }

}  // extern "C"
