#include "case_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "error.hpp"

namespace efem {

namespace {

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

using Section = std::map<std::string, Entry>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail_at(int line, const std::string& msg) {
  throw Error(ErrorCode::parse, "case parse error at line " + std::to_string(line) + ": " + msg);
}

std::map<std::string, Section> tokenize(const std::string& text) {
  std::map<std::string, Section> out;
  std::istringstream in(text);
  std::string raw;
  std::string current;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find_first_of("#;");
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail_at(line, "unterminated section header");
      current = trim(s.substr(1, s.size() - 2));
      if (current.empty()) fail_at(line, "empty section name");
      if (out.count(current)) fail_at(line, "duplicate section [" + current + "]");
      out[current];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail_at(line, "expected key = value");
    if (current.empty()) fail_at(line, "key outside of any section");
    const std::string key = trim(s.substr(0, eq));
    if (key.empty()) fail_at(line, "empty key");
    auto& sec = out[current];
    if (sec.count(key)) fail_at(line, "duplicate key '" + key + "'");
    sec[key] = Entry{trim(s.substr(eq + 1)), line, false};
  }
  return out;
}

double to_double(const std::string& tok, int line, const std::string& field) {
  if (tok == "inf" || tok == "+inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto* end = tok.data() + tok.size();
  const auto [p, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || p != end) fail_at(line, "'" + field + "' expects a number, got '" + tok + "'");
  return v;
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

/// Typed access to one section, remembering which keys were read.
class Reader {
 public:
  Reader(std::map<std::string, Section>& all, std::string name)
      : name_(std::move(name)), sec_(all.count(name_) ? &all[name_] : nullptr) {}

  bool present() const { return sec_ != nullptr; }
  bool has(const std::string& key) const { return sec_ && sec_->count(key); }

  const Entry& entry(const std::string& key) {
    if (!has(key)) throw Error(ErrorCode::config, "missing required field '" + name_ + "." + key + "'");
    Entry& e = sec_->at(key);
    e.used = true;
    return e;
  }
  std::string string(const std::string& key) { return entry(key).value; }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }
  std::vector<double> numbers(const std::string& key) {
    const Entry& e = entry(key);
    std::vector<double> out;
    for (const auto& w : words(e.value)) out.push_back(to_double(w, e.line, name_ + "." + key));
    return out;
  }
  std::vector<double> numbers(const std::string& key, std::size_t count) {
    auto v = numbers(key);
    if (v.size() != count) {
      fail_at(sec_->at(key).line, "'" + name_ + "." + key + "' expects " + std::to_string(count) + " numbers");
    }
    return v;
  }
  double number(const std::string& key) { return numbers(key, 1)[0]; }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }
  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const double v = number(key);
    if (v != std::floor(v)) fail_at(sec_->at(key).line, "'" + name_ + "." + key + "' expects an integer");
    return static_cast<int>(v);
  }
  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const Entry& e = entry(key);
    if (e.value == "true" || e.value == "yes" || e.value == "1") return true;
    if (e.value == "false" || e.value == "no" || e.value == "0") return false;
    fail_at(e.line, "'" + name_ + "." + key + "' expects true or false");
  }
  int line(const std::string& key) const { return sec_->at(key).line; }
  /// Keys starting with prefix, in file order.
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const {
    std::vector<std::pair<int, std::string>> found;
    if (sec_) {
      for (const auto& [k, e] : *sec_) {
        if (k.rfind(prefix, 0) == 0) found.emplace_back(e.line, k);
      }
    }
    std::sort(found.begin(), found.end());
    std::vector<std::string> out;
    for (auto& f : found) out.push_back(f.second);
    return out;
  }
  void check_all_used() const {
    if (!sec_) return;
    for (const auto& [k, e] : *sec_) {
      if (!e.used) fail_at(e.line, "unknown key '" + k + "' in [" + name_ + "]");
    }
  }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  Section* sec_;
};

Vec3 to_vec(const std::vector<double>& v) {
  Vec3 out{};
  for (std::size_t k = 0; k < v.size() && k < 3; ++k) out[static_cast<int>(k)] = v[k];
  return out;
}

std::vector<LineSpec> read_lines(Reader& r, const std::string& prefix, int dim, bool with_count) {
  std::vector<LineSpec> out;
  for (const auto& key : r.keys_with_prefix(prefix)) {
    const auto v = r.numbers(key);
    const std::size_t coords = 2 * static_cast<std::size_t>(dim);
    if (v.size() != coords + (with_count ? 1 : 0)) {
      fail_at(r.line(key), "'" + key + "' expects " + std::to_string(coords) + " coordinates" +
                               (with_count ? " and a sample count" : ""));
    }
    LineSpec line;
    line.name = key.substr(prefix.size());
    if (line.name.empty()) fail_at(r.line(key), "line name missing after '" + prefix + "'");
    line.segment.a = to_vec({v.begin(), v.begin() + dim});
    line.segment.b = to_vec({v.begin() + dim, v.begin() + 2 * dim});
    if (with_count) {
      line.count = static_cast<int>(v.back());
      if (line.count < 2 || v.back() != line.count) fail_at(r.line(key), "sample count must be an integer >= 2");
    }
    out.push_back(line);
  }
  return out;
}

}  // namespace

std::vector<std::string> structured_tags(int dim) {
  std::vector<std::string> tags = {"left", "right", "bottom", "top"};
  if (dim == 3) {
    tags.emplace_back("front");
    tags.emplace_back("back");
  }
  return tags;
}

CaseConfig parse_case(const std::string& text, const std::filesystem::path& base_dir, const std::string& name) {
  auto sections = tokenize(text);
  static const std::set<std::string> known = {"mesh",   "levelset", "materials", "boundary",
                                               "solver", "output",   "analysis"};
  for (const auto& [s, sec] : sections) {
    if (!known.count(s)) {
      const int line = sec.empty() ? 0 : sec.begin()->second.line;
      throw Error(ErrorCode::parse, "case parse error near line " + std::to_string(line) + ": unknown section [" + s + "]");
    }
  }

  CaseConfig cfg;
  cfg.name = name;

  // [mesh]
  Reader mesh(sections, "mesh");
  if (!mesh.present()) throw Error(ErrorCode::config, "missing required section [mesh]");
  MeshSpec& ms = cfg.problem.mesh;
  const bool has_file = mesh.has("file");
  const bool has_structured = mesh.has("h") || mesh.has("n");
  if (has_file == has_structured) {
    throw Error(ErrorCode::config, "[mesh] needs exactly one of 'file' or a structured spec ('h' or 'n')");
  }
  if (has_file) {
    std::filesystem::path p = mesh.string("file");
    ms.file = p.is_absolute() ? p : base_dir / p;
    ms.dim = static_cast<int>(mesh.number("dim"));
    if (ms.dim != 2 && ms.dim != 3) fail_at(mesh.line("dim"), "mesh.dim must be 2 or 3");
  } else {
    ms.dim = mesh.integer("dim", 2);
    if (ms.dim != 2 && ms.dim != 3) fail_at(mesh.line("dim"), "mesh.dim must be 2 or 3");
    if (mesh.has("box")) {
      const auto b = mesh.numbers("box", 2 * static_cast<std::size_t>(ms.dim));
      ms.box.lo = to_vec({b.begin(), b.begin() + ms.dim});
      ms.box.hi = to_vec({b.begin() + ms.dim, b.end()});
      for (int k = 0; k < ms.dim; ++k) {
        if (!(ms.box.hi[k] > ms.box.lo[k])) fail_at(mesh.line("box"), "box upper corner must exceed the lower one");
      }
    }
    if (mesh.has("h") && mesh.has("n")) throw Error(ErrorCode::config, "[mesh] takes 'h' or 'n', not both");
    if (mesh.has("h")) {
      ms.h = mesh.number("h");
      if (!(ms.h > 0.0)) fail_at(mesh.line("h"), "mesh.h must be positive");
    } else {
      const auto n = mesh.numbers("n", static_cast<std::size_t>(ms.dim));
      for (int k = 0; k < ms.dim; ++k) {
        if (n[k] < 1 || n[k] != std::floor(n[k])) fail_at(mesh.line("n"), "mesh.n entries must be positive integers");
        ms.counts[k] = static_cast<int>(n[k]);
      }
    }
  }
  mesh.check_all_used();

  // [levelset]
  Reader ls(sections, "levelset");
  if (!ls.present()) throw Error(ErrorCode::config, "missing required section [levelset]");
  const std::string type = ls.string("type");
  auto inside_positive = [&]() {
    const std::string side = ls.string("inside", "negative");
    if (side != "positive" && side != "negative") fail_at(ls.line("inside"), "levelset.inside must be positive or negative");
    return side == "positive";
  };
  const int dim = ms.dim;
  if (type == "plane") {
    const auto point = ls.numbers("point");
    const auto normal = ls.numbers("normal");
    if (dim > 0 && (point.size() != static_cast<std::size_t>(dim) || normal.size() != point.size())) {
      fail_at(ls.line("point"), "plane point and normal need " + std::to_string(dim) + " components");
    }
    cfg.problem.levelset = LevelSet::plane(to_vec(point), to_vec(normal));
  } else if (type == "circle" || type == "sphere") {
    const std::size_t nc = type == "circle" ? 2 : 3;
    const Vec3 c = to_vec(ls.numbers("center", nc));
    const double r = ls.number("radius");
    const bool ip = inside_positive();
    cfg.problem.levelset = type == "circle" ? LevelSet::circle(c, r, ip) : LevelSet::sphere(c, r, ip);
  } else if (type == "nodal") {
    cfg.problem.levelset = LevelSet::nodal(ls.numbers("values"));
  } else {
    fail_at(ls.line("type"), "unknown levelset.type '" + type + "'");
  }
  ls.check_all_used();

  // [materials]
  Reader mat(sections, "materials");
  if (!mat.present()) throw Error(ErrorCode::config, "missing required field 'materials.eps1' (section [materials] absent)");
  if (mat.has("Q")) {
    if (mat.has("eps1") || mat.has("eps2")) throw Error(ErrorCode::config, "[materials] takes Q or eps1/eps2, not both");
    const double q = mat.number("Q");
    if (!(q > 0.0) || !std::isfinite(q)) fail_at(mat.line("Q"), "materials.Q must be positive and finite");
    cfg.problem.materials = MaterialPair::from_ratio(q);
  } else {
    const double e1 = mat.number("eps1");
    const double e2 = mat.number("eps2");
    try {
      cfg.problem.materials = MaterialPair(e1, e2);
    } catch (const Error& e) {
      throw Error(ErrorCode::config, std::string("materials: ") + e.what());
    }
  }
  mat.check_all_used();

  // [boundary]
  Reader bnd(sections, "boundary");
  if (!bnd.present()) throw Error(ErrorCode::config, "missing required section [boundary]");
  for (const auto& tag : bnd.keys_with_prefix("")) {
    const auto w = words(bnd.string(tag));
    const int line = bnd.line(tag);
    if (w.size() == 2 && w[0] == "dirichlet") {
      cfg.problem.bcs[tag] = BoundaryCondition::dirichlet(to_double(w[1], line, "boundary." + tag));
    } else if (w.size() == 1 && w[0] == "neumann") {
      cfg.problem.bcs[tag] = BoundaryCondition::neumann();
    } else {
      fail_at(line, "boundary." + tag + " expects 'dirichlet <value>' or 'neumann'");
    }
  }
  if (!ms.file) {
    const auto tags = structured_tags(ms.dim);
    for (const auto& [tag, bc] : cfg.problem.bcs) {
      if (std::find(tags.begin(), tags.end(), tag) == tags.end()) {
        throw Error(ErrorCode::config, "boundary tag '" + tag + "' does not exist on the structured mesh");
      }
    }
  }

  // [solver]
  Reader sol(sections, "solver");
  SolveOptions& so = cfg.solve;
  try {
    so.assembly.mode = parse_mode(sol.string("mode", "efem"));
  } catch (const Error& e) {
    fail_at(sol.line("mode"), e.what());
  }
  so.solver.tol = sol.number("tol", so.solver.tol);
  if (!(so.solver.tol > 0.0)) fail_at(sol.line("tol"), "solver.tol must be positive");
  so.solver.max_iter = sol.integer("max_iter", 0);
  if (so.solver.max_iter < 0) fail_at(sol.line("max_iter"), "solver.max_iter must be non-negative");
  so.solver.precondition = sol.boolean("precondition", true);
  so.direct = sol.boolean("direct", false);
  so.assembly.threads = sol.integer("threads", 1);
  if (so.assembly.threads < 1) fail_at(sol.line("threads"), "solver.threads must be at least 1");
  so.assembly.d_on_boundary = sol.boolean("d_on_boundary", true);
  so.assembly.snap = sol.number("snap", default_snap_tolerance);
  sol.check_all_used();

  const int line_dim = ms.dim;

  // [output]
  Reader out(sections, "output");
  cfg.vtk = out.boolean("vtk", false);
  cfg.csv_lines = read_lines(out, "line.", line_dim, true);
  out.check_all_used();

  // [analysis]
  Reader an(sections, "analysis");
  if (an.has("reference")) {
    const auto w = words(an.string("reference"));
    const int line = an.line("reference");
    ReferenceSpec ref;
    if (w.size() == 1 && w[0] == "analytic") {
      ref.kind = ReferenceKind::analytic;
    } else if (w.size() == 2 && (w[0] == "conforming" || w[0] == "self")) {
      ref.kind = w[0] == "self" ? ReferenceKind::self : ReferenceKind::conforming;
      ref.h = to_double(w[1], line, "analysis.reference");
      if (!(ref.h > 0.0)) fail_at(line, "reference element size must be positive");
    } else if (!(w.size() == 1 && w[0] == "none")) {
      fail_at(line, "analysis.reference expects 'analytic', 'conforming <h>', 'self <h>' or 'none'");
    }
    if (!(w.size() == 1 && w[0] == "none")) cfg.reference = ref;
  }
  if (an.has("h_list")) cfg.h_list = an.numbers("h_list");
  if (an.has("modes")) {
    for (const auto& m : words(an.string("modes"))) {
      try {
        cfg.modes.push_back(parse_mode(m));
      } catch (const Error& e) {
        fail_at(an.line("modes"), e.what());
      }
    }
  }
  cfg.potential_scale = an.number("potential_scale", 1.0);
  cfg.field_scale = an.number("field_scale", 1.0);
  if (!(cfg.potential_scale > 0.0) || !(cfg.field_scale > 0.0)) {
    throw Error(ErrorCode::config, "analysis scales must be positive");
  }
  cfg.transects = read_lines(an, "transect.", line_dim, false);
  cfg.mismatch = read_lines(an, "mismatch.", line_dim, false);
  an.check_all_used();
  return cfg;
}

CaseConfig load_case(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read case file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_case(ss.str(), path.parent_path(), path.stem().string());
}

}  // namespace efem
