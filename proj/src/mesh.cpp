#include "mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

#include "error.hpp"

namespace efem {

namespace {

// Gradients of barycentric coordinates: rows of M^{-1}^T where M holds edge vectors.
void compute_gradients(ElementGeometry& g) {
  const auto& x = g.coords;
  if (g.dim == 2) {
    const Vec3 a = x[1] - x[0];
    const Vec3 b = x[2] - x[0];
    const double det = a.x * b.y - a.y * b.x;
    g.measure = 0.5 * det;
    g.grads[1] = Vec3{b.y, -b.x, 0.0} * (1.0 / det);
    g.grads[2] = Vec3{-a.y, a.x, 0.0} * (1.0 / det);
    g.grads[0] = -(g.grads[1] + g.grads[2]);
    g.grads[3] = {};
    return;
  }
  const Vec3 a = x[1] - x[0];
  const Vec3 b = x[2] - x[0];
  const Vec3 c = x[3] - x[0];
  const double det = dot(cross(a, b), c);
  g.measure = det / 6.0;
  g.grads[1] = cross(b, c) * (1.0 / det);
  g.grads[2] = cross(c, a) * (1.0 / det);
  g.grads[3] = cross(a, b) * (1.0 / det);
  g.grads[0] = -(g.grads[1] + g.grads[2] + g.grads[3]);
}

using FaceKey = std::array<int, 3>;

FaceKey face_key(const Element& el, int dim, int f) {
  FaceKey k{-1, -1, -1};
  const auto local = local_face_nodes(dim, f);
  for (int i = 0; i < dim; ++i) k[static_cast<std::size_t>(i)] = el[static_cast<std::size_t>(local[static_cast<std::size_t>(i)])];
  std::sort(k.begin(), k.begin() + dim);
  return k;
}

}  // namespace

std::array<int, 3> local_face_nodes(int dim, int f) {
  std::array<int, 3> out{-1, -1, -1};
  int k = 0;
  for (int i = 0; i <= dim; ++i) {
    if (i != f) out[static_cast<std::size_t>(k++)] = i;
  }
  return out;
}

ElementGeometry make_geometry(int dim, std::span<const Vec3> coords) {
  ElementGeometry g;
  g.dim = dim;
  for (int i = 0; i <= dim; ++i) g.coords[static_cast<std::size_t>(i)] = coords[static_cast<std::size_t>(i)];
  compute_gradients(g);
  return g;
}

std::array<double, 4> ElementGeometry::barycentric(const Vec3& x) const {
  std::array<double, 4> lam{};
  const Vec3 rel = x - coords[0];
  double rest = 1.0;
  for (int i = 1; i <= dim; ++i) {
    lam[static_cast<std::size_t>(i)] = dot(grads[static_cast<std::size_t>(i)], rel);
    rest -= lam[static_cast<std::size_t>(i)];
  }
  lam[0] = rest;
  return lam;
}

double ElementGeometry::size() const {
  double h = 0.0;
  for (int i = 0; i <= dim; ++i) {
    for (int j = i + 1; j <= dim; ++j) {
      h = std::max(h, norm(coords[static_cast<std::size_t>(i)] - coords[static_cast<std::size_t>(j)]));
    }
  }
  return h;
}

Vec3 ElementGeometry::face_normal(int f) const {
  const Vec3& g = grads[static_cast<std::size_t>(f)];
  return g * (-1.0 / norm(g));
}

Vec3 ElementGeometry::centroid() const {
  Vec3 c{};
  for (int i = 0; i <= dim; ++i) c += coords[static_cast<std::size_t>(i)];
  return c * (1.0 / (dim + 1));
}

Mesh::Mesh(int dim, std::vector<Vec3> nodes, std::vector<Element> elements,
           std::vector<BoundaryFace> boundary, std::vector<std::string> tag_names)
    : dim_(dim),
      nodes_(std::move(nodes)),
      elements_(std::move(elements)),
      boundary_(std::move(boundary)),
      tag_names_(std::move(tag_names)) {
  if (dim_ != 2 && dim_ != 3) {
    throw Error(ErrorCode::invalid_argument, "mesh dimension must be 2 or 3");
  }
  validate();
  build_adjacency();
}

int Mesh::find_tag(const std::string& name) const {
  const auto it = std::find(tag_names_.begin(), tag_names_.end(), name);
  return it == tag_names_.end() ? -1 : static_cast<int>(it - tag_names_.begin());
}

ElementGeometry Mesh::geometry(std::size_t e) const {
  std::array<Vec3, 4> c{};
  const auto el = element(e);
  for (std::size_t i = 0; i < el.size(); ++i) c[i] = nodes_[static_cast<std::size_t>(el[i])];
  return make_geometry(dim_, std::span<const Vec3>(c.data(), el.size()));
}

void Mesh::validate() const {
  const int n = dim_ + 1;
  const auto nn = static_cast<int>(nodes_.size());
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const auto& el = elements_[e];
    for (int i = 0; i < n; ++i) {
      const int v = el[static_cast<std::size_t>(i)];
      if (v < 0 || v >= nn) {
        throw Error(ErrorCode::invalid_argument,
                    "element " + std::to_string(e) + " references dangling node " + std::to_string(v));
      }
      for (int j = 0; j < i; ++j) {
        if (el[static_cast<std::size_t>(j)] == v) {
          throw Error(ErrorCode::invalid_argument,
                      "element " + std::to_string(e) + " repeats node " + std::to_string(v));
        }
      }
    }
    std::array<Vec3, 4> c{};
    for (int i = 0; i < n; ++i) c[static_cast<std::size_t>(i)] = nodes_[static_cast<std::size_t>(el[static_cast<std::size_t>(i)])];
    if (!(signed_measure(dim_, c.data()) > 0.0)) {
      throw Error(ErrorCode::orientation,
                  "element " + std::to_string(e) + " has non-positive measure under its node ordering");
    }
  }
}

void Mesh::build_adjacency() {
  const int nf = dim_ + 1;
  std::vector<std::tuple<FaceKey, int, int>> faces;
  faces.reserve(elements_.size() * static_cast<std::size_t>(nf));
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    for (int f = 0; f < nf; ++f) faces.emplace_back(face_key(elements_[e], dim_, f), static_cast<int>(e), f);
  }
  std::sort(faces.begin(), faces.end());

  neighbors_.assign(elements_.size(), {-1, -1, -1, -1});
  std::vector<std::pair<int, int>> open_faces;  // (element, face) with no partner
  interior_faces_ = 0;
  for (std::size_t i = 0; i < faces.size();) {
    std::size_t j = i + 1;
    while (j < faces.size() && std::get<0>(faces[j]) == std::get<0>(faces[i])) ++j;
    if (j - i > 2) {
      throw Error(ErrorCode::invalid_argument, "non-manifold face shared by more than two elements");
    }
    if (j - i == 2) {
      const auto [k0, e0, f0] = faces[i];
      const auto [k1, e1, f1] = faces[i + 1];
      neighbors_[static_cast<std::size_t>(e0)][static_cast<std::size_t>(f0)] = e1;
      neighbors_[static_cast<std::size_t>(e1)][static_cast<std::size_t>(f1)] = e0;
      ++interior_faces_;
    } else {
      open_faces.emplace_back(std::get<1>(faces[i]), std::get<2>(faces[i]));
    }
    i = j;
  }

  // Tags must cover each boundary face exactly once and nothing else.
  std::vector<std::pair<int, int>> tagged;
  tagged.reserve(boundary_.size());
  for (const auto& b : boundary_) {
    if (b.element < 0 || static_cast<std::size_t>(b.element) >= elements_.size() || b.local_face < 0 ||
        b.local_face > dim_) {
      throw Error(ErrorCode::invalid_argument, "boundary record references an invalid element face");
    }
    if (b.tag < 0 || static_cast<std::size_t>(b.tag) >= tag_names_.size()) {
      throw Error(ErrorCode::invalid_argument, "boundary record references an unknown tag");
    }
    if (neighbors_[static_cast<std::size_t>(b.element)][static_cast<std::size_t>(b.local_face)] != -1) {
      throw Error(ErrorCode::invalid_argument, "boundary tag on interior face of element " +
                                                   std::to_string(b.element));
    }
    tagged.emplace_back(b.element, b.local_face);
  }
  std::sort(tagged.begin(), tagged.end());
  if (std::adjacent_find(tagged.begin(), tagged.end()) != tagged.end()) {
    throw Error(ErrorCode::invalid_argument, "boundary face tagged more than once");
  }
  std::sort(open_faces.begin(), open_faces.end());
  if (tagged != open_faces) {
    throw Error(ErrorCode::invalid_argument, "untagged boundary faces present");
  }
}

Mesh generate_structured(int dim, int nx, int ny, int nz, const Box& box) {
  if (dim != 2 && dim != 3) throw Error(ErrorCode::invalid_argument, "dim must be 2 or 3");
  if (nx < 1 || ny < 1 || (dim == 3 && nz < 1)) {
    throw Error(ErrorCode::invalid_argument, "subdivision counts must be >= 1");
  }
  for (int k = 0; k < dim; ++k) {
    if (!(box.hi[static_cast<std::size_t>(k)] > box.lo[static_cast<std::size_t>(k)])) {
      throw Error(ErrorCode::invalid_argument, "box must have positive extent");
    }
  }
  if (dim == 2) nz = 0;
  const Vec3 step{(box.hi.x - box.lo.x) / nx, (box.hi.y - box.lo.y) / ny,
                  dim == 3 ? (box.hi.z - box.lo.z) / nz : 0.0};
  auto coord = [&](int i, int n, int axis) {
    // Exact end points avoid drift on the box faces.
    if (i == n) return box.hi[static_cast<std::size_t>(axis)];
    return box.lo[static_cast<std::size_t>(axis)] + i * step[static_cast<std::size_t>(axis)];
  };

  std::vector<Vec3> nodes;
  auto id = [&](int i, int j, int k) { return (k * (ny + 1) + j) * (nx + 1) + i; };
  for (int k = 0; k <= nz; ++k) {
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i <= nx; ++i) {
        nodes.push_back({coord(i, nx, 0), coord(j, ny, 1), dim == 3 ? coord(k, nz, 2) : 0.0});
      }
    }
  }

  std::vector<Element> elements;
  if (dim == 2) {
    elements.reserve(static_cast<std::size_t>(2 * nx * ny));
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const int a = id(i, j, 0), b = id(i + 1, j, 0), c = id(i + 1, j + 1, 0), d = id(i, j + 1, 0);
        elements.push_back({a, b, c, -1});
        elements.push_back({a, c, d, -1});
      }
    }
  } else {
    static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    elements.reserve(static_cast<std::size_t>(6 * nx * ny * nz));
    for (int k = 0; k < nz; ++k) {
      for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
          for (const auto& p : perms) {
            std::array<int, 3> off{0, 0, 0};
            Element el{id(i, j, k), 0, 0, 0};
            for (int s = 0; s < 3; ++s) {
              off[static_cast<std::size_t>(p[s])] = 1;
              el[static_cast<std::size_t>(s + 1)] = id(i + off[0], j + off[1], k + off[2]);
            }
            std::array<Vec3, 4> c{};
            for (std::size_t v = 0; v < 4; ++v) c[v] = nodes[static_cast<std::size_t>(el[v])];
            if (signed_measure(3, c.data()) < 0.0) std::swap(el[1], el[2]);
            elements.push_back(el);
          }
        }
      }
    }
  }

  std::vector<std::string> tags = {"left", "right", "bottom", "top"};
  if (dim == 3) {
    tags.emplace_back("front");
    tags.emplace_back("back");
  }

  // Tag boundary faces by the box side their centroid lies on.
  std::vector<BoundaryFace> boundary;
  {
    std::vector<std::tuple<FaceKey, int, int>> faces;
    for (std::size_t e = 0; e < elements.size(); ++e) {
      for (int f = 0; f <= dim; ++f) faces.emplace_back(face_key(elements[e], dim, f), static_cast<int>(e), f);
    }
    std::sort(faces.begin(), faces.end());
    for (std::size_t i = 0; i < faces.size();) {
      std::size_t j = i + 1;
      while (j < faces.size() && std::get<0>(faces[j]) == std::get<0>(faces[i])) ++j;
      if (j - i == 1) {
        const auto& [key, e, f] = faces[i];
        Vec3 c{};
        for (int v = 0; v < dim; ++v) c += nodes[static_cast<std::size_t>(key[static_cast<std::size_t>(v)])];
        c *= 1.0 / dim;
        int tag = -1;
        double best = 1e300;
        for (int axis = 0; axis < dim; ++axis) {
          const double lo = std::abs(c[static_cast<std::size_t>(axis)] - box.lo[static_cast<std::size_t>(axis)]);
          const double hi = std::abs(c[static_cast<std::size_t>(axis)] - box.hi[static_cast<std::size_t>(axis)]);
          if (lo < best) {
            best = lo;
            tag = 2 * axis;
          }
          if (hi < best) {
            best = hi;
            tag = 2 * axis + 1;
          }
        }
        boundary.push_back({e, f, tag});
      }
      i = j;
    }
  }
  return Mesh(dim, std::move(nodes), std::move(elements), std::move(boundary), std::move(tags));
}

namespace {

struct LineReader {
  std::istringstream in;
  int line_no = 0;

  explicit LineReader(const std::string& text) : in(text) {}

  // Next non-empty, comment-stripped line split into tokens; false at EOF.
  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      tokens.clear();
      for (std::string t; ls >> t;) tokens.push_back(t);
      if (!tokens.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::parse, "mesh parse error at line " + std::to_string(line_no) + ": " + msg);
  }
};

template <typename T>
T parse_number(const LineReader& r, const std::string& tok) {
  std::size_t pos = 0;
  try {
    T v;
    if constexpr (std::is_same_v<T, double>) {
      v = std::stod(tok, &pos);
    } else {
      v = static_cast<T>(std::stol(tok, &pos));
    }
    if (pos == tok.size()) return v;
  } catch (const std::exception&) {
  }
  r.fail("invalid number '" + tok + "'");
}

}  // namespace

Mesh parse_mesh(const std::string& text) {
  LineReader r(text);
  std::vector<std::string> tok;
  if (!r.next(tok)) r.fail("missing header");
  if (tok.size() != 4) r.fail("header must be 'dim n_nodes n_elements n_boundary_faces'");
  const int dim = parse_number<int>(r, tok[0]);
  const long nn = parse_number<long>(r, tok[1]);
  const long ne = parse_number<long>(r, tok[2]);
  const long nb = parse_number<long>(r, tok[3]);
  if (dim != 2 && dim != 3) r.fail("dim must be 2 or 3");
  if (nn < 0 || ne < 0 || nb < 0) r.fail("negative counts");

  std::vector<Vec3> nodes;
  nodes.reserve(static_cast<std::size_t>(nn));
  for (long i = 0; i < nn; ++i) {
    if (!r.next(tok)) r.fail("unexpected end of file in node section");
    if (static_cast<int>(tok.size()) != dim) r.fail("node line needs " + std::to_string(dim) + " coordinates");
    Vec3 p{};
    for (int k = 0; k < dim; ++k) p[static_cast<std::size_t>(k)] = parse_number<double>(r, tok[static_cast<std::size_t>(k)]);
    nodes.push_back(p);
  }

  std::vector<Element> elements;
  elements.reserve(static_cast<std::size_t>(ne));
  for (long e = 0; e < ne; ++e) {
    if (!r.next(tok)) r.fail("unexpected end of file in element section");
    if (static_cast<int>(tok.size()) != dim + 1) r.fail("element line needs " + std::to_string(dim + 1) + " indices");
    Element el{-1, -1, -1, -1};
    for (int k = 0; k <= dim; ++k) {
      const long v = parse_number<long>(r, tok[static_cast<std::size_t>(k)]);
      if (v < 0 || v >= nn) r.fail("dangling node index " + std::to_string(v));
      el[static_cast<std::size_t>(k)] = static_cast<int>(v);
    }
    elements.push_back(el);
  }

  std::vector<std::string> tags;
  std::vector<BoundaryFace> boundary;
  boundary.reserve(static_cast<std::size_t>(nb));
  for (long b = 0; b < nb; ++b) {
    if (!r.next(tok)) r.fail("unexpected end of file in boundary section");
    if (tok.size() != 3) r.fail("boundary line must be 'elem local_face tag'");
    const long e = parse_number<long>(r, tok[0]);
    const long f = parse_number<long>(r, tok[1]);
    if (e < 0 || e >= ne) r.fail("boundary element index out of range");
    if (f < 0 || f > dim) r.fail("local face index out of range");
    auto it = std::find(tags.begin(), tags.end(), tok[2]);
    if (it == tags.end()) it = tags.insert(tags.end(), tok[2]);
    boundary.push_back({static_cast<int>(e), static_cast<int>(f), static_cast<int>(it - tags.begin())});
  }
  if (r.next(tok)) r.fail("trailing content after boundary section");

  return Mesh(dim, std::move(nodes), std::move(elements), std::move(boundary), std::move(tags));
}

Mesh read_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open mesh file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_mesh(ss.str());
}

std::string format_mesh(const Mesh& mesh) {
  std::string out;
  char buf[128];
  const int dim = mesh.dim();
  std::snprintf(buf, sizeof buf, "%d %zu %zu %zu\n", dim, mesh.num_nodes(), mesh.num_elements(),
                mesh.boundary_faces().size());
  out += buf;
  for (const auto& p : mesh.nodes()) {
    if (dim == 2) {
      std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x, p.y);
    } else {
      std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", p.x, p.y, p.z);
    }
    out += buf;
  }
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto el = mesh.element(e);
    for (std::size_t i = 0; i < el.size(); ++i) {
      out += std::to_string(el[i]);
      out += i + 1 < el.size() ? ' ' : '\n';
    }
  }
  for (const auto& b : mesh.boundary_faces()) {
    out += std::to_string(b.element) + ' ' + std::to_string(b.local_face) + ' ' +
           mesh.tag_names()[static_cast<std::size_t>(b.tag)] + '\n';
  }
  return out;
}

void write_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write mesh file " + path.string());
  out << format_mesh(mesh);
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

}  // namespace efem
