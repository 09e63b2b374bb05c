#include "solution.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace efem {

namespace {

constexpr double bary_tol = 1e-10;
constexpr double t_tol = 1e-12;

}  // namespace

PointLocator::PointLocator(const Mesh& mesh) : mesh_(&mesh) {
  const std::size_t ne = mesh.num_elements();
  geometry_.reserve(ne);
  for (std::size_t e = 0; e < ne; ++e) geometry_.push_back(mesh.geometry(e));
  lo_ = hi_ = mesh.node(0);
  for (const auto& p : mesh.nodes()) {
    for (std::size_t k = 0; k < 3; ++k) {
      lo_[k] = std::min(lo_[k], p[k]);
      hi_[k] = std::max(hi_[k], p[k]);
    }
  }
  const int dim = mesh.dim();
  const int per_axis = std::max(1, static_cast<int>(std::lround(std::pow(static_cast<double>(ne) / 2.0, 1.0 / dim))));
  for (int k = 0; k < dim; ++k) dims_[k] = per_axis;
  bins_.resize(static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2]);

  auto cell = [&](double v, int k) {
    const double span = hi_[k] - lo_[k];
    if (span <= 0.0) return 0;
    return std::clamp(static_cast<int>((v - lo_[k]) / span * dims_[k]), 0, dims_[k] - 1);
  };
  for (std::size_t e = 0; e < ne; ++e) {
    Vec3 blo = geometry_[e].coords[0], bhi = blo;
    for (int i = 1; i <= dim; ++i) {
      for (std::size_t k = 0; k < 3; ++k) {
        blo[k] = std::min(blo[k], geometry_[e].coords[i][k]);
        bhi[k] = std::max(bhi[k], geometry_[e].coords[i][k]);
      }
    }
    const double pad = 1e-9 * geometry_[e].size();
    std::array<int, 3> c0{0, 0, 0}, c1{0, 0, 0};
    for (int k = 0; k < dim; ++k) {
      c0[k] = cell(blo[k] - pad, k);
      c1[k] = cell(bhi[k] + pad, k);
    }
    for (int z = c0[2]; z <= c1[2]; ++z) {
      for (int y = c0[1]; y <= c1[1]; ++y) {
        for (int x = c0[0]; x <= c1[0]; ++x) {
          bins_[(static_cast<std::size_t>(z) * dims_[1] + y) * dims_[0] + x].push_back(static_cast<int>(e));
        }
      }
    }
  }
}

const std::vector<int>& PointLocator::bin(const Vec3& x) const {
  std::array<int, 3> c{0, 0, 0};
  for (int k = 0; k < mesh_->dim(); ++k) {
    const double span = hi_[k] - lo_[k];
    const double rel = span > 0.0 ? (x[k] - lo_[k]) / span : 0.0;
    if (rel < -1e-9 || rel > 1.0 + 1e-9) return empty_;
    c[k] = std::clamp(static_cast<int>(rel * dims_[k]), 0, dims_[k] - 1);
  }
  return bins_[(static_cast<std::size_t>(c[2]) * dims_[1] + c[1]) * dims_[0] + c[0]];
}

bool PointLocator::contains(int e, const Vec3& x) const {
  const auto& g = geometry_[e];
  const auto lam = g.barycentric(x);
  for (int i = 0; i < g.num_nodes(); ++i) {
    if (lam[i] < -bary_tol) return false;
  }
  return true;
}

int PointLocator::locate(const Vec3& x) const {
  for (int e : bin(x)) {
    if (contains(e, x)) return e;
  }
  return -1;
}

std::vector<int> PointLocator::locate_all(const Vec3& x) const {
  std::vector<int> out;
  for (int e : bin(x)) {
    if (contains(e, x)) out.push_back(e);
  }
  return out;
}

std::vector<double> recover_enrichment(const Mesh& mesh, const AssembledSystem& system, std::span<const double> phi) {
  std::vector<double> out;
  out.reserve(system.enriched.size());
  for (const auto& rec : system.enriched) {
    const auto el = mesh.element(rec.element);
    double s = 0.0;
    for (std::size_t i = 0; i < el.size(); ++i) s += rec.recovery[i] * phi[el[i]];
    out.push_back(s);
  }
  return out;
}

SolutionField::SolutionField(std::shared_ptr<const Mesh> mesh, const AssembledSystem& system, std::vector<double> phi)
    : mesh_(std::move(mesh)),
      phi_(std::move(phi)),
      cls_(system.classification),
      enriched_(system.enriched),
      enriched_index_(system.enriched_index),
      locator_(*mesh_) {
  if (phi_.size() != mesh_->num_nodes()) throw Error(ErrorCode::invalid_argument, "nodal solution size mismatch");
  phi_star_ = recover_enrichment(*mesh_, system, phi_);
  geometry_.reserve(mesh_->num_elements());
  for (std::size_t e = 0; e < mesh_->num_elements(); ++e) geometry_.push_back(mesh_->geometry(e));
}

double SolutionField::phi_star(std::size_t e) const {
  const int k = enriched_index_[e];
  return k < 0 ? 0.0 : phi_star_[k];
}

const CutDecomposition* SolutionField::decomposition(std::size_t e) const {
  const int k = enriched_index_[e];
  return k < 0 ? nullptr : &enriched_[k].decomposition;
}

double SolutionField::distance_in(std::size_t e, const Vec3& x) const {
  const auto lam = geometry_[e].barycentric(x);
  const auto el = mesh_->element(e);
  double d = 0.0;
  for (std::size_t i = 0; i < el.size(); ++i) d += lam[i] * cls_.nodal_d[el[i]];
  return d;
}

int SolutionField::side_in(std::size_t e, const Vec3& x, int side_hint) const {
  switch (cls_.state[e]) {
    case ElementState::positive:
      return 1;
    case ElementState::negative:
      return -1;
    case ElementState::cut:
      break;
  }
  const auto el = mesh_->element(e);
  double scale = 0.0;
  for (int v : el) scale = std::max(scale, std::abs(cls_.nodal_d[v]));
  const double d = distance_in(e, x);
  if (std::abs(d) <= 1e-12 * scale) return side_hint >= 0 ? 1 : -1;
  return d > 0.0 ? 1 : -1;
}

FieldValue SolutionField::evaluate_in(std::size_t e, const Vec3& x, int side) const {
  const auto& g = geometry_[e];
  const auto el = mesh_->element(e);
  const auto lam = g.barycentric(x);
  FieldValue out;
  out.side = side;
  for (std::size_t i = 0; i < el.size(); ++i) {
    out.phi += lam[i] * phi_[el[i]];
    out.E += g.grads[i] * phi_[el[i]];
  }
  const int k = enriched_index_[e];
  if (k >= 0) {
    const auto& dec = enriched_[k].decomposition;
    const auto basis = make_enrichment_basis(g, std::span<const double>(dec.d.data(), el.size()));
    out.phi += phi_star_[k] * basis.value(g, x);
    out.E += basis.gradient(side) * phi_star_[k];
  }
  return out;
}

FieldValue SolutionField::evaluate(const Vec3& x, int side_hint) const {
  const int e = locator_.locate(x);
  if (e < 0) throw Error(ErrorCode::outside_domain, "point lies outside the mesh");
  return evaluate_in(e, x, side_in(e, x, side_hint));
}

std::vector<LinePiece> line_pieces(const SolutionField& sol, const Segment& seg) {
  const Mesh& mesh = sol.mesh();
  const auto& cls = sol.classification();
  const int dim = mesh.dim();
  Vec3 slo = seg.a, shi = seg.a;
  for (std::size_t k = 0; k < 3; ++k) {
    slo[k] = std::min(seg.a[k], seg.b[k]);
    shi[k] = std::max(seg.a[k], seg.b[k]);
  }

  std::vector<LinePiece> raw;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto el = mesh.element(e);
    bool outside = false;
    for (int k = 0; k < dim && !outside; ++k) {
      double lo = mesh.node(el[0])[k], hi = lo;
      for (int v : el) {
        lo = std::min(lo, mesh.node(v)[k]);
        hi = std::max(hi, mesh.node(v)[k]);
      }
      const double pad = 1e-9 * (hi - lo);
      outside = hi + pad < slo[k] || lo - pad > shi[k];
    }
    if (outside) continue;

    const auto g = mesh.geometry(e);
    const auto la = g.barycentric(seg.a);
    const auto lb = g.barycentric(seg.b);
    double t0 = 0.0, t1 = 1.0;
    for (int i = 0; i <= dim && t0 <= t1; ++i) {
      const double c = la[i], s = lb[i] - la[i];
      if (std::abs(s) < 1e-15) {
        if (c < -bary_tol) t1 = -1.0;
        continue;
      }
      const double root = (-bary_tol - c) / s;
      if (s > 0.0) {
        t0 = std::max(t0, root);
      } else {
        t1 = std::min(t1, root);
      }
    }
    if (t1 - t0 <= t_tol) continue;

    const int ei = static_cast<int>(e);
    if (cls.state[e] != ElementState::cut) {
      raw.push_back({t0, t1, ei, cls.state[e] == ElementState::positive ? 1 : -1});
      continue;
    }
    double scale = 0.0;
    for (int v : el) scale = std::max(scale, std::abs(cls.nodal_d[v]));
    const double dtol = 1e-12 * scale;
    const double d0 = sol.distance_in(e, seg.at(t0));
    const double d1 = sol.distance_in(e, seg.at(t1));
    if ((d0 < -dtol && d1 > dtol) || (d0 > dtol && d1 < -dtol)) {
      const double tc = t0 + d0 / (d0 - d1) * (t1 - t0);
      raw.push_back({t0, tc, ei, d0 > 0.0 ? 1 : -1});
      raw.push_back({tc, t1, ei, d1 > 0.0 ? 1 : -1});
    } else {
      const double dm = std::abs(d0) >= std::abs(d1) ? d0 : d1;
      raw.push_back({t0, t1, ei, std::abs(dm) <= dtol ? 1 : (dm > 0.0 ? 1 : -1)});
    }
  }
  if (raw.empty()) throw Error(ErrorCode::outside_domain, "segment does not intersect the mesh");

  std::vector<double> breaks;
  for (const auto& p : raw) {
    breaks.push_back(p.t0);
    breaks.push_back(p.t1);
  }
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> uniq;
  for (double t : breaks) {
    if (uniq.empty() || t - uniq.back() > t_tol) uniq.push_back(t);
  }
  if (uniq.front() > t_tol || uniq.back() < 1.0 - t_tol) {
    throw Error(ErrorCode::outside_domain, "segment leaves the mesh");
  }
  uniq.front() = 0.0;
  uniq.back() = 1.0;

  std::sort(raw.begin(), raw.end(), [](const LinePiece& x, const LinePiece& y) {
    return x.t0 != y.t0 ? x.t0 < y.t0 : x.element < y.element;
  });
  std::vector<LinePiece> out;
  std::size_t first = 0;  // raw pieces ending before the current interval are skipped
  for (std::size_t k = 0; k + 1 < uniq.size(); ++k) {
    const double u = uniq[k], v = uniq[k + 1];
    const double mid = 0.5 * (u + v);
    while (first < raw.size() && raw[first].t1 < u - t_tol) ++first;
    const LinePiece* best = nullptr;
    for (std::size_t i = first; i < raw.size() && raw[i].t0 <= mid; ++i) {
      if (raw[i].t1 >= mid && (!best || raw[i].element < best->element)) best = &raw[i];
    }
    if (!best) throw Error(ErrorCode::outside_domain, "segment leaves the mesh");
    if (!out.empty() && out.back().element == best->element && out.back().side == best->side) {
      out.back().t1 = v;
    } else {
      out.push_back({u, v, best->element, best->side});
    }
  }
  return out;
}

std::vector<LineSample> sample_line(const SolutionField& sol, const Segment& seg, int count) {
  if (count < 2) throw Error(ErrorCode::invalid_argument, "line sampling needs at least 2 points");
  const auto pieces = line_pieces(sol, seg);
  std::vector<LineSample> out;
  auto emit = [&](double t, const LinePiece& p) {
    const Vec3 x = seg.at(t);
    const FieldValue v = sol.evaluate_in(p.element, x, p.side);
    out.push_back({x, t, v.phi, v.E, p.side});
  };
  std::size_t k = 0;
  for (int i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / (count - 1);
    while (k + 1 < pieces.size() && t >= pieces[k].t1) ++k;
    emit(t, pieces[k]);
  }
  for (std::size_t j = 0; j + 1 < pieces.size(); ++j) {
    if (pieces[j].side != pieces[j + 1].side) {
      emit(pieces[j].t1, pieces[j]);
      emit(pieces[j].t1, pieces[j + 1]);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const LineSample& a, const LineSample& b) { return a.t < b.t; });
  return out;
}

std::vector<InterfaceCrossing> interface_crossings(const SolutionField& sol, const Segment& seg) {
  const auto pieces = line_pieces(sol, seg);
  const auto& cls = sol.classification();
  const Mesh& mesh = sol.mesh();
  std::vector<InterfaceCrossing> out;
  for (std::size_t j = 0; j + 1 < pieces.size(); ++j) {
    if (pieces[j].side == pieces[j + 1].side) continue;
    int e = pieces[j].element;
    if (cls.state[e] != ElementState::cut) e = pieces[j + 1].element;
    InterfaceCrossing c;
    c.t = pieces[j].t1;
    c.x = seg.at(c.t);
    c.element = e;
    const auto g = mesh.geometry(e);
    Vec3 grad{};
    const auto el = mesh.element(e);
    for (std::size_t i = 0; i < el.size(); ++i) grad += g.grads[i] * cls.nodal_d[el[i]];
    const double len = norm(grad);
    c.normal = len > 0.0 ? grad * (1.0 / len) : grad;
    out.push_back(c);
  }
  return out;
}

double l2_line_error(const SolutionField& sol, const ScalarField& reference, const Segment& seg, int min_samples) {
  const auto pieces = line_pieces(sol, seg);
  const double length = seg.length();
  double integral = 0.0;
  for (const auto& p : pieces) {
    const int steps = std::max(1, static_cast<int>(std::ceil((p.t1 - p.t0) * min_samples)));
    const double dt = (p.t1 - p.t0) / steps;
    auto f = [&](double t) {
      const Vec3 x = seg.at(t);
      const double diff = sol.evaluate_in(p.element, x, p.side).phi - reference(x);
      return diff * diff;
    };
    double prev = f(p.t0);
    for (int s = 1; s <= steps; ++s) {
      const double cur = f(s == steps ? p.t1 : p.t0 + s * dt);
      integral += 0.5 * (prev + cur) * dt * length;
      prev = cur;
    }
  }
  return std::sqrt(integral);
}

double interelement_mismatch(const SolutionField& sol, const Segment& seg) {
  const auto pieces = line_pieces(sol, seg);
  double worst = 0.0;
  for (std::size_t j = 0; j + 1 < pieces.size(); ++j) {
    if (pieces[j].element == pieces[j + 1].element) continue;
    const Vec3 x = seg.at(pieces[j].t1);
    const double left = sol.evaluate_in(pieces[j].element, x, pieces[j].side).phi;
    const double right = sol.evaluate_in(pieces[j + 1].element, x, pieces[j + 1].side).phi;
    worst = std::max(worst, std::abs(left - right));
  }
  return worst;
}

}  // namespace efem
