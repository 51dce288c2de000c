#include "smoothlab/concepts.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace smoothlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kPhi0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

Halfspace normalized(const Vector& w, double b) {
  double n = w.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("halfspace normal must be nonzero");
  return {w / n, b / n};
}

void require_dim(Eigen::Index got, int k, const char* what) {
  if (got != k) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

double intersection_gsa(std::size_t faces) {
  if (faces == 0) return 0.0;
  double f = static_cast<double>(faces);
  return std::min(f * kPhi0, std::sqrt(2.0 * std::log(f)) + 2.0);
}

Concept finish(ConceptKind kind, int k) {
  Concept c;
  c.kind = std::move(kind);
  c.k = k;
  c.ambient_dim = k;
  c.gsa_ref = default_gsa_ref(c);
  return c;
}

double ptf_upper(const DegreePTF& p, const Vector& u, std::uint64_t seed) {
  const int k = static_cast<int>(u.size());
  const int f0 = sign(p.poly.eval(std::span<const double>(u.data(), u.size())));
  auto f = [&](const Vector& y) { return sign(p.poly.eval(std::span<const double>(y.data(), y.size()))); };
  Rng rng(derive_seed(seed, "ptf-directions"));
  const double R = 8.0 * (1.0 + u.norm());
  constexpr int kDirections = 1000, kSteps = 256;
  double best = kInf;
  for (int d = 0; d < kDirections; ++d) {
    Vector v = standard_normal(rng, k);
    double n = v.norm();
    if (n == 0.0) continue;
    v /= n;
    double prev = 0.0;
    for (int s = 1; s <= kSteps; ++s) {
      double t = R * s / kSteps;
      if (t >= best) break;
      if (f(u + t * v) != f0) {
        double lo = prev, hi = t;
        for (int it = 0; it < 60; ++it) {
          double mid = 0.5 * (lo + hi);
          (f(u + mid * v) != f0 ? hi : lo) = mid;
        }
        best = std::min(best, hi);
        break;
      }
      prev = t;
    }
  }
  return best;
}

}  // namespace

Concept make_halfspace(const Vector& w, double b) {
  return finish(normalized(w, b), static_cast<int>(w.size()));
}

Concept make_intersection(const std::vector<Halfspace>& faces, int k) {
  Intersection in;
  for (const auto& h : faces) {
    require_dim(h.w.size(), k, "intersection face");
    in.faces.push_back(normalized(h.w, h.b));
  }
  return finish(std::move(in), k);
}

Concept make_box(const Vector& lo, const Vector& hi) {
  require_dim(hi.size(), static_cast<int>(lo.size()), "box");
  for (Eigen::Index i = 0; i < lo.size(); ++i)
    if (lo[i] > hi[i]) throw std::invalid_argument("box: lo > hi");
  return finish(AxisBox{lo, hi}, static_cast<int>(lo.size()));
}

Concept make_ball(const Vector& center, double radius) {
  if (!(radius >= 0.0)) throw std::invalid_argument("ball: radius must be >= 0");
  return finish(Ball{center, radius}, static_cast<int>(center.size()));
}

Concept make_ptf(const SparsePolynomial& p) { return finish(DegreePTF{p}, p.n_vars()); }

Concept make_parity(int k, const std::vector<int>& coords, const Vector& centers) {
  Vector c = centers.size() == 0 ? Vector::Zero(static_cast<Eigen::Index>(coords.size())) : centers;
  require_dim(c.size(), static_cast<int>(coords.size()), "parity centers");
  for (int i : coords)
    if (i < 0 || i >= k) throw std::invalid_argument("parity: coordinate out of range");
  return finish(SignParity{coords, c}, k);
}

Concept make_constant(int k, int value) {
  if (value > 0) return make_intersection({}, k);
  // x_0 - 1 >= 0 and -x_0 - 1 >= 0 has no solutions.
  Vector e = Vector::Zero(k);
  e[0] = 1.0;
  return make_intersection({{e, -1.0}, {-e, -1.0}}, k);
}

Concept lift(const Concept& c, const Matrix& U) {
  if (U.rows() != c.k) throw std::invalid_argument("lift: U must have k rows");
  Matrix g = U * U.transpose();
  if ((g - Matrix::Identity(c.k, c.k)).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("lift: rows of U must be orthonormal");
  Concept out = c;
  out.U = U;
  out.ambient_dim = static_cast<int>(U.cols());
  return out;
}

const char* kind_name(const Concept& c) {
  return std::visit(overloaded{[](const Halfspace&) { return "halfspace"; },
                               [](const Intersection&) { return "intersection"; },
                               [](const AxisBox&) { return "box"; },
                               [](const Ball&) { return "ball"; },
                               [](const DegreePTF&) { return "ptf"; },
                               [](const SignParity&) { return "parity"; }},
                    c.kind);
}

int degree_of(const Concept& c) {
  if (auto* p = std::get_if<DegreePTF>(&c.kind)) return p->poly.degree();
  return 1;
}

double default_gsa_ref(const Concept& c) {
  return std::visit(
      overloaded{[](const Halfspace& h) { return normal_pdf(h.b); },
                 [](const Intersection& in) { return intersection_gsa(in.faces.size()); },
                 [](const AxisBox& b) {
                   std::size_t f = 0;
                   for (Eigen::Index i = 0; i < b.lo.size(); ++i)
                     f += std::isfinite(b.lo[i]) + std::isfinite(b.hi[i]);
                   return intersection_gsa(f);
                 },
                 [&](const Ball&) {
                   return c.k == 1 ? 2.0 * kPhi0 : 4.0 * std::pow(c.k, 0.25);
                 },
                 [](const DegreePTF& p) { return static_cast<double>(std::max(p.poly.degree(), 0)); },
                 [](const SignParity& s) { return static_cast<double>(s.coords.size()) * kPhi0; }},
      c.kind);
}

Vector intrinsic(const Concept& c, const Vector& x) {
  require_dim(x.size(), c.ambient_dim, "concept input");
  if (c.U) return (*c.U) * x;
  return x;
}

int eval_intrinsic(const Concept& c, const Vector& u) {
  return std::visit(
      overloaded{[&](const Halfspace& h) { return sign(h.w.dot(u) + h.b); },
                 [&](const Intersection& in) {
                   for (const auto& h : in.faces)
                     if (h.w.dot(u) + h.b < 0.0) return -1;
                   return 1;
                 },
                 [&](const AxisBox& b) {
                   for (Eigen::Index i = 0; i < u.size(); ++i)
                     if (u[i] < b.lo[i] || u[i] > b.hi[i]) return -1;
                   return 1;
                 },
                 [&](const Ball& b) { return (u - b.center).norm() <= b.radius ? 1 : -1; },
                 [&](const DegreePTF& p) {
                   return sign(p.poly.eval(std::span<const double>(u.data(), u.size())));
                 },
                 [&](const SignParity& s) {
                   // Track the sign only; long products underflow.
                   int s_prod = 1;
                   for (std::size_t i = 0; i < s.coords.size(); ++i) {
                     double v = u[s.coords[i]] - s.centers[static_cast<Eigen::Index>(i)];
                     if (v == 0.0) return 1;
                     if (v < 0.0) s_prod = -s_prod;
                   }
                   return s_prod;
                 }},
      c.kind);
}

int eval(const Concept& c, const Vector& x) { return eval_intrinsic(c, intrinsic(c, x)); }

bool has_exact_distance(const Concept& c) { return !std::holds_alternative<DegreePTF>(c.kind); }

DykstraResult dykstra_project(const std::vector<Halfspace>& faces, const Vector& x, double tol,
                              int max_sweeps) {
  DykstraResult r;
  r.projection = x;
  std::vector<Vector> p(faces.size(), Vector::Zero(x.size()));
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    Vector start = r.projection;
    for (std::size_t i = 0; i < faces.size(); ++i) {
      Vector z = r.projection + p[i];
      double s = faces[i].w.dot(z) + faces[i].b;
      Vector y = s >= 0.0 ? z : Vector(z - s * faces[i].w);
      p[i] = z - y;
      r.projection = y;
    }
    r.sweeps = sweep;
    double viol = 0.0;
    for (const auto& h : faces) viol = std::max(viol, -(h.w.dot(r.projection) + h.b));
    if ((r.projection - start).norm() <= tol && viol <= tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

BoundaryDistance boundary_distance_intrinsic(const Concept& c, const Vector& u, std::uint64_t seed) {
  auto exact = [](double d) { return BoundaryDistance{d, d, true}; };
  return std::visit(
      overloaded{
          [&](const Halfspace& h) { return exact(std::fabs(h.w.dot(u) + h.b)); },
          [&](const Intersection& in) {
            if (in.faces.empty()) return exact(kInf);
            double slack = kInf, viol = 0.0;
            for (const auto& h : in.faces) {
              double s = h.w.dot(u) + h.b;
              slack = std::min(slack, s);
              viol = std::max(viol, -s);
            }
            if (slack >= 0.0) return exact(slack);
            auto r = dykstra_project(in.faces, u);
            if (!r.converged) return BoundaryDistance{viol, kInf, false};
            return exact(std::max(viol, (u - r.projection).norm()));
          },
          [&](const AxisBox& b) {
            bool inside = true;
            double out2 = 0.0, in = kInf;
            for (Eigen::Index i = 0; i < u.size(); ++i) {
              double lo = b.lo[i], hi = b.hi[i];
              if (u[i] < lo) {
                inside = false;
                out2 += (lo - u[i]) * (lo - u[i]);
              } else if (u[i] > hi) {
                inside = false;
                out2 += (u[i] - hi) * (u[i] - hi);
              } else {
                if (std::isfinite(lo)) in = std::min(in, u[i] - lo);
                if (std::isfinite(hi)) in = std::min(in, hi - u[i]);
              }
            }
            return exact(inside ? in : std::sqrt(out2));
          },
          [&](const Ball& b) { return exact(std::fabs((u - b.center).norm() - b.radius)); },
          [&](const DegreePTF& p) { return BoundaryDistance{0.0, ptf_upper(p, u, seed), false}; },
          [&](const SignParity& s) {
            double d = kInf;
            for (std::size_t i = 0; i < s.coords.size(); ++i)
              d = std::min(d, std::fabs(u[s.coords[i]] - s.centers[static_cast<Eigen::Index>(i)]));
            return exact(d);
          }},
      c.kind);
}

BoundaryDistance boundary_distance(const Concept& c, const Vector& x, std::uint64_t seed) {
  return boundary_distance_intrinsic(c, intrinsic(c, x), seed);
}

Tri in_margin_boundary(const Concept& c, const Vector& x, double gamma) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("in_margin_boundary: gamma must be >= 0");
  if (gamma == 0.0) return Tri::False;
  Vector u = intrinsic(c, x);
  if (auto* in = std::get_if<Intersection>(&c.kind)) {
    double viol = 0.0;
    for (const auto& h : in->faces) viol = std::max(viol, -(h.w.dot(u) + h.b));
    if (viol > gamma) return Tri::False;
  }
  auto d = boundary_distance_intrinsic(c, u);
  if (d.exact) return d.upper <= gamma ? Tri::True : Tri::False;
  if (d.upper <= gamma) return Tri::True;
  if (d.lower > gamma) return Tri::False;
  return Tri::Unknown;
}

namespace {

ConceptKind translate_kind(const ConceptKind& kind, const Vector& t) {
  return std::visit(
      overloaded{[&](const Halfspace& h) -> ConceptKind { return Halfspace{h.w, h.b + h.w.dot(t)}; },
                 [&](const Intersection& in) -> ConceptKind {
                   Intersection out;
                   for (const auto& h : in.faces) out.faces.push_back({h.w, h.b + h.w.dot(t)});
                   return out;
                 },
                 [&](const AxisBox& b) -> ConceptKind { return AxisBox{b.lo - t, b.hi - t}; },
                 [&](const Ball& b) -> ConceptKind { return Ball{b.center - t, b.radius}; },
                 [&](const DegreePTF& p) -> ConceptKind {
                   return DegreePTF{affine_substitute(p.poly, 1.0, std::span<const double>(t.data(), t.size()))};
                 },
                 [&](const SignParity& s) -> ConceptKind {
                   SignParity out = s;
                   for (std::size_t i = 0; i < s.coords.size(); ++i)
                     out.centers[static_cast<Eigen::Index>(i)] -= t[s.coords[i]];
                   return out;
                 }},
      kind);
}

ConceptKind scale_kind(const ConceptKind& kind, double r) {
  return std::visit(
      overloaded{[&](const Halfspace& h) -> ConceptKind { return Halfspace{h.w, h.b / r}; },
                 [&](const Intersection& in) -> ConceptKind {
                   Intersection out;
                   for (const auto& h : in.faces) out.faces.push_back({h.w, h.b / r});
                   return out;
                 },
                 [&](const AxisBox& b) -> ConceptKind { return AxisBox{b.lo / r, b.hi / r}; },
                 [&](const Ball& b) -> ConceptKind { return Ball{b.center / r, b.radius / r}; },
                 [&](const DegreePTF& p) -> ConceptKind {
                   std::vector<double> zero(static_cast<std::size_t>(p.poly.n_vars()), 0.0);
                   return DegreePTF{affine_substitute(p.poly, r, zero)};
                 },
                 [&](const SignParity& s) -> ConceptKind {
                   SignParity out = s;
                   out.centers /= r;
                   return out;
                 }},
      kind);
}

// The class F(k, Gamma) is closed under these maps, so gsa_ref carries over.
Concept rebuild(const Concept& c, ConceptKind kind) {
  Concept out = c;
  out.kind = std::move(kind);
  return out;
}

}  // namespace

Concept translate(const Concept& c, const Vector& t) {
  require_dim(t.size(), c.ambient_dim, "translate");
  return rebuild(c, translate_kind(c.kind, intrinsic(c, t)));
}

Concept scale(const Concept& c, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("scale: factor must be > 0");
  return rebuild(c, scale_kind(c.kind, r));
}

namespace {

nlohmann::json vec_json(const Vector& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i]))
      a.push_back(v[i]);
    else
      a.push_back(v[i] > 0 ? "inf" : "-inf");
  }
  return a;
}

Vector json_vec(const nlohmann::json& a) {
  Vector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& e = a[i];
    if (e.is_string()) {
      auto s = e.get<std::string>();
      if (s == "inf") v[static_cast<Eigen::Index>(i)] = kInf;
      else if (s == "-inf") v[static_cast<Eigen::Index>(i)] = -kInf;
      else throw std::invalid_argument("bad number '" + s + "'");
    } else {
      v[static_cast<Eigen::Index>(i)] = e.get<double>();
    }
  }
  return v;
}

nlohmann::json face_json(const Halfspace& h) { return {{"w", vec_json(h.w)}, {"b", h.b}}; }

Vector loaded_normal(const nlohmann::json& a) {
  Vector w = json_vec(a);
  double n = w.norm();
  if (std::fabs(n - 1.0) > 1e-6) std::fprintf(stderr, "warning: renormalizing halfspace normal of norm %.17g\n", n);
  return w;
}

}  // namespace

nlohmann::json to_json(const Concept& c) {
  nlohmann::json j;
  j["kind"] = kind_name(c);
  j["k"] = c.k;
  j["ambient_dim"] = c.ambient_dim;
  j["gsa_ref"] = c.gsa_ref;
  std::visit(overloaded{[&](const Halfspace& h) {
                          j["w"] = vec_json(h.w);
                          j["b"] = h.b;
                        },
                        [&](const Intersection& in) {
                          j["faces"] = nlohmann::json::array();
                          for (const auto& h : in.faces) j["faces"].push_back(face_json(h));
                        },
                        [&](const AxisBox& b) {
                          j["lo"] = vec_json(b.lo);
                          j["hi"] = vec_json(b.hi);
                        },
                        [&](const Ball& b) {
                          j["center"] = vec_json(b.center);
                          j["radius"] = b.radius;
                        },
                        [&](const DegreePTF& p) { j["poly"] = to_json(p.poly); },
                        [&](const SignParity& s) {
                          j["coords"] = s.coords;
                          j["centers"] = vec_json(s.centers);
                        }},
             c.kind);
  if (c.U) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < c.U->rows(); ++r) rows.push_back(vec_json(c.U->row(r).transpose()));
    j["U"] = rows;
  }
  return j;
}

Concept concept_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  Concept c;
  if (kind == "halfspace") {
    c = make_halfspace(loaded_normal(j.at("w")), j.value("b", 0.0));
  } else if (kind == "intersection") {
    std::vector<Halfspace> faces;
    for (const auto& f : j.at("faces")) faces.push_back({loaded_normal(f.at("w")), f.value("b", 0.0)});
    int k = j.contains("k") ? j["k"].get<int>()
                            : (faces.empty() ? throw std::invalid_argument("intersection needs k")
                                             : static_cast<int>(faces[0].w.size()));
    c = make_intersection(faces, k);
  } else if (kind == "box") {
    c = make_box(json_vec(j.at("lo")), json_vec(j.at("hi")));
  } else if (kind == "ball") {
    c = make_ball(json_vec(j.at("center")), j.at("radius").get<double>());
  } else if (kind == "ptf") {
    c = make_ptf(polynomial_from_json(j.at("poly")));
  } else if (kind == "parity") {
    auto coords = j.at("coords").get<std::vector<int>>();
    Vector centers = j.contains("centers") ? json_vec(j["centers"]) : Vector();
    c = make_parity(j.at("k").get<int>(), coords, centers);
  } else {
    throw std::invalid_argument("unknown concept kind '" + kind + "'");
  }
  if (j.contains("U")) {
    const auto& rows = j["U"];
    Matrix U(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r) U.row(static_cast<Eigen::Index>(r)) = json_vec(rows[r]).transpose();
    c = lift(c, U);
  } else if (j.contains("ambient_dim") && j["ambient_dim"].get<int>() != c.k) {
    throw std::invalid_argument("ambient_dim differs from k but no U given");
  }
  if (j.contains("gsa_ref")) c.gsa_ref = j["gsa_ref"].get<double>();
  return c;
}

}  // namespace smoothlab
