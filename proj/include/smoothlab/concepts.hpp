#pragma once

#include "smoothlab/core.hpp"
#include "smoothlab/polynomial.hpp"

#include <json.hpp>

#include <optional>
#include <variant>
#include <vector>

namespace smoothlab {

// +1 iff w.x + b >= 0. w is kept at unit norm.
struct Halfspace {
  Vector w;
  double b = 0.0;
};

// +1 iff every face is satisfied. Zero faces means the constant +1.
struct Intersection {
  std::vector<Halfspace> faces;
};

// +1 iff lo <= x <= hi coordinatewise; infinite bounds allowed.
struct AxisBox {
  Vector lo, hi;
};

// +1 iff ||x - center|| <= radius.
struct Ball {
  Vector center;
  double radius = 1.0;
};

// +1 iff poly(x) >= 0.
struct DegreePTF {
  SparsePolynomial poly;
};

// sign(prod_{i in coords} (x_i - centers_i)).
struct SignParity {
  std::vector<int> coords;
  Vector centers;
};

using ConceptKind = std::variant<Halfspace, Intersection, AxisBox, Ball, DegreePTF, SignParity>;

// A kind acting on k intrinsic coordinates. With U (k x d, orthonormal rows)
// the concept on R^d is x -> kind(Ux); without U, d == k.
struct Concept {
  ConceptKind kind;
  int k = 0;
  int ambient_dim = 0;
  std::optional<Matrix> U;
  double gsa_ref = 0.0;
};

struct BoundaryDistance {
  double lower = 0.0;
  double upper = 0.0;
  bool exact = true;
  double value() const { return upper; }
};

enum class Tri { False, True, Unknown };

Concept make_halfspace(const Vector& w, double b);
Concept make_intersection(const std::vector<Halfspace>& faces, int k);
Concept make_box(const Vector& lo, const Vector& hi);
Concept make_ball(const Vector& center, double radius);
Concept make_ptf(const SparsePolynomial& p);
Concept make_parity(int k, const std::vector<int>& coords, const Vector& centers = {});
Concept make_constant(int k, int value);
Concept lift(const Concept& c, const Matrix& U);

const char* kind_name(const Concept& c);
int degree_of(const Concept& c);  // polynomial degree for PTFs, 1 otherwise
double default_gsa_ref(const Concept& c);

Vector intrinsic(const Concept& c, const Vector& x);
int eval(const Concept& c, const Vector& x);
int eval_intrinsic(const Concept& c, const Vector& u);

bool has_exact_distance(const Concept& c);
// inf ||u|| with f(x+u) != f(x). PTFs give [0, sampled upper bound].
BoundaryDistance boundary_distance(const Concept& c, const Vector& x, std::uint64_t seed = 0);
BoundaryDistance boundary_distance_intrinsic(const Concept& c, const Vector& u, std::uint64_t seed = 0);
// Closed rule: true iff distance <= gamma. gamma == 0 is never in the margin.
Tri in_margin_boundary(const Concept& c, const Vector& x, double gamma);

// eval(translate(c,t), x) == eval(c, x + t); eval(scale(c,r), x) == eval(c, r x).
Concept translate(const Concept& c, const Vector& t);
Concept scale(const Concept& c, double r);

struct DykstraResult {
  Vector projection;
  int sweeps = 0;
  bool converged = false;
};
DykstraResult dykstra_project(const std::vector<Halfspace>& faces, const Vector& x,
                              double tol = 1e-9, int max_sweeps = 10000);

nlohmann::json to_json(const Concept& c);
Concept concept_from_json(const nlohmann::json& j);

}  // namespace smoothlab
