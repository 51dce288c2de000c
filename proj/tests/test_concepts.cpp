#include "doctest.h"

#include "smoothlab/concepts.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace smoothlab;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Vector e(int d, int i) {
  Vector v = Vector::Zero(d);
  v[i] = 1.0;
  return v;
}

Concept quadrant() { return make_intersection({{e(2, 0), 0.0}, {e(2, 1), 0.0}}, 2); }

// Random k x d matrix with orthonormal rows.
Matrix random_basis(int k, int d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd G(d, k);
  for (Eigen::Index i = 0; i < G.size(); ++i) G.data()[i] = std::normal_distribution<double>()(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(d, k);
  return Matrix(Q.transpose());
}

// Smallest ||u|| on a polar grid (d = 2) with f(x+u) != f(x).
double grid_distance_2d(const Concept& c, const Vector& x, double rmax, int nr, int na) {
  int f0 = eval(c, x);
  double best = INFINITY;
  for (int a = 0; a < na; ++a) {
    double th = 2.0 * std::numbers::pi * a / na;
    Vector dir = vec({std::cos(th), std::sin(th)});
    for (int r = 1; r <= nr; ++r) {
      double t = rmax * r / nr;
      if (t >= best) break;
      if (eval(c, x + t * dir) != f0) {
        best = t;
        break;
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("eval examples") {
  CHECK(eval(make_halfspace(e(2, 0), 0.0), vec({1.0, 0.0})) == 1);
  CHECK(eval(quadrant(), vec({1.0, -1.0})) == -1);
  CHECK(eval(quadrant(), vec({0.0, 0.0})) == 1);
  auto par = make_parity(3, {0, 1});
  CHECK(eval(par, vec({-1.0, -1.0, 1.0})) == 1);
  CHECK(eval(par, vec({-1.0, 1.0, 1.0})) == -1);
  CHECK(eval(par, vec({0.0, -1.0, 1.0})) == 1);  // zero factor
  CHECK_THROWS_AS(eval(par, vec({1.0, 1.0})), std::invalid_argument);
  CHECK(eval(make_box(vec({0, 0}), vec({1, 1})), vec({1.0, 0.5})) == 1);
  CHECK(eval(make_box(vec({0, 0}), vec({1, 1})), vec({1.1, 0.5})) == -1);
  CHECK(eval(make_ball(vec({0, 0}), 1.0), vec({0.6, 0.8})) == 1);
  CHECK(eval(make_constant(3, 1), vec({5, 5, 5})) == 1);
  CHECK(eval(make_constant(3, -1), vec({5, 5, 5})) == -1);
  SparsePolynomial p(2);
  p.add_term({1, 1}, 1.0);
  CHECK(eval(make_ptf(p), vec({-2.0, -3.0})) == 1);
  CHECK(eval(make_ptf(p), vec({-2.0, 3.0})) == -1);
}

TEST_CASE("construction checks") {
  auto h = make_halfspace(vec({3.0, 4.0}), 5.0);
  const auto& hs = std::get<Halfspace>(h.kind);
  CHECK(hs.w.norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(hs.b == doctest::Approx(1.0));
  CHECK_THROWS(make_halfspace(vec({0.0, 0.0}), 1.0));
  CHECK_THROWS(make_box(vec({1.0}), vec({0.0})));
  CHECK_THROWS(make_ball(vec({0.0}), -1.0));
  Matrix bad(2, 3);
  bad << 1, 0, 0, 1, 1, 0;
  CHECK_THROWS(lift(make_halfspace(e(2, 0), 0.0), bad));
  CHECK_THROWS(lift(make_halfspace(e(2, 0), 0.0), random_basis(3, 5, 1)));
}

TEST_CASE("reference surface-area bounds") {
  const double phi0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  CHECK(make_halfspace(e(1, 0), 0.0).gsa_ref == doctest::Approx(phi0));
  CHECK(make_halfspace(e(1, 0), 1.0).gsa_ref == doctest::Approx(std::exp(-0.5) * phi0));
  CHECK(quadrant().gsa_ref == doctest::Approx(2.0 * phi0));
  std::vector<Halfspace> many;
  for (int i = 0; i < 50; ++i) many.push_back({e(50, i), 1.0});
  CHECK(make_intersection(many, 50).gsa_ref == doctest::Approx(std::sqrt(2.0 * std::log(50.0)) + 2.0));
  CHECK(make_ball(Vector::Zero(16), 1.0).gsa_ref == doctest::Approx(8.0));
  SparsePolynomial p(2);
  p.add_term({3, 0}, 1.0);
  CHECK(make_ptf(p).gsa_ref == 3.0);
  CHECK(make_parity(8, {0, 1, 2, 3}).gsa_ref == doctest::Approx(4.0 * phi0));
}

TEST_CASE("boundary distance examples") {
  auto h = make_halfspace(e(2, 0), 0.0);
  auto d = boundary_distance(h, vec({0.7, 5.0}));
  CHECK(d.exact);
  CHECK(d.value() == doctest::Approx(0.7));
  CHECK(boundary_distance(make_box(vec({0, 0}), vec({1, 1})), vec({0.5, 0.5})).value() == doctest::Approx(0.5));
  auto q = boundary_distance(quadrant(), vec({-3.0, -4.0}));
  CHECK(q.exact);
  CHECK(q.value() == doctest::Approx(5.0).epsilon(1e-8));
  CHECK(boundary_distance(quadrant(), vec({2.0, 0.5})).value() == doctest::Approx(0.5));
  CHECK(boundary_distance(make_ball(vec({1, 1}), 2.0), vec({1.0, 1.5})).value() == doctest::Approx(1.5));
  CHECK(boundary_distance(make_box(vec({0, 0}), vec({1, 1})), vec({2.0, 3.0})).value() ==
        doctest::Approx(std::sqrt(5.0)));
  Vector inf_hi = vec({INFINITY, INFINITY});
  CHECK(boundary_distance(make_box(vec({0, 0}), inf_hi), vec({3.0, 0.25})).value() == doctest::Approx(0.25));
  CHECK(boundary_distance(make_parity(3, {0, 2}), vec({0.3, 9.0, -0.2})).value() == doctest::Approx(0.2));
}

TEST_CASE("Dykstra projection onto a polytope") {
  std::vector<Halfspace> faces{{e(2, 0), 0.0}, {e(2, 1), 0.0}};
  auto r = dykstra_project(faces, vec({-3.0, -4.0}));
  CHECK(r.converged);
  CHECK(r.projection.norm() <= 1e-8);
  // wedge x2 >= x1, x2 >= -x1; from (0,-1) the projection is the apex
  std::vector<Halfspace> wedge{{vec({-1.0, 1.0}).normalized(), 0.0}, {vec({1.0, 1.0}).normalized(), 0.0}};
  auto w = dykstra_project(wedge, vec({0.0, -1.0}));
  CHECK(w.converged);
  CHECK(w.projection.norm() <= 1e-7);
  // single face: exact orthogonal projection
  auto one = dykstra_project({{e(3, 2), -1.0}}, vec({0.5, 0.5, -2.0}));
  CHECK(one.projection[2] == doctest::Approx(1.0));
  CHECK(one.projection[0] == doctest::Approx(0.5));
}

TEST_CASE("boundary distance agrees with a brute-force perturbation search") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const double rmax = 6.0;
  const int nr = 3000, na = 720;
  const double res = rmax / nr;
  std::vector<Concept> cs{
      make_halfspace(vec({0.6, -0.8}), 0.3),
      make_intersection({{vec({1.0, 0.2}).normalized(), 0.5}, {vec({-0.3, 1.0}).normalized(), -0.1},
                         {vec({-1.0, -1.0}).normalized(), 1.2}},
                        2),
      make_box(vec({-1.0, -0.5}), vec({0.5, 1.5})),
      make_ball(vec({0.2, -0.3}), 1.1),
  };
  for (const auto& c : cs)
    for (int t = 0; t < 25; ++t) {
      Vector x = vec({u(rng), u(rng)});
      double exact = boundary_distance(c, x).value();
      double brute = grid_distance_2d(c, x, rmax, nr, na);
      // angular steps of 0.5 degrees cost at most 1% near corners and curved faces
      CHECK(brute >= exact - 1e-9);
      CHECK(brute <= exact * 1.01 + 2 * res);
    }

  SUBCASE("three dimensions") {
    auto c = make_intersection({{e(3, 0), 0.2}, {e(3, 1), 0.1}, {vec({1, 1, 1}).normalized(), 0.0}}, 3);
    Rng r2(5);
    for (int t = 0; t < 10; ++t) {
      Vector x = vec({u(rng), u(rng), u(rng)});
      double exact = boundary_distance(c, x).value();
      int f0 = eval(c, x);
      double best = INFINITY;
      for (int dirs = 0; dirs < 20000; ++dirs) {
        Vector v = standard_normal(r2, 3).normalized();
        for (int s = 1; s <= 600; ++s) {
          double tt = 6.0 * s / 600;
          if (tt >= best) break;
          if (eval(c, x + tt * v) != f0) {
            best = tt;
            break;
          }
        }
      }
      CHECK(best >= exact - 1e-9);
      CHECK(best <= exact + 0.15);
    }
  }
}

TEST_CASE("PTF distance is a certified interval") {
  SparsePolynomial p(2);
  p.add_term({2, 0}, 1.0);
  p.add_term({0, 2}, 1.0);
  p.add_term({0, 0}, -1.0);
  auto c = make_ptf(p);
  CHECK_FALSE(has_exact_distance(c));
  auto d = boundary_distance(c, vec({0.0, 0.0}));
  CHECK_FALSE(d.exact);
  CHECK(d.lower == 0.0);
  CHECK(d.upper >= 1.0 - 1e-12);
  CHECK(d.upper <= 1.0 + 1e-6);
  CHECK(in_margin_boundary(c, vec({0.0, 0.0}), 0.5) == Tri::Unknown);
  CHECK(in_margin_boundary(c, vec({0.0, 0.0}), 1.1) == Tri::True);
}

TEST_CASE("margin membership") {
  auto h = make_halfspace(e(2, 0), 0.0);
  CHECK(in_margin_boundary(h, vec({0.7, 5.0}), 0.5) == Tri::False);
  CHECK(in_margin_boundary(h, vec({0.7, 5.0}), 0.7) == Tri::True);
  CHECK(in_margin_boundary(quadrant(), vec({-3.0, -4.0}), 4.9) == Tri::False);
  CHECK(in_margin_boundary(quadrant(), vec({-3.0, -4.0}), 5.0 + 1e-6) == Tri::True);
  // the 0-boundary is empty, even for points on the decision surface
  CHECK(in_margin_boundary(h, vec({0.0, 1.0}), 0.0) == Tri::False);
  CHECK_THROWS(in_margin_boundary(h, vec({0.0, 1.0}), -1.0));

  SUBCASE("monotone in gamma") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    auto c = make_intersection({{e(2, 0), 0.3}, {vec({1, -1}).normalized(), 0.2}}, 2);
    for (int t = 0; t < 200; ++t) {
      Vector x = vec({u(rng), u(rng)});
      bool was = false;
      for (double g = 0.0; g <= 3.0; g += 0.05) {
        bool now = in_margin_boundary(c, x, g) == Tri::True;
        if (was) CHECK(now);
        was = now;
      }
    }
  }
}

TEST_CASE("translate and scale") {
  auto h = make_halfspace(vec({0.6, 0.8}), 0.25);
  Vector t = vec({1.0, -2.0});
  auto ht = translate(h, t);
  const auto& hs = std::get<Halfspace>(ht.kind);
  CHECK(hs.b == doctest::Approx(0.25 + 0.6 - 1.6));
  CHECK(ht.gsa_ref == h.gsa_ref);

  auto h0 = make_halfspace(e(2, 0), -1.0);
  auto h2 = scale(h0, 2.0);
  CHECK(boundary_distance(h2, vec({0.5, 3.0})).value() == doctest::Approx(0.0).epsilon(1e-15));
  auto b2 = scale(make_ball(vec({0, 0}), 1.0), 2.0);
  CHECK(boundary_distance(b2, vec({0.5, 0.0})).value() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(b2.gsa_ref == make_ball(vec({0, 0}), 1.0).gsa_ref);
  CHECK_THROWS(scale(h0, 0.0));
  CHECK_THROWS(translate(h0, vec({1.0})));

  SUBCASE("definitions hold pointwise for every kind") {
    SparsePolynomial p(3);
    p.add_term({1, 1, 0}, 1.0);
    p.add_term({0, 0, 2}, -0.5);
    p.add_term({0, 0, 0}, 0.1);
    std::vector<Concept> cs{make_halfspace(vec({1, 2, 2}), 0.3),
                            make_intersection({{e(3, 0), 0.1}, {vec({0, 1, -1}).normalized(), 0.2}}, 3),
                            make_box(vec({-1, -INFINITY, 0}), vec({1, 0.5, INFINITY})),
                            make_ball(vec({0.1, 0.2, 0.3}), 0.9), make_ptf(p), make_parity(3, {0, 2})};
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (const auto& c : cs) {
      Vector tt = vec({u(rng), u(rng), u(rng)});
      double r = 0.5 + std::fabs(u(rng));
      auto ct = translate(c, tt), cs2 = scale(c, r), back = translate(translate(c, tt), -tt);
      for (int i = 0; i < 1000; ++i) {
        Vector x = vec({u(rng), u(rng), u(rng)});
        // skip points numerically on a boundary
        if (boundary_distance(c, x + tt).upper < 1e-9 || boundary_distance(c, r * x).upper < 1e-9) continue;
        CHECK(eval(ct, x) == eval(c, x + tt));
        CHECK(eval(cs2, x) == eval(c, r * x));
        if (boundary_distance(c, x).upper > 1e-9) CHECK(eval(back, x) == eval(c, x));
      }
    }
  }
}

TEST_CASE("lifted concepts factor through the subspace") {
  const int d = 10;
  Matrix U = random_basis(3, d, 21);
  CHECK((U * U.transpose() - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-12);
  auto base = make_intersection({{e(3, 0), 0.1}, {e(3, 1), -0.2}, {vec({1, 1, 1}).normalized(), 0.0}}, 3);
  auto c = lift(base, U);
  CHECK(c.k == 3);
  CHECK(c.ambient_dim == d);
  CHECK(c.gsa_ref == base.gsa_ref);
  Rng rng(4);
  int agree = 0;
  for (int i = 0; i < 1000; ++i) {
    Vector x = standard_normal(rng, d);
    Vector proj = U.transpose() * (U * x);
    agree += eval(c, x) == eval(c, proj);
    CHECK(eval(c, x) == eval(base, U * x));
    CHECK(boundary_distance(c, x).value() == doctest::Approx(boundary_distance(base, U * x).value()).epsilon(1e-12));
  }
  CHECK(agree == 1000);
  CHECK_THROWS(eval(c, Vector::Zero(3)));
}

TEST_CASE("concept json round trip") {
  Matrix U = random_basis(2, 4, 2);
  std::vector<Concept> cs{make_halfspace(vec({0.6, 0.8}), 0.25),
                          quadrant(),
                          make_box(vec({-1, -INFINITY}), vec({1, 2})),
                          make_ball(vec({0.5, 0.5}), 2.0),
                          make_parity(4, {1, 3}, vec({0.1, -0.2})),
                          lift(make_halfspace(vec({1, 1}), 0.1), U)};
  SparsePolynomial p(2);
  p.add_term({2, 0}, 1.0);
  p.add_term({0, 0}, -0.3);
  cs.push_back(make_ptf(p));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (const auto& c : cs) {
    auto back = concept_from_json(nlohmann::json::parse(to_json(c).dump()));
    CHECK(std::string(kind_name(back)) == kind_name(c));
    CHECK(back.k == c.k);
    CHECK(back.ambient_dim == c.ambient_dim);
    CHECK(back.gsa_ref == c.gsa_ref);
    for (int i = 0; i < 200; ++i) {
      Vector x(c.ambient_dim);
      for (auto& v : x) v = u(rng);
      CHECK(eval(back, x) == eval(c, x));
    }
  }
  auto j = nlohmann::json::parse(R"({"kind":"halfspace","w":[2.0,0.0],"b":1.0})");
  auto h = concept_from_json(j);
  CHECK(std::get<Halfspace>(h.kind).w.norm() == doctest::Approx(1.0));
  CHECK(std::get<Halfspace>(h.kind).b == doctest::Approx(0.5));
  auto g = nlohmann::json::parse(R"({"kind":"halfspace","w":[1.0,0.0],"b":0.0,"gsa_ref":0.7})");
  CHECK(concept_from_json(g).gsa_ref == 0.7);
  CHECK_THROWS(concept_from_json(nlohmann::json::parse(R"({"kind":"torus"})")));
  CHECK_THROWS(concept_from_json(nlohmann::json::parse(R"({"kind":"box","lo":["oops"],"hi":[1]})")));
}
