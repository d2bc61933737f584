#include <doctest.h>

#include "instanton/amoeba.hpp"
#include "instanton/instanton.hpp"
#include "support.hpp"

using namespace instanton;

TEST_SUITE("amoeba") {

TEST_CASE("downhill simplex finds a smooth minimum") {
  auto rosen = [](const Vector& x) {
    return 100 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1 - x(0), 2);
  };
  std::vector<Vector> s{Vector::Zero(2), Vector::Unit(2, 0) * 0.5, Vector::Unit(2, 1) * 0.5};
  const NelderMeadResult r = nelder_mead(rosen, s, {20000, 1e-16});
  CHECK(r.value < 1e-10);
  CHECK((r.best - Vector::Ones(2)).norm() < 1e-4);
  CHECK_THROWS_AS(nelder_mead(rosen, {Vector::Zero(2)}), std::invalid_argument);
}

TEST_CASE("objective penalizes the interior only") {
  const GridModel g = testing::three_bus_path();
  const Polytope poly = build_polytope(g);
  const WhiteGaussianCost cost(typical_vector(g));
  Vector rho(1);
  rho << 40.0;
  // Smallest margin at rho_bar: line 1 carries the 100 MW load, rated 150.
  CHECK(amoeba_objective(poly, cost, rho, 1.0) == doctest::Approx(50.0));
  rho << 120.0;
  CHECK(amoeba_objective(poly, cost, rho, 1.0) == cost.value(rho));
  rho << -1.0;
  CHECK(std::isinf(amoeba_objective(poly, cost, rho, 1.0)));
}

TEST_CASE("seeded search is deterministic and never beats the exact scan") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const GridModel g = testing::random_grid(500 + seed, 5, 2, 2);
    const Polytope poly = build_polytope(g);
    const WhiteGaussianCost cost(typical_vector(g));
    const double exact = scan(poly, cost).top().result.cost;
    AmoebaOptions opts;
    opts.restarts = 200;
    opts.seed = seed;
    const AmoebaResult a = amoeba_search(poly, cost, opts);
    const AmoebaResult b = amoeba_search(poly, cost, opts);
    CHECK(a.best_rho == b.best_rho);
    CHECK(a.restart_costs == b.restart_costs);
    CHECK(a.best_is_exterior);
    CHECK(exact <= a.best_cost + 1e-6);
    CHECK(a.restart_costs.size() == 200);
  }
}

TEST_CASE("restart streams do not depend on the restart count") {
  const GridModel g = testing::random_grid(600, 5, 2, 2);
  const Polytope poly = build_polytope(g);
  const WhiteGaussianCost cost(typical_vector(g));
  AmoebaOptions few;
  few.restarts = 3;
  few.seed = 11;
  AmoebaOptions many = few;
  many.restarts = 8;
  const auto a = amoeba_search(poly, cost, few).restart_costs;
  const auto b = amoeba_search(poly, cost, many).restart_costs;
  CHECK(std::equal(a.begin(), a.end(), b.begin()));
}

}
