#include <doctest.h>

#include "instanton/dc_flow.hpp"
#include "instanton/errors.hpp"
#include "support.hpp"

using namespace instanton;
using testing::demand_bus;
using testing::generator_bus;
using testing::renewable_bus;

TEST_SUITE("dc_flow") {

TEST_CASE("two-bus Laplacian, phases and flow") {
  const GridModel g =
      GridModel::create({generator_bus(0, 1.0), demand_bus(1, 1.0)}, {{0, 1, 0.5, 10.0}}, 0, 0.0, 2.0);
  const Laplacian lap = build_laplacian(g);
  CHECK(lap.matrix(0, 0) == 2.0);
  CHECK(lap.matrix(0, 1) == -2.0);
  CHECK(lap.matrix(1, 0) == -2.0);
  CHECK(lap.matrix(1, 1) == 2.0);
  const auto f = factorize(g);
  Vector p(2);
  p << 1.0, -1.0;
  const Vector phi = solve_phases(f, p);
  CHECK(phi(0) == 0.0);
  CHECK(phi(1) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(line_flows(g, phi)(0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("path Laplacian diagonal is the weighted degree") {
  const GridModel g = GridModel::create({generator_bus(0, 2), demand_bus(1, 1), demand_bus(2, 1)},
                                        {{0, 1, 1.0, 1}, {1, 2, 1.0, 1}}, 0, 0.0, 2.0);
  const Laplacian lap = build_laplacian(g);
  CHECK(lap.matrix(0, 0) == 1.0);
  CHECK(lap.matrix(1, 1) == 2.0);
  CHECK(lap.matrix(2, 2) == 1.0);
  CHECK(lap.matrix(0, 2) == 0.0);
}

TEST_CASE("triangle flows satisfy Kirchhoff's laws") {
  const GridModel g = GridModel::create({generator_bus(0, 3), demand_bus(1, 1), demand_bus(2, 2)},
                                        {{0, 1, 0.1, 9}, {1, 2, 0.2, 9}, {0, 2, 0.3, 9}}, 0, 0.0, 2.0);
  Vector p(3);
  p << 3.0, -1.0, -2.0;
  const Vector f = line_flows(g, solve_phases(factorize(g), p));
  // Node balance at buses 1 and 2, zero reactance-weighted loop sum.
  CHECK(f(0) - f(1) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(f(1) + f(2) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(0.1 * f(0) + 0.2 * f(1) - 0.3 * f(2) == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
  // Closed form: loop current from the two-source superposition.
  CHECK(f(2) == doctest::Approx((0.1 * 1.0 + 0.3 * 2.0) / 0.6).epsilon(1e-13));
}

TEST_CASE("random grids agree with an independent dense solve") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GridModel g = testing::random_grid(seed, 10, 3, seed % 3 == 0 ? 0 : 4);
    const Vector rho = typical_vector(g) * 1.3;
    const Vector inj = assemble_injection(g, rho);
    CHECK((inj - testing::oracle_injection(g, rho)).lpNorm<Eigen::Infinity>() < 1e-12);
    const auto f = factorize(g);
    const Vector phi = solve_phases(f, inj);
    CHECK(phi(g.slack_index()) == 0.0);
    const Laplacian lap = build_laplacian(g);
    CHECK((lap.matrix * phi - inj).lpNorm<Eigen::Infinity>() < 1e-9);
    CHECK((phi - testing::oracle_phases(g, inj)).lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

TEST_CASE("Laplacian rows sum to exactly zero") {
  const GridModel g = load_grid(testing::data_path("rts96_30pct.json"));
  const Laplacian lap = build_laplacian(g);
  for (std::size_t r = 0; r < lap.dimension(); ++r) CHECK(lap.row_sum(r) == 0.0);
  CHECK((lap.matrix - lap.matrix.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("flows are linear in the injection") {
  const GridModel g = testing::random_grid(11, 8, 2, 3);
  const auto f = factorize(g);
  instanton::Random rng{17};
  auto balanced = [&] {
    Vector p(static_cast<Eigen::Index>(g.bus_count()));
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = rng.uniform(-50, 50);
    p(0) -= p.sum();
    return p;
  };
  const Vector a = balanced(), b = balanced();
  const Vector fa = line_flows(g, solve_phases(f, a));
  const Vector fb = line_flows(g, solve_phases(f, b));
  const Vector fab = line_flows(g, solve_phases(f, 2.0 * a - 3.0 * b));
  CHECK((fab - (2.0 * fa - 3.0 * fb)).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("flows do not depend on the slack choice") {
  const GridModel g = testing::random_grid(5, 9, 3, 4);
  const Vector inj = assemble_injection(g, typical_vector(g) * 0.7);
  const Laplacian lap = build_laplacian(g);
  const Vector ref = line_flows(g, solve_phases(factorize(lap, g.slack_index()), inj));
  for (std::size_t s = 0; s < g.bus_count(); ++s) {
    const Vector fl = line_flows(g, solve_phases(factorize(lap, s), inj));
    CHECK((fl - ref).lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("control alpha balances the injection") {
  const GridModel g = testing::random_grid(2, 7, 2, 2);
  CHECK(control_alpha(g, typical_vector(g)) == doctest::Approx(1.0).epsilon(1e-14));
  const Vector inj = assemble_injection(g, Vector::Constant(2, 10.0));
  CHECK(std::abs(inj.sum()) <= 1e-12 * inj.cwiseAbs().sum());
}

TEST_CASE("unbalanced injection is rejected") {
  const GridModel g = testing::three_bus_path();
  Vector p(3);
  p << 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(solve_phases(factorize(g), p), UnbalancedInjection);
}

TEST_CASE("singular reduced Laplacian is detected") {
  Laplacian lap;
  lap.matrix = Matrix::Zero(3, 3);
  lap.matrix(0, 0) = lap.matrix(1, 1) = 1.0;
  lap.matrix(0, 1) = lap.matrix(1, 0) = -1.0;
  CHECK_THROWS_AS(factorize(lap, 0), SingularMatrix);
}

}
