#include <doctest.h>

#include "instanton/instanton.hpp"
#include "support.hpp"

using namespace instanton;

// Values frozen from the first scan of the bundled cases (extension seed 9).
TEST_SUITE("regression") {

TEST_CASE("10% top instanton saturates a base-grid line alone") {
  const GridModel g = load_grid(testing::data_path("rts96_10pct.json"));
  const Polytope poly = build_polytope(g);
  const FacetResult top = scan(poly, WhiteGaussianCost(typical_vector(g))).top().result;
  REQUIRE(poly.facet(top.facet).is_edge());
  const Line& l = g.lines()[*poly.facet(top.facet).line];
  CHECK(l.from < 73);
  CHECK(l.to < 73);
  CHECK(top.active_facets.empty());
  CHECK(top.active_bounds.empty());
}

TEST_CASE("bundled top instantons") {
  struct Frozen {
    const char* file;
    std::size_t facet;
    double cost;
    double alpha;
  };
  for (const Frozen& f : {Frozen{"rts96_10pct.json", 16, 6.6942786374414025, 0.951761303704229},
                          Frozen{"rts96_20pct.json", 14, 7.869590234293913, 0.9421423556724501},
                          Frozen{"rts96_30pct.json", 271, 6.05300377947205, 0.9241309590461027}}) {
    CAPTURE(f.file);
    const GridModel g = load_grid(testing::data_path(f.file));
    const InstantonSpectrum sp = scan(build_polytope(g), WhiteGaussianCost(typical_vector(g)));
    CHECK(sp.top().result.facet == f.facet);
    CHECK(sp.top().result.cost == doctest::Approx(f.cost).epsilon(1e-9));
    CHECK(sp.top().result.alpha == doctest::Approx(f.alpha).epsilon(1e-9));
  }
}

}
