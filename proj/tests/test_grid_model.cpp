#include <doctest.h>

#include <fstream>

#include "instanton/errors.hpp"
#include "instanton/grid_model.hpp"
#include "support.hpp"

using namespace instanton;
using testing::demand_bus;
using testing::generator_bus;
using testing::renewable_bus;

TEST_SUITE("grid_model") {

TEST_CASE("two-bus grid parses with sorted buses and totals") {
  const GridModel g = parse_grid(R"({
    "buses": [{"id": 7, "role": "demand", "d": 1.0}, {"id": 3, "role": "generator", "p": 2.0}],
    "lines": [{"from": 3, "to": 7, "x": 0.5, "u": 4.0}],
    "alpha_bounds": [0, 2]})");
  REQUIRE(g.bus_count() == 2);
  CHECK(g.buses()[0].id == 3);
  CHECK(g.slack() == 3);
  CHECK(g.slack_index() == 0);
  CHECK(total_demand(g) == 1.0);
  CHECK(total_nominal_generation(g) == 2.0);
  CHECK(g.renewable_count() == 0);
}

TEST_CASE("negative rating is rejected") {
  CHECK_THROWS_AS(GridModel::create({generator_bus(0, 1), demand_bus(1, 1)}, {{0, 1, 0.1, -1.0}},
                                    0, 0.0, 2.0),
                  ValidationError);
}

TEST_CASE("structural validation") {
  const std::vector<Bus> two{generator_bus(0, 1), demand_bus(1, 1)};
  CHECK_THROWS_AS(GridModel::create(two, {{0, 1, 0.0, 1.0}}, 0, 0.0, 2.0), ValidationError);
  CHECK_THROWS_AS(GridModel::create(two, {{0, 0, 0.1, 1.0}}, 0, 0.0, 2.0), ValidationError);
  CHECK_THROWS_AS(GridModel::create(two, {{0, 5, 0.1, 1.0}}, 0, 0.0, 2.0), ValidationError);
  CHECK_THROWS_AS(GridModel::create(two, {{0, 1, 0.1, 1.0}}, 9, 0.0, 2.0), ValidationError);
  CHECK_THROWS_AS(GridModel::create(two, {{0, 1, 0.1, 1.0}}, 0, 1.0, 2.0), ValidationError);
  CHECK_THROWS_AS(GridModel::create({generator_bus(0, 1), demand_bus(0, 1)}, {}, 0, 0.0, 2.0),
                  ValidationError);
  CHECK_THROWS_AS(GridModel::create({demand_bus(0, 1), demand_bus(1, 1)}, {{0, 1, 0.1, 1.0}},
                                    std::nullopt, 0.0, 2.0),
                  ValidationError);
}

TEST_CASE("disconnected grid is rejected") {
  CHECK_THROWS_AS(GridModel::create({generator_bus(0, 2), demand_bus(1, 1), demand_bus(2, 1)},
                                    {{0, 1, 0.1, 1.0}}, 0, 0.0, 2.0),
                  ValidationError);
}

TEST_CASE("parallel lines merge into one equivalent line") {
  const GridModel g = GridModel::create({generator_bus(0, 2), demand_bus(1, 1)},
                                        {{0, 1, 0.2, 1.0}, {1, 0, 0.2, 3.0}}, 0, 0.0, 2.0);
  REQUIRE(g.line_count() == 1);
  CHECK(g.lines()[0].from == 0);
  CHECK(g.lines()[0].reactance == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(g.lines()[0].rating == 4.0);
}

TEST_CASE("malformed documents raise ParseError") {
  CHECK_THROWS_AS(parse_grid("{not json"), ParseError);
  CHECK_THROWS_AS(parse_grid(R"({"buses": []})"), ParseError);
  CHECK_THROWS_AS(parse_grid(R"({"buses": [{"id": 0, "role": "wind"}], "lines": [],
                                  "alpha_bounds": [0, 2]})"),
                  ParseError);
  CHECK_THROWS_AS(parse_grid(R"({"buses": [], "lines": [], "alpha_bounds": [0]})"), ParseError);
  CHECK_THROWS_AS(load_grid("/nonexistent/grid.json"), ParseError);
}

TEST_CASE("serialization round-trips exactly") {
  const GridModel g = testing::random_grid(4, 6, 2, 3);
  const std::string text = serialize_grid(g);
  const GridModel back = parse_grid(text);
  CHECK(back == g);
  CHECK(serialize_grid(back) == text);
}

TEST_CASE("bundled base grid") {
  const GridModel g = load_grid(testing::data_path("rts96_base.json"));
  CHECK(g.bus_count() == 73);
  CHECK(g.buses().front().id == 0);
  CHECK(g.buses().back().id == 72);
  CHECK(g.renewable_count() == 0);
  CHECK(total_demand(g) == doctest::Approx(8550.0).epsilon(1e-12));
  CHECK(total_nominal_generation(g) == doctest::Approx(8550.0).epsilon(1e-12));
  CHECK(g.slack() == 0);
  CHECK(g.alpha_min() == 0.0);
  CHECK(g.alpha_max() == 2.0);
}

TEST_CASE("bundled renewable cases") {
  for (auto [name, sites] : {std::pair{"rts96_10pct.json", 3}, {"rts96_20pct.json", 6},
                             {"rts96_30pct.json", 9}}) {
    const GridModel g = load_grid(testing::data_path(name));
    CHECK(g.renewable_count() == static_cast<std::size_t>(sites));
    CHECK(g.bus_count() == static_cast<std::size_t>(73 + sites));
  }
}

}
