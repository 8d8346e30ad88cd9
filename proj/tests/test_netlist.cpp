#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "macroforge/netlist.hpp"

using namespace mf;

namespace {

const char* kMinimal = R"({
  "outline": {"width": 100, "height": 100},
  "macros": [{"name": "m1", "width": 10, "height": 10, "hier": ["top"]}],
  "cells": [],
  "ports": [{"name": "p1", "x": 0, "y": 5}],
  "nets": [{"name": "n1", "pins": [{"ref": "m1"}, {"ref": "p1"}]}]
})";

}  // namespace

TEST_CASE("minimal design loads") {
  Design d = parse_design(kMinimal);
  CHECK(d.instances.size() == 1);
  CHECK(d.ports.size() == 1);
  CHECK(d.nets.size() == 1);
  CHECK(d.macro_count() == 1);
  CHECK(d.instances[0].is_macro());
  CHECK(d.nets[0].pins.size() == 2);
  CHECK(d.nets[0].pins[1].is_port);
}

TEST_CASE("dangling reference names the offender") {
  std::string text = kMinimal;
  text.replace(text.find("\"m1\"}, "), 7, "\"m9\"}, ");
  CHECK_THROWS_WITH_AS(parse_design(text),
                       doctest::Contains("m9"), DesignError);
}

TEST_CASE("dimension and boundary validation") {
  std::string bad_size = kMinimal;
  bad_size.replace(bad_size.find("\"width\": 10,"), 12, "\"width\": -1,");
  CHECK_THROWS_AS(parse_design(bad_size), DesignError);

  std::string bad_port = kMinimal;
  bad_port.replace(bad_port.find("\"x\": 0"), 6, "\"x\": 3");
  CHECK_THROWS_WITH_AS(parse_design(bad_port),
                       doctest::Contains("boundary"), DesignError);
}

TEST_CASE("single-pin nets rejected") {
  std::string text = kMinimal;
  text.replace(text.find(", {\"ref\": \"p1\"}"), 15, "");
  CHECK_THROWS_WITH_AS(parse_design(text),
                       doctest::Contains("fewer than 2"), DesignError);
}

TEST_CASE("round trip preserves the design") {
  Design d = generate_synthetic(7, 12, 150, 200, {120, 90});
  std::string text = save_design(d);
  Design back = parse_design(text);
  CHECK(save_design(back) == text);
  REQUIRE(back.instances.size() == d.instances.size());
  for (size_t i = 0; i < d.instances.size(); ++i) {
    CHECK(back.instances[i].name == d.instances[i].name);
    CHECK(back.instances[i].kind == d.instances[i].kind);
    CHECK(back.instances[i].width == d.instances[i].width);
    CHECK(back.instances[i].hier == d.instances[i].hier);
    CHECK(back.instances[i].is_flip_flop == d.instances[i].is_flip_flop);
  }
  REQUIRE(back.nets.size() == d.nets.size());
  for (size_t i = 0; i < d.nets.size(); ++i)
    CHECK(back.nets[i].pins.size() == d.nets[i].pins.size());
}

TEST_CASE("loaded nets have at least two pins") {
  Design d = generate_synthetic(3, 8, 200, 300, {100, 100});
  for (const Net& net : d.nets) CHECK(net.pins.size() >= 2);
}

TEST_CASE("synthetic generator determinism and seed sensitivity") {
  Design a = generate_synthetic(1, 8, 200, 300, {100, 100});
  Design b = generate_synthetic(1, 8, 200, 300, {100, 100});
  CHECK(a.macro_count() == 8);
  CHECK(save_design(a) == save_design(b));

  Design c = generate_synthetic(2, 8, 200, 300, {100, 100});
  CHECK(save_design(a) != save_design(c));
}

TEST_CASE("generator hits the 132-macro scale") {
  Design d = generate_synthetic(5, 132, 1000, 1500, {400, 400});
  CHECK(d.macro_count() == 132);
}

TEST_CASE("utilization stays below 0.6 across seeds") {
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    Design d = generate_synthetic(seed, 20, 100, 150, {150, 150});
    CHECK(d.total_macro_area() / d.outline.area() <= 0.6);
  }
}

TEST_CASE("infeasible area budget rejected") {
  SyntheticOptions opts;
  opts.util_target = 0.8;
  CHECK_THROWS_AS(generate_synthetic(1, 8, 10, 20, {100, 100}, opts),
                  DesignError);
}

TEST_CASE("pre-placed macros survive the round trip") {
  Design d = parse_design(kMinimal);
  d.instances[0].fixed = true;
  d.instances[0].fixed_pos = {20, 30};
  Design back = parse_design(save_design(d));
  CHECK(back.instances[0].fixed);
  CHECK(back.instances[0].fixed_pos.x == 20);
  CHECK(back.instances[0].fixed_pos.y == 30);
}
