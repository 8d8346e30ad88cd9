#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <thread>

#include "macroforge/driver.hpp"
#include "macroforge/evaluator.hpp"
#include "macroforge/rng.hpp"

using namespace mf;

namespace {

// Minimal XML well-formedness check: tags balance and nest properly.
bool xml_well_formed(const std::string& text) {
  std::vector<std::string> stack;
  size_t i = 0;
  while ((i = text.find('<', i)) != std::string::npos) {
    size_t end = text.find('>', i);
    if (end == std::string::npos) return false;
    std::string tag = text.substr(i + 1, end - i - 1);
    i = end + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?' || tag[0] == '!') continue;
    bool self_closing = tag.back() == '/';
    if (tag[0] == '/') {
      std::string name = tag.substr(1);
      if (stack.empty() || stack.back() != name) return false;
      stack.pop_back();
    } else if (!self_closing) {
      std::string name = tag.substr(0, tag.find_first_of(" \t\n"));
      stack.push_back(name);
    }
  }
  return stack.empty();
}

Design two_pin_design(Point a, Point b) {
  Design d;
  d.outline = {100, 100};
  for (int i = 0; i < 2; ++i) {
    Instance m;
    m.id = i;
    m.name = "m" + std::to_string(i);
    m.kind = InstanceKind::Macro;
    m.width = 2;
    m.height = 2;
    m.hier = {"top"};
    d.instances.push_back(m);
  }
  Net net;
  net.id = 0;
  net.name = "n";
  net.pins.push_back({0, false, 0, 0});
  net.pins.push_back({1, false, 0, 0});
  d.nets.push_back(net);
  d.rebuild_index();
  (void)a;
  (void)b;
  return d;
}

}  // namespace

TEST_CASE("two-pin hpwl is the manhattan half-perimeter") {
  Design d = two_pin_design({0, 0}, {3, 4});
  std::map<std::string, Point> pos{{"m0", {0, 0}}, {"m1", {3, 4}}};
  CHECK(placement_hpwl(d, pos, {}, {}) == doctest::Approx(7.0));
}

TEST_CASE("coincident pins give zero hpwl") {
  Design d = two_pin_design({5, 5}, {5, 5});
  std::map<std::string, Point> pos{{"m0", {5, 5}}, {"m1", {5, 5}}};
  CHECK(placement_hpwl(d, pos, {}, {}) == doctest::Approx(0.0));
}

TEST_CASE("hpwl matches a per-net oracle with cluster fallback") {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    Design d = generate_synthetic(seed, 5, 60, 90, {120, 120});
    auto clusters = cluster_cells(d, 4);
    Rng rng(seed);
    std::map<std::string, Point> pos;
    for (int id : d.macro_ids)
      pos[d.instances[id].name] = {rng.uniform(0, 120), rng.uniform(0, 120)};
    std::vector<Point> centroids;
    for (size_t c = 0; c < clusters.size(); ++c)
      centroids.push_back({rng.uniform(0, 120), rng.uniform(0, 120)});

    std::vector<int> cluster_of(d.instances.size(), -1);
    for (const CellCluster& c : clusters)
      for (int id : c.member_cell_ids) cluster_of[id] = c.id;
    double want = 0.0;
    for (const Net& net : d.nets) {
      double x1 = 1e300, x2 = -1e300, y1 = 1e300, y2 = -1e300;
      for (const PinRef& pin : net.pins) {
        Point p;
        if (pin.is_port) {
          p = {d.ports[pin.index].x, d.ports[pin.index].y};
        } else if (d.instances[pin.index].is_macro()) {
          p = pos.at(d.instances[pin.index].name);
          p.x += pin.dx;
          p.y += pin.dy;
        } else {
          p = centroids[cluster_of[pin.index]];
          p.x += pin.dx;
          p.y += pin.dy;
        }
        x1 = std::min(x1, p.x); x2 = std::max(x2, p.x);
        y1 = std::min(y1, p.y); y2 = std::max(y2, p.y);
      }
      want += (x2 - x1) + (y2 - y1);
    }
    CHECK(placement_hpwl(d, pos, clusters, centroids) ==
          doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("hpwl is translation invariant without ports") {
  Design d = two_pin_design({0, 0}, {0, 0});
  std::map<std::string, Point> pos{{"m0", {10, 20}}, {"m1", {40, 25}}};
  std::map<std::string, Point> shifted{{"m0", {17, 31}}, {"m1", {47, 36}}};
  CHECK(placement_hpwl(d, pos, {}, {}) ==
        doctest::Approx(placement_hpwl(d, shifted, {}, {})));
}

TEST_CASE("missing macro position raises an unresolved-pin error") {
  Design d = two_pin_design({0, 0}, {0, 0});
  std::map<std::string, Point> pos{{"m0", {1, 1}}};
  CHECK_THROWS_WITH_AS(placement_hpwl(d, pos, {}, {}),
                       doctest::Contains("m1"), DesignError);
}

TEST_CASE("total overlap matches pairwise enumeration") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Rect> rects;
    int n = rng.uniform_int(2, 10);
    for (int i = 0; i < n; ++i)
      rects.push_back({rng.uniform(0, 80), rng.uniform(0, 80),
                       rng.uniform(1, 20), rng.uniform(1, 20)});
    double want = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        want += intersection_area(rects[i], rects[j]);
    CHECK(total_overlap_area(rects) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("svg output is well-formed and complete") {
  Design d = generate_synthetic(5, 10, 120, 200, {130, 130});
  FinalPlacement out = run_pipeline(d, {});
  std::string svg = render_svg(d, out.macro_positions, out.groups, out.io,
                               &out.last_ellipse);
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(xml_well_formed(svg));
  // One rect per macro plus the outline and keepouts.
  size_t rects = 0, at = 0;
  while ((at = svg.find("<rect", at)) != std::string::npos) {
    ++rects;
    ++at;
  }
  CHECK(rects >= static_cast<size_t>(d.macro_count()) + 1);
  CHECK(svg.find("<ellipse") != std::string::npos);
}

TEST_CASE("xml checker rejects bad nesting") {
  CHECK_FALSE(xml_well_formed("<a><b></a></b>"));
  CHECK_FALSE(xml_well_formed("<a>"));
  CHECK(xml_well_formed("<?xml version=\"1.0\"?><a><b/></a>"));
}

TEST_CASE("stage timer accumulates per stage") {
  StageTimer timer;
  timer.start("alpha");
  std::this_thread::sleep_for(std::chrono::milliseconds(5));
  timer.stop();
  timer.start("beta");
  std::this_thread::sleep_for(std::chrono::milliseconds(2));
  timer.stop();
  timer.start("alpha");
  timer.stop();
  auto breakdown = timer.breakdown();
  REQUIRE(breakdown.size() == 2);
  CHECK(breakdown["alpha"] >= 0.005);
  CHECK(breakdown["beta"] >= 0.002);
  CHECK(timer.total() ==
        doctest::Approx(breakdown["alpha"] + breakdown["beta"]));
}
