#include <gtest/gtest.h>

#include <random>

#include "common.hpp"
#include "oracles.hpp"
#include "qichoice/coarse_maps.hpp"
#include "qichoice/gamma_spaces.hpp"

using namespace qichoice;
using testing_util::family;

TEST(SetFamily, RejectsMalformedFamilies) {
  EXPECT_THROW(SetFamily(std::vector<NamedSet>{}), Error);
  try {
    SetFamily(std::vector<NamedSet>{{"X", {}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyMemberSet);
  }
  try {
    SetFamily({{"X", {"a"}}, {"Y", {"a", "b"}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DuplicateElement);
  }
  EXPECT_THROW(SetFamily({{"X", {"a"}}, {"X", {"b"}}}), Error);
}

TEST(SetFamily, IndexesElementsInFamilyOrder) {
  const auto z = family({{"a", "b"}, {"c"}, {"d", "e", "f"}});
  EXPECT_EQ(z.element_count(), 6u);
  EXPECT_EQ(z.element(3), "d");
  EXPECT_EQ(z.set_of(4), 2u);
  EXPECT_EQ(z.first_element_of(1), 2u);
  EXPECT_EQ(z.element_index("c"), std::optional<std::size_t>(2));
  EXPECT_FALSE(z.element_index("zz").has_value());
}

TEST(GammaZero, SizesOfSmallInstances) {
  const auto g = build_gamma0(family({{"a", "b"}, {"c"}}), 2);
  EXPECT_EQ(g.graph->vertex_count(), 7u);
  EXPECT_EQ(g.graph->edge_count(), 20u);
  const auto one = build_gamma0(family({{"a"}}), 1);
  EXPECT_EQ(one.graph->vertex_count(), 2u);
  EXPECT_EQ(one.graph->edge_count(), 2u);
  const auto chain = build_gamma0(family({{"a"}}), 3);
  EXPECT_EQ(chain.graph->vertex_count(), 4u);
  EXPECT_EQ(chain.graph->edge_count(), 6u);
}

TEST(GammaZero, EdgeCountsPerRule) {
  // rule 1: two edges per element; rule 2 per arm of size s at depth D:
  // D * s(s-1) within levels plus (D-1) * s^2 across, all doubled
  auto expected = [](std::vector<std::size_t> sizes, std::size_t depth) {
    std::size_t total = 0;
    for (auto s : sizes) total += 2 * s + 2 * (depth * s * (s - 1) / 2 + (depth - 1) * s * s);
    return total;
  };
  for (std::size_t depth = 1; depth <= 6; ++depth) {
    const auto g = build_gamma0(family({{"a", "b", "c"}, {"d"}, {"e", "f"}}), static_cast<std::int64_t>(depth));
    EXPECT_EQ(g.graph->edge_count(), expected({3, 1, 2}, depth));
    EXPECT_EQ(g.graph->vertex_count(), 1 + 6 * depth);
  }
}

TEST(GammaZero, LabelsAndParallelPairs) {
  const auto g = build_gamma0(family({{"a", "b"}, {"c"}}), 2);
  EXPECT_EQ(g.graph->vertex(GammaZero::base).label, std::optional<std::string>("b"));
  EXPECT_EQ(g.graph->vertex(g.vertex_of("a", 2)).label, std::optional<std::string>("(a,2)"));
  const auto edges = g.graph->edges();
  for (std::size_t i = 0; i < edges.size(); i += 2) {
    const auto& e = edges[i];
    const auto& f = edges[i + 1];
    EXPECT_EQ(e.u, f.u);
    EXPECT_EQ(e.v, f.v);
    EXPECT_EQ(e.label, std::optional<VertexId>(e.u));
    EXPECT_EQ(f.label, std::optional<VertexId>(f.v));
  }
}

TEST(GammaZero, VertexLevelIsDistanceToBase) {
  const auto g = build_gamma0(family({{"a", "b"}, {"c"}, {"d", "e", "f"}}), 5);
  const auto d = oracle::floyd_warshall(*g.graph);
  for (VertexId v = 0; v < g.graph->vertex_count(); ++v) EXPECT_EQ(Rational(g.vertex_level(v)), *d[0][v]);
}

TEST(GammaZero, RejectsBadDepthAndElements) {
  EXPECT_THROW(build_gamma0(family({{"a"}}), 0), Error);
  const auto g = build_gamma0(family({{"a"}}), 2);
  EXPECT_THROW(g.vertex_of("a", 3), Error);
  EXPECT_THROW(g.vertex_of("q", 1), Error);
}

TEST(GammaOne, SizesAndShape) {
  const auto g = build_gamma1(family({{"a", "b"}, {"c"}}), 2);
  EXPECT_EQ(g.graph->vertex_count(), 5u);
  EXPECT_EQ(g.graph->edge_count(), 4u);
  EXPECT_EQ(g.graph->valence(GammaOne::base), 2u);
  const auto single = build_gamma1(family({{"a"}}), 1);
  EXPECT_EQ(single.graph->vertex_count(), 2u);
  EXPECT_EQ(single.graph->edge_count(), 1u);
  const auto& into = g.graph->edge(g.edge_into(1, 2));
  EXPECT_EQ(std::max(into.u, into.v), g.vertex_of(1, 2));
  EXPECT_EQ(std::min(into.u, into.v), g.vertex_of(1, 1));
}

TEST(Classify, Examples) {
  const auto g = build_gamma0(family({{"a", "b"}, {"c"}}), 3);
  const auto base = classify_point(g, GraphPoint::at_vertex(GammaZero::base));
  EXPECT_TRUE(base.base);
  EXPECT_EQ(base.level, 0);
  const auto a2 = classify_point(g, g.point("a", 2));
  EXPECT_FALSE(a2.base);
  EXPECT_EQ(a2.set, 0u);
  EXPECT_EQ(a2.level, 2);
  // first rule-1 edge of c joins b and (c,1)
  const EdgeId bc = static_cast<EdgeId>(2 * 2);
  ASSERT_EQ(g.graph->edge(bc).v, g.vertex_of("c", 1));
  const auto mid = classify_point(g, GraphPoint::midpoint_of(bc));
  EXPECT_TRUE(mid.base);
  EXPECT_EQ(mid.level, 0);
}

TEST(Classify, EdgePointsTakeTheFloorOfTheirDistance) {
  const auto g = build_gamma0(family({{"a", "b"}, {"c"}}), 4);
  const auto d = oracle::floyd_warshall(*g.graph);
  for (const auto& e : g.graph->edges()) {
    for (Rational t : {Rational(1, 4), Rational(1, 2), Rational(3, 4)}) {
      const Rational exact = min(*d[0][e.u] + t, *d[0][e.v] + Rational(1) - t);
      const auto cls = classify_point(g, GraphPoint::interior(e.id, t));
      EXPECT_EQ(cls.level, exact.floor());
      if (!cls.base) {
        const VertexId w = e.u == GammaZero::base ? e.v : e.u;
        EXPECT_EQ(cls.set, g.family.set_of(*g.element_of(w)));
      }
    }
  }
}

TEST(Collapse, SandwichOnTheHalfNet) {
  const auto z = family({{"a", "b"}, {"c"}});
  const auto g0 = build_gamma0(z, 3);
  const auto g1 = build_gamma1(z, 3);
  const auto f = build_collapse_map(g0, g1);
  for (const auto& a : f.assignments()) {
    const DistanceField d0(*g0.graph, a.from);
    const DistanceField d1(*g1.graph, a.to);
    for (const auto& b : f.assignments()) {
      const Rational lower = d0.to(b.from) - Rational(2);
      const Rational image = d1.to(b.to);
      ASSERT_LE(lower, image);
      ASSERT_LE(image, d0.to(b.from));
    }
  }
}

TEST(Collapse, ConstantTwoAndNotOne) {
  const auto z = family({{"a", "b"}, {"c"}});
  const auto f = build_collapse_map(build_gamma0(z, 3), build_gamma1(z, 3));
  EXPECT_TRUE(verify_quasi_isometry(f, 2, VerifyMode::exhaustive()).accepted());
  const auto rejected = verify_quasi_isometry(f, 1, VerifyMode::exhaustive());
  ASSERT_FALSE(rejected.accepted());
  EXPECT_EQ(rejected.violation->kind, ViolationKind::LowerBound);
  EXPECT_EQ(rejected.violation->target_distance, Rational(0));
  EXPECT_EQ(minimal_qi_constant(f), 2);
}

TEST(Collapse, RejectsMismatchedSpaces) {
  const auto g0 = build_gamma0(family({{"a", "b"}, {"c"}}), 3);
  EXPECT_THROW(build_collapse_map(g0, build_gamma1(family({{"a", "b"}, {"c"}}), 2)), Error);
  EXPECT_THROW(build_collapse_map(g0, build_gamma1(family({{"a"}, {"c"}}), 3)), Error);
}

TEST(FarWitness, Examples) {
  const auto g = build_gamma0(family({{"a"}, {"c"}}), 30);
  EXPECT_EQ(find_far_witness(g, g.point("a", 5), g.point("a", 2), Rational(3)), g.vertex_of("c", 13));
  EXPECT_EQ(find_far_witness(g, g.point("a", 2), g.point("c", 6), Rational(3)), g.vertex_of("c", 14));
  const auto b = GraphPoint::at_vertex(GammaZero::base);
  const VertexId z = find_far_witness(g, b, b, Rational(1));
  EXPECT_EQ(g.vertex_level(z), 4);
  EXPECT_TRUE(is_separated(*g.graph, b, GraphPoint::at_vertex(z), b, Rational(4)));
}

TEST(FarWitness, Errors) {
  const auto single = build_gamma0(family({{"a"}}), 30);
  try {
    find_far_witness(single, single.point("a", 9), single.point("a", 2), Rational(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoAlternateArm);
  }
  const auto shallow = build_gamma0(family({{"a"}, {"c"}}), 10);
  try {
    find_far_witness(shallow, shallow.point("a", 5), shallow.point("a", 2), Rational(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DepthTooSmall);
  }
}

TEST(FarWitness, PostconditionsOnRandomPairs) {
  const auto g = build_gamma0(family({{"a", "b"}, {"c"}, {"d"}}), 60);
  const auto net = half_net(*g.graph);
  std::mt19937_64 rng(4242);
  int checked = 0;
  while (checked < 150) {
    const auto& x = net[rng() % net.size()];
    const auto& y = net[rng() % net.size()];
    const Rational L(1 + static_cast<std::int64_t>(rng() % 8), 1 + static_cast<std::int64_t>(rng() % 2));
    if (level_of(g, x) + level_of(g, y) + L.ceil() + 3 > g.depth) continue;
    const auto z = GraphPoint::at_vertex(find_far_witness(g, x, y, L));
    ASSERT_GT(distance(*g.graph, x, z), L);
    ASSERT_GT(distance(*g.graph, y, z), L);
    ASSERT_GT(Rational(level_of(g, z)), L);
    ASSERT_TRUE(is_separated(*g.graph, x, z, y, Rational(4)));
    ++checked;
  }
}

TEST(LevelProfile, Examples) {
  const auto g = build_gamma0(family({{"a", "b"}, {"c"}}), 6);
  const auto& gr = *g.graph;
  EXPECT_EQ(level_profile(g, canonical_geodesic(gr, g.point("a", 1), g.point("a", 4))), LevelProfile::Increasing);
  EXPECT_EQ(level_profile(g, canonical_geodesic(gr, g.point("a", 4), g.point("b", 1))), LevelProfile::Decreasing);
  const auto v = canonical_geodesic(gr, g.point("a", 2), g.point("c", 3));
  EXPECT_EQ(level_profile(g, v), LevelProfile::VShaped);
  EXPECT_NE(std::find(v.vertices.begin(), v.vertices.end(), GammaZero::base), v.vertices.end());
  EXPECT_EQ(level_profile(g, canonical_geodesic(gr, g.point("a", 2), g.point("b", 2))), LevelProfile::Short);
}

TEST(LevelProfile, RejectsNonGeodesics) {
  const auto g = build_gamma0(family({{"a"}}), 4);
  auto geo = canonical_geodesic(*g.graph, g.point("a", 1), g.point("a", 3));
  geo.length = Rational(5);
  EXPECT_THROW(level_profile(g, geo), Error);
}

TEST(LevelProfile, EveryGeodesicBetweenRandomVerticesHasALegalShape) {
  const auto g = build_gamma0(family({{"a", "b"}, {"c"}, {"d", "e", "f"}}), 7);
  std::mt19937_64 rng(808);
  const auto n = g.graph->vertex_count();
  for (int i = 0; i < 300; ++i) {
    const auto x = GraphPoint::at_vertex(static_cast<VertexId>(rng() % n));
    const auto y = GraphPoint::at_vertex(static_cast<VertexId>(rng() % n));
    const auto set = enumerate_geodesics(*g.graph, x, y, 2000);
    for (const auto& geo : set.geodesics) ASSERT_NO_THROW(level_profile(g, geo));
  }
}
