#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "qichoice/error.hpp"
#include "qichoice/gamma_spaces.hpp"
#include "qichoice/metric_graph.hpp"

namespace qichoice {

// Which point tuples an analysis visits.
struct SampleSource {
  enum class Kind { Exhaustive, Sampled };
  Kind kind = Kind::Exhaustive;
  std::uint64_t seed = 0;
  std::size_t count = 0;

  static SampleSource exhaustive() { return {}; }
  static SampleSource sampled(std::uint64_t seed, std::size_t count) { return {Kind::Sampled, seed, count}; }
};

// ---------------------------------------------------------------------------
// Slim triangles

struct DeltaWitness {
  VertexId x, y, z;
  GraphPoint probe;
};

struct DeltaReport {
  Rational delta_upper_observed{0};
  std::size_t triples_checked = 0;
  SampleSource mode;
  // True delta is at most delta_upper_observed + sampling_slack.
  Rational sampling_slack{0};
  std::optional<DeltaWitness> witness;  // first triple attaining the maximum
};

namespace detail {

// Vertex-to-vertex distances, one lazily computed field per source vertex.
class VertexDistances {
 public:
  explicit VertexDistances(const LabeledMetricGraph& g) : g_(&g), rows_(g.vertex_count()) {}

  Rational operator()(VertexId a, VertexId b) {
    auto& row = rows_[a];
    if (!row) row = std::make_unique<DistanceField>(*g_, GraphPoint::at_vertex(a));
    return row->to_vertex(b);
  }

 private:
  const LabeledMetricGraph* g_;
  std::vector<std::unique_ptr<DistanceField>> rows_;
};

// Union of all geodesics between two vertices: member vertices and edges.
struct GeodesicUnion {
  std::vector<char> vertex;
  std::vector<char> edge;
  std::vector<VertexId> vertex_list;
  std::vector<EdgeId> edge_list;
};

inline GeodesicUnion geodesic_union(const LabeledMetricGraph& g, VertexDistances& dist, VertexId a, VertexId c) {
  GeodesicUnion u;
  u.vertex.assign(g.vertex_count(), 0);
  u.edge.assign(g.edge_count(), 0);
  const Rational total = dist(a, c);
  for (VertexId w = 0; w < g.vertex_count(); ++w) {
    if (dist(a, w) + dist(c, w) == total) {
      u.vertex[w] = 1;
      u.vertex_list.push_back(w);
    }
  }
  for (const auto& e : g.edges()) {
    if (!u.vertex[e.u] || !u.vertex[e.v]) continue;
    if (dist(a, e.u) + e.length + dist(c, e.v) == total || dist(a, e.v) + e.length + dist(c, e.u) == total) {
      u.edge[e.id] = 1;
      u.edge_list.push_back(e.id);
    }
  }
  return u;
}

inline Rational max_edge_length(const LabeledMetricGraph& g) {
  Rational best{0};
  for (const auto& e : g.edges()) best = max(best, e.length);
  return best;
}

}  // namespace detail

// Largest distance from a probe on any geodesic [x,y] to the union of all
// geodesics [x,z] and [z,y], over vertex triples. Probes are vertices and edge
// midpoints, so the reported value may undershoot the true delta by at most
// sampling_slack.
inline DeltaReport slim_triangle_delta(const LabeledMetricGraph& g, SampleSource source) {
  if (!is_connected(g)) throw Error(ErrorCode::DisconnectedGraph, "graph is not connected");
  DeltaReport report;
  report.mode = source;
  report.sampling_slack = detail::max_edge_length(g) / Rational(2);
  const std::size_t n = g.vertex_count();
  if (n == 0) return report;
  detail::VertexDistances dist(g);

  auto check = [&](VertexId x, VertexId y, VertexId z) {
    const auto side = detail::geodesic_union(g, dist, x, y);
    const auto left = detail::geodesic_union(g, dist, x, z);
    const auto right = detail::geodesic_union(g, dist, z, y);
    std::vector<VertexId> others = left.vertex_list;
    others.insert(others.end(), right.vertex_list.begin(), right.vertex_list.end());
    auto covered_vertex = [&](VertexId v) { return left.vertex[v] || right.vertex[v]; };
    auto covered_edge = [&](EdgeId e) { return left.edge[e] || right.edge[e]; };
    auto record = [&](const Rational& d, const GraphPoint& probe) {
      if (d > report.delta_upper_observed || (!report.witness && d == report.delta_upper_observed)) {
        report.delta_upper_observed = d;
        report.witness = DeltaWitness{x, y, z, probe};
      }
    };
    for (VertexId p : side.vertex_list) {
      if (covered_vertex(p)) {
        record(Rational(0), GraphPoint::at_vertex(p));
        continue;
      }
      std::optional<Rational> best;
      for (VertexId w : others) {
        const Rational d = dist(p, w);
        if (!best || d < *best) best = d;
      }
      record(*best, GraphPoint::at_vertex(p));
    }
    for (EdgeId e : side.edge_list) {
      const auto mid = GraphPoint::midpoint_of(e);
      if (covered_edge(e)) {
        record(Rational(0), mid);
        continue;
      }
      const Edge& edge = g.edge(e);
      const Rational half = edge.length / Rational(2);
      std::optional<Rational> best;
      for (VertexId w : others) {
        const Rational d = half + min(dist(edge.u, w), dist(edge.v, w));
        if (!best || d < *best) best = d;
      }
      record(*best, mid);
    }
    ++report.triples_checked;
  };

  if (source.kind == SampleSource::Kind::Exhaustive) {
    for (VertexId x = 0; x < n; ++x)
      for (VertexId y = x + 1; y < n; ++y)
        for (VertexId z = 0; z < n; ++z) check(x, y, z);
  } else {
    std::mt19937_64 rng(source.seed);
    std::uniform_int_distribution<VertexId> pick(0, static_cast<VertexId>(n - 1));
    for (std::size_t k = 0; k < source.count; ++k) {
      const VertexId x = pick(rng), y = pick(rng), z = pick(rng);
      check(x, y, z);
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Separation certificate for Gamma_0

struct SeparationWitness {
  GraphPoint x, y, w;
};

struct SeparationReport {
  bool accepted = true;
  std::size_t pairs_checked = 0;
  std::size_t probes_checked = 0;
  std::size_t probes_skipped = 0;  // probes within 2 of an endpoint
  std::optional<SeparationWitness> witness;
};

// For sampled half-net pairs (x, y) and every probe w on the canonical
// geodesic with d(w,x) > 2 and d(w,y) > 2, checks that every path from x to
// y meets the closed ball B(w, 2). Since [x,z] u [z,y] is such a path, this
// certifies 2-slim triangles for every choice of geodesics.
inline SeparationReport certify_two_hyperbolic_gamma0(const GammaZero& g0, std::uint64_t seed, std::size_t count) {
  const auto& g = *g0.graph;
  const auto net = half_net(g);
  SeparationReport report;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, net.size() - 1);
  const Rational two(2);
  for (std::size_t k = 0; k < count && report.accepted; ++k) {
    const GraphPoint x = net[pick(rng)];
    const GraphPoint y = net[pick(rng)];
    ++report.pairs_checked;
    const Geodesic geo = canonical_geodesic(g, x, y);
    const DistanceField fx(g, x), fy(g, y);
    for (const auto& w : probe_points(g, geo)) {
      if (fx.to(w) <= two || fy.to(w) <= two) {
        ++report.probes_skipped;
        continue;
      }
      ++report.probes_checked;
      if (!is_separated(g, x, y, w, two)) {
        report.accepted = false;
        report.witness = SeparationWitness{x, y, w};
        break;
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Midpoints and the bottleneck condition

// Point at half the distance along the canonical geodesic.
inline GraphPoint midpoint(const LabeledMetricGraph& g, const GraphPoint& x, const GraphPoint& y) {
  if (x == y) return x;
  const Geodesic geo = canonical_geodesic(g, x, y);
  return point_along(g, geo, geo.length / Rational(2));
}

struct BottleneckViolation {
  GraphPoint x, y, m;
  // Vertices of a path from x to y that stays outside B(m, radius).
  std::vector<VertexId> avoiding_route;
};

struct BottleneckReport {
  Rational delta_param{3};
  Rational radius{2};
  SampleSource mode;
  std::size_t pairs_checked = 0;
  std::optional<BottleneckViolation> violation;

  bool accepted() const { return !violation.has_value(); }
};

// Checks that for every visited pair all x-y paths meet the closed ball of
// radius r < delta around the canonical midpoint; r defaults to delta - 1.
// Exhaustive mode visits vertex pairs in lexicographic order; sampled mode
// draws half-net pairs.
inline BottleneckReport verify_bottleneck(const LabeledMetricGraph& g, const Rational& delta,
                                          std::optional<Rational> radius, SampleSource source) {
  if (!is_connected(g)) throw Error(ErrorCode::DisconnectedGraph, "graph is not connected");
  BottleneckReport report;
  report.delta_param = delta;
  report.radius = radius.value_or(delta - Rational(1));
  report.mode = source;
  if (delta.sign() <= 0) throw Error(ErrorCode::SchemaError, "delta must be positive");
  if (report.radius.sign() < 0 || report.radius >= delta)
    throw Error(ErrorCode::SchemaError, "radius must satisfy 0 <= r < delta");

  auto check = [&](const GraphPoint& x, const GraphPoint& y) {
    ++report.pairs_checked;
    const GraphPoint m = midpoint(g, x, y);
    if (is_separated(g, x, y, m, report.radius)) return true;
    report.violation = BottleneckViolation{x, y, m, *avoiding_route(g, x, y, m, report.radius)};
    return false;
  };

  if (source.kind == SampleSource::Kind::Exhaustive) {
    for (VertexId x = 0; x < g.vertex_count(); ++x)
      for (VertexId y = x + 1; y < g.vertex_count(); ++y)
        if (!check(GraphPoint::at_vertex(x), GraphPoint::at_vertex(y))) return report;
  } else {
    const auto net = half_net(g);
    std::mt19937_64 rng(source.seed);
    std::uniform_int_distribution<std::size_t> pick(0, net.size() - 1);
    for (std::size_t k = 0; k < source.count; ++k) {
      const GraphPoint x = net[pick(rng)];
      const GraphPoint y = net[pick(rng)];
      if (!check(x, y)) return report;
    }
  }
  return report;
}

}  // namespace qichoice
