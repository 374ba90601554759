#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qichoice/error.hpp"
#include "qichoice/rational.hpp"

namespace qichoice {

using VertexId = std::uint32_t;
using EdgeId = std::uint32_t;

struct Vertex {
  VertexId id = 0;
  std::optional<std::string> label;

  friend bool operator==(const Vertex&, const Vertex&) = default;
};

struct Edge {
  EdgeId id = 0;
  VertexId u = 0;
  VertexId v = 0;
  Rational length{1};
  // When present, one of u or v.
  std::optional<VertexId> label;

  VertexId other(VertexId x) const { return x == u ? v : u; }

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Incidence {
  EdgeId edge;
  VertexId other;
};

// Finite graph with positive rational edge lengths, metrized as a path
// metric. Ids are dense: vertex i is vertices()[i], edge j is edges()[j].
// Parallel edges are distinct edges; self-loops are rejected.
class LabeledMetricGraph {
 public:
  VertexId add_vertex(std::optional<std::string> label = std::nullopt) {
    const auto id = static_cast<VertexId>(vertices_.size());
    vertices_.push_back({id, std::move(label)});
    adjacency_.emplace_back();
    return id;
  }

  EdgeId add_edge(VertexId u, VertexId v, Rational length,
                  std::optional<VertexId> label = std::nullopt) {
    if (u >= vertices_.size() || v >= vertices_.size())
      throw Error(ErrorCode::InvalidGraph, "edge endpoint does not exist");
    if (u == v) throw Error(ErrorCode::InvalidGraph, "self-loop at vertex " + std::to_string(u));
    if (length.sign() <= 0) throw Error(ErrorCode::InvalidGraph, "edge length must be positive");
    if (label && *label != u && *label != v)
      throw Error(ErrorCode::InvalidGraph, "edge label must be one of its endpoints");
    const auto id = static_cast<EdgeId>(edges_.size());
    edges_.push_back({id, u, v, length, label});
    adjacency_[u].push_back({id, v});
    adjacency_[v].push_back({id, u});
    length_lcm_ = lcm_checked(length_lcm_, length.den());
    if (length != Rational(1)) unit_ = false;
    return id;
  }

  void set_basepoint(std::optional<VertexId> b) {
    if (b && *b >= vertices_.size()) throw Error(ErrorCode::InvalidGraph, "basepoint does not exist");
    basepoint_ = b;
  }

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool has_vertex(VertexId v) const { return v < vertices_.size(); }
  bool has_edge(EdgeId e) const { return e < edges_.size(); }

  const Vertex& vertex(VertexId v) const { return vertices_.at(v); }
  const Edge& edge(EdgeId e) const { return edges_.at(e); }
  std::span<const Vertex> vertices() const { return vertices_; }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const Incidence> incident(VertexId v) const { return adjacency_.at(v); }
  std::size_t valence(VertexId v) const { return adjacency_.at(v).size(); }
  std::optional<VertexId> basepoint() const { return basepoint_; }

  // True when every edge has length exactly 1.
  bool unit_lengths() const { return unit_; }
  // Least common multiple of all edge-length denominators.
  std::int64_t length_lcm() const { return length_lcm_; }

  friend bool operator==(const LabeledMetricGraph& a, const LabeledMetricGraph& b) {
    return a.vertices_ == b.vertices_ && a.edges_ == b.edges_ && a.basepoint_ == b.basepoint_;
  }

  static std::int64_t lcm_checked(std::int64_t a, std::int64_t b) {
    const std::int64_t g = std::gcd(a, b);
    const __int128 r = static_cast<__int128>(a / g) * b;
    if (r > (std::int64_t{1} << 52)) throw std::overflow_error("common denominator too large");
    return static_cast<std::int64_t>(r);
  }

 private:
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Incidence>> adjacency_;
  std::optional<VertexId> basepoint_;
  std::int64_t length_lcm_ = 1;
  bool unit_ = true;
};

// A vertex, or a point strictly inside an edge. The offset is the fraction of
// the edge length measured from edge.u towards edge.v.
class GraphPoint {
 public:
  GraphPoint() = default;

  static GraphPoint at_vertex(VertexId v) {
    GraphPoint p;
    p.interior_ = false;
    p.id_ = v;
    return p;
  }

  // Offsets 0 and 1 normalize to the endpoint vertices.
  static GraphPoint on_edge(const LabeledMetricGraph& g, EdgeId e, Rational offset) {
    if (!g.has_edge(e)) throw Error(ErrorCode::InvalidPoint, "edge " + std::to_string(e) + " does not exist");
    if (offset < Rational(0) || offset > Rational(1))
      throw Error(ErrorCode::InvalidPoint, "edge offset outside [0,1]: " + offset.str());
    if (offset.is_zero()) return at_vertex(g.edge(e).u);
    if (offset == Rational(1)) return at_vertex(g.edge(e).v);
    return interior(e, offset);
  }

  // Requires 0 < offset < 1; does not check that the edge exists.
  static GraphPoint interior(EdgeId e, Rational offset) {
    if (offset <= Rational(0) || offset >= Rational(1))
      throw Error(ErrorCode::InvalidPoint, "interior offset must lie in (0,1): " + offset.str());
    GraphPoint p;
    p.interior_ = true;
    p.id_ = e;
    p.offset_ = offset;
    return p;
  }

  static GraphPoint midpoint_of(EdgeId e) { return interior(e, Rational(1, 2)); }

  bool is_vertex() const { return !interior_; }
  bool is_interior() const { return interior_; }
  VertexId vertex() const { return id_; }
  EdgeId edge() const { return id_; }
  Rational offset() const { return offset_; }

  // Vertices first (by id), then interior points by (edge, offset).
  friend std::strong_ordering operator<=>(const GraphPoint& a, const GraphPoint& b) {
    if (auto c = a.interior_ <=> b.interior_; c != 0) return c;
    if (auto c = a.id_ <=> b.id_; c != 0) return c;
    return a.offset_ <=> b.offset_;
  }
  friend bool operator==(const GraphPoint& a, const GraphPoint& b) = default;

 private:
  bool interior_ = false;
  std::uint32_t id_ = 0;
  Rational offset_{0};
};

inline void validate_point(const LabeledMetricGraph& g, const GraphPoint& p) {
  if (p.is_vertex() ? !g.has_vertex(p.vertex()) : !g.has_edge(p.edge()))
    throw Error(ErrorCode::InvalidPoint,
                std::string(p.is_vertex() ? "vertex " : "edge ") + std::to_string(p.vertex()) + " does not exist");
}

inline bool is_connected(const LabeledMetricGraph& g) {
  if (g.vertex_count() == 0) return true;
  std::vector<char> seen(g.vertex_count(), 0);
  std::vector<VertexId> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const VertexId x = stack.back();
    stack.pop_back();
    for (const auto& inc : g.incident(x)) {
      if (!seen[inc.other]) {
        seen[inc.other] = 1;
        ++count;
        stack.push_back(inc.other);
      }
    }
  }
  return count == g.vertex_count();
}

// Exact single- or multi-source distance field. Distances are computed in
// integers after scaling every length and seed by a common denominator, so
// the result is exact. The graph must outlive the field.
class DistanceField {
 public:
  DistanceField(const LabeledMetricGraph& g, const GraphPoint& source)
      : DistanceField(g, std::span<const GraphPoint>(&source, 1)) {}

  DistanceField(const LabeledMetricGraph& g, std::span<const GraphPoint> sources) : g_(&g) {
    std::vector<std::pair<VertexId, Rational>> seeds;
    std::int64_t scale = g.length_lcm();
    for (const auto& p : sources) {
      validate_point(g, p);
      if (p.is_vertex()) {
        seeds.emplace_back(p.vertex(), Rational(0));
      } else {
        const Edge& e = g.edge(p.edge());
        const Rational to_u = p.offset() * e.length;
        const Rational to_v = (Rational(1) - p.offset()) * e.length;
        seeds.emplace_back(e.u, to_u);
        seeds.emplace_back(e.v, to_v);
        scale = LabeledMetricGraph::lcm_checked(scale, to_u.den());
        scale = LabeledMetricGraph::lcm_checked(scale, to_v.den());
        on_edge_[p.edge()].push_back(p.offset());
      }
    }
    scale_ = scale;
    run(seeds);
  }

  bool reachable(VertexId v) const { return dist_.at(v) >= 0; }

  Rational to_vertex(VertexId v) const {
    const std::int64_t d = dist_.at(v);
    if (d < 0) throw Error(ErrorCode::DisconnectedGraph, "vertex " + std::to_string(v) + " is unreachable");
    return Rational(d, scale_);
  }

  Rational to(const GraphPoint& q) const {
    validate_point(*g_, q);
    if (q.is_vertex()) return to_vertex(q.vertex());
    const Edge& e = g_->edge(q.edge());
    std::optional<Rational> best;
    auto consider = [&](const Rational& d) {
      if (!best || d < *best) best = d;
    };
    if (reachable(e.u)) consider(to_vertex(e.u) + q.offset() * e.length);
    if (reachable(e.v)) consider(to_vertex(e.v) + (Rational(1) - q.offset()) * e.length);
    if (auto it = on_edge_.find(q.edge()); it != on_edge_.end())
      for (const auto& s : it->second) consider((s - q.offset()).abs() * e.length);
    if (!best) throw Error(ErrorCode::DisconnectedGraph, "point is unreachable");
    return *best;
  }

  // Offsets of sources lying in the interior of edge e.
  std::span<const Rational> sources_on_edge(EdgeId e) const {
    if (auto it = on_edge_.find(e); it != on_edge_.end()) return it->second;
    return {};
  }

  const LabeledMetricGraph& graph() const { return *g_; }

 private:
  void run(const std::vector<std::pair<VertexId, Rational>>& seeds) {
    const std::size_t n = g_->vertex_count();
    dist_.assign(n, -1);
    auto scaled = [&](const Rational& r) {
      const __int128 v = static_cast<__int128>(r.num()) * (scale_ / r.den());
      if (v > (std::int64_t{1} << 60)) throw std::overflow_error("scaled distance too large");
      return static_cast<std::int64_t>(v);
    };
    bool all_zero = true;
    for (const auto& [v, d] : seeds) all_zero = all_zero && d.is_zero();
    if (g_->unit_lengths() && scale_ == 1 && all_zero) {
      std::deque<VertexId> queue;
      for (const auto& [v, d] : seeds) {
        if (dist_[v] < 0) {
          dist_[v] = 0;
          queue.push_back(v);
        }
      }
      while (!queue.empty()) {
        const VertexId x = queue.front();
        queue.pop_front();
        for (const auto& inc : g_->incident(x)) {
          if (dist_[inc.other] < 0) {
            dist_[inc.other] = dist_[x] + 1;
            queue.push_back(inc.other);
          }
        }
      }
      return;
    }
    std::vector<std::int64_t> edge_len(g_->edge_count());
    for (const auto& e : g_->edges()) edge_len[e.id] = scaled(e.length);
    using Item = std::pair<std::int64_t, VertexId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (const auto& [v, d] : seeds) {
      const std::int64_t s = scaled(d);
      if (dist_[v] < 0 || s < dist_[v]) {
        dist_[v] = s;
        heap.emplace(s, v);
      }
    }
    while (!heap.empty()) {
      const auto [d, x] = heap.top();
      heap.pop();
      if (d != dist_[x]) continue;
      for (const auto& inc : g_->incident(x)) {
        const std::int64_t nd = d + edge_len[inc.edge];
        if (dist_[inc.other] < 0 || nd < dist_[inc.other]) {
          dist_[inc.other] = nd;
          heap.emplace(nd, inc.other);
        }
      }
    }
  }

  const LabeledMetricGraph* g_;
  std::int64_t scale_ = 1;
  std::vector<std::int64_t> dist_;
  std::unordered_map<EdgeId, std::vector<Rational>> on_edge_;
};

inline Rational distance(const LabeledMetricGraph& g, const GraphPoint& p, const GraphPoint& q) {
  validate_point(g, q);
  return DistanceField(g, p).to(q);
}

// Position of p along edge e as a fraction from e.u, if p lies on the closed edge.
inline std::optional<Rational> position_on_edge(const LabeledMetricGraph& g, const GraphPoint& p, EdgeId e) {
  const Edge& edge = g.edge(e);
  if (p.is_interior()) return p.edge() == e ? std::optional<Rational>(p.offset()) : std::nullopt;
  if (p.vertex() == edge.u) return Rational(0);
  if (p.vertex() == edge.v) return Rational(1);
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Geodesics

struct Geodesic {
  GraphPoint start;
  std::vector<VertexId> vertices;  // vertex hits in traversal order
  std::vector<EdgeId> edges;       // one per hop between consecutive vertices
  GraphPoint end;
  Rational length{0};

  friend bool operator==(const Geodesic&, const Geodesic&) = default;
};

// Piece of a geodesic inside a single edge, as fractions from edge.u.
struct Segment {
  EdgeId edge;
  Rational from;
  Rational to;
};

// Decomposes a geodesic into per-edge segments in traversal order.
inline std::vector<Segment> segments_of(const LabeledMetricGraph& g, const Geodesic& geo) {
  std::vector<Segment> out;
  if (geo.vertices.empty()) {
    if (geo.start == geo.end) return out;
    if (!geo.start.is_interior() || !geo.end.is_interior() || geo.start.edge() != geo.end.edge())
      throw Error(ErrorCode::NotAGeodesic, "vertex-free geodesic must stay inside one edge");
    out.push_back({geo.start.edge(), geo.start.offset(), geo.end.offset()});
    return out;
  }
  auto end_fraction = [&](EdgeId e, VertexId v) {
    const Edge& edge = g.edge(e);
    if (v == edge.u) return Rational(0);
    if (v == edge.v) return Rational(1);
    throw Error(ErrorCode::NotAGeodesic, "vertex " + std::to_string(v) + " is not on edge " + std::to_string(e));
  };
  if (geo.start.is_interior()) {
    out.push_back({geo.start.edge(), geo.start.offset(), end_fraction(geo.start.edge(), geo.vertices.front())});
  } else if (geo.start.vertex() != geo.vertices.front()) {
    throw Error(ErrorCode::NotAGeodesic, "start vertex does not match first vertex hit");
  }
  if (geo.edges.size() + 1 != geo.vertices.size())
    throw Error(ErrorCode::NotAGeodesic, "edge sequence length must be one less than vertex sequence length");
  for (std::size_t i = 0; i < geo.edges.size(); ++i) {
    const EdgeId e = geo.edges[i];
    if (!g.has_edge(e)) throw Error(ErrorCode::NotAGeodesic, "unknown edge " + std::to_string(e));
    const Rational a = end_fraction(e, geo.vertices[i]);
    const Rational b = end_fraction(e, geo.vertices[i + 1]);
    if (a == b) throw Error(ErrorCode::NotAGeodesic, "hop does not cross its edge");
    out.push_back({e, a, b});
  }
  if (geo.end.is_interior()) {
    out.push_back({geo.end.edge(), end_fraction(geo.end.edge(), geo.vertices.back()), geo.end.offset()});
  } else if (geo.end.vertex() != geo.vertices.back()) {
    throw Error(ErrorCode::NotAGeodesic, "end vertex does not match last vertex hit");
  }
  return out;
}

inline Rational segment_length(const LabeledMetricGraph& g, const Segment& s) {
  return (s.to - s.from).abs() * g.edge(s.edge).length;
}

// Sum of traversed sub-lengths; throws NotAGeodesic on structural errors.
inline Rational path_length(const LabeledMetricGraph& g, const Geodesic& geo) {
  Rational total{0};
  for (const auto& s : segments_of(g, geo)) total += segment_length(g, s);
  return total;
}

// Point at arc-length t from the start (0 <= t <= length).
inline GraphPoint point_along(const LabeledMetricGraph& g, const Geodesic& geo, Rational t) {
  if (t.sign() < 0 || t > geo.length) throw Error(ErrorCode::InvalidPoint, "parameter outside geodesic");
  if (t.is_zero()) return geo.start;
  Rational walked{0};
  for (const auto& s : segments_of(g, geo)) {
    const Rational len = segment_length(g, s);
    if (t <= walked + len) {
      const Rational frac = (t - walked) / len;
      return GraphPoint::on_edge(g, s.edge, s.from + (s.to - s.from) * frac);
    }
    walked += len;
  }
  return geo.end;
}

// Vertex hits plus the midpoint of every traversed segment, in order.
inline std::vector<GraphPoint> probe_points(const LabeledMetricGraph& g, const Geodesic& geo) {
  std::vector<GraphPoint> out{geo.start};
  auto segs = segments_of(g, geo);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& s = segs[i];
    out.push_back(GraphPoint::on_edge(g, s.edge, (s.from + s.to) / Rational(2)));
    out.push_back(GraphPoint::on_edge(g, s.edge, s.to));
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct GeodesicSet {
  std::vector<Geodesic> geodesics;
  bool truncated = false;  // the cap was hit and more geodesics exist
};

// All geodesics from p to q, in lexicographic order of
// (vertex sequence, edge sequence), up to `cap`.
inline GeodesicSet enumerate_geodesics(const LabeledMetricGraph& g, const GraphPoint& p, const GraphPoint& q,
                                       std::size_t cap) {
  validate_point(g, p);
  validate_point(g, q);
  GeodesicSet result;
  if (cap == 0) {
    result.truncated = true;
    return result;
  }
  const DistanceField from_p(g, p);
  const DistanceField from_q(g, q);
  const Rational total = from_p.to(q);

  if (p == q) {
    Geodesic geo{p, {}, {}, q, Rational(0)};
    if (p.is_vertex()) geo.vertices.push_back(p.vertex());
    result.geodesics.push_back(std::move(geo));
    return result;
  }

  auto emit = [&](Geodesic geo) -> bool {
    if (result.geodesics.size() == cap) {
      result.truncated = true;
      return false;
    }
    result.geodesics.push_back(std::move(geo));
    return true;
  };

  // Direct route inside a shared edge has no vertex hits and sorts first.
  if (p.is_interior() && q.is_interior() && p.edge() == q.edge()) {
    if ((p.offset() - q.offset()).abs() * g.edge(p.edge()).length == total)
      if (!emit({p, {}, {}, q, total})) return result;
  }

  // Arc length from p to a first vertex x, when p sits on an edge through x.
  auto start_cost = [&](VertexId x) -> Rational {
    const Edge& e = g.edge(p.edge());
    return x == e.u ? p.offset() * e.length : (Rational(1) - p.offset()) * e.length;
  };
  auto finish_cost = [&](VertexId x) -> std::optional<Rational> {
    if (q.is_vertex()) return x == q.vertex() ? std::optional<Rational>(Rational(0)) : std::nullopt;
    const Edge& e = g.edge(q.edge());
    if (x == e.u) return q.offset() * e.length;
    if (x == e.v) return (Rational(1) - q.offset()) * e.length;
    return std::nullopt;
  };

  std::vector<VertexId> starts;
  if (p.is_vertex()) {
    starts.push_back(p.vertex());
  } else {
    const Edge& e = g.edge(p.edge());
    for (VertexId x : {std::min(e.u, e.v), std::max(e.u, e.v)})
      if (from_q.reachable(x) && start_cost(x) + from_q.to_vertex(x) == total) starts.push_back(x);
  }

  std::vector<VertexId> vseq;
  std::vector<std::vector<EdgeId>> choices;  // parallel edges per hop
  bool stop = false;

  auto emit_products = [&]() {
    std::vector<std::size_t> idx(choices.size(), 0);
    while (true) {
      Geodesic geo{p, vseq, {}, q, total};
      geo.edges.reserve(choices.size());
      for (std::size_t i = 0; i < choices.size(); ++i) geo.edges.push_back(choices[i][idx[i]]);
      if (!emit(std::move(geo))) {
        stop = true;
        return;
      }
      std::size_t k = choices.size();
      while (k > 0) {
        --k;
        if (++idx[k] < choices[k].size()) break;
        idx[k] = 0;
        if (k == 0) return;
      }
      if (choices.empty()) return;
    }
  };

  std::function<void(VertexId, const Rational&)> dfs = [&](VertexId x, const Rational& walked) {
    if (stop) return;
    vseq.push_back(x);
    if (auto fin = finish_cost(x); fin && walked + *fin == total) emit_products();
    // group next hops by neighbour vertex
    std::vector<std::pair<VertexId, EdgeId>> next;
    for (const auto& inc : g.incident(x)) {
      if (!from_q.reachable(inc.other)) continue;
      if (walked + g.edge(inc.edge).length + from_q.to_vertex(inc.other) == total)
        next.emplace_back(inc.other, inc.edge);
    }
    std::sort(next.begin(), next.end());
    for (std::size_t i = 0; i < next.size() && !stop;) {
      std::size_t j = i;
      std::vector<EdgeId> parallel;
      while (j < next.size() && next[j].first == next[i].first) parallel.push_back(next[j++].second);
      choices.push_back(std::move(parallel));
      dfs(next[i].first, walked + g.edge(choices.back().front()).length);
      choices.pop_back();
      i = j;
    }
    vseq.pop_back();
  };

  for (VertexId s : starts) {
    if (stop) break;
    dfs(s, p.is_vertex() ? Rational(0) : start_cost(s));
  }
  return result;
}

inline Geodesic canonical_geodesic(const LabeledMetricGraph& g, const GraphPoint& p, const GraphPoint& q) {
  auto set = enumerate_geodesics(g, p, q, 1);
  if (set.geodesics.empty()) throw Error(ErrorCode::DisconnectedGraph, "no geodesic");
  return std::move(set.geodesics.front());
}

// ---------------------------------------------------------------------------
// Ball deletion

// Surviving piece of an edge after deleting a closed ball. Bounds are
// fractions from edge.u; a closed bound can only be 0 or 1 (the endpoint
// vertex survives).
struct EdgeFragment {
  EdgeId edge;
  Rational from;
  Rational to;
  bool from_closed;
  bool to_closed;
  int component;

  bool contains(const Rational& s) const {
    const bool after = from_closed ? s >= from : s > from;
    const bool before = to_closed ? s <= to : s < to;
    return after && before;
  }
};

struct ComponentIndex {
  std::vector<int> vertex_component;   // -1 for deleted vertices
  std::vector<EdgeFragment> fragments;  // sorted by (edge, from)
  int component_count = 0;

  std::optional<int> component_of(const GraphPoint& p) const {
    if (p.is_vertex()) {
      const int c = vertex_component.at(p.vertex());
      return c < 0 ? std::nullopt : std::optional<int>(c);
    }
    auto it = std::lower_bound(fragments.begin(), fragments.end(), p.edge(),
                               [](const EdgeFragment& f, EdgeId e) { return f.edge < e; });
    for (; it != fragments.end() && it->edge == p.edge(); ++it)
      if (it->contains(p.offset())) return it->component;
    return std::nullopt;
  }
};

namespace detail {

struct DisjointSets {
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> parent;
};

}  // namespace detail

// Connected components of G minus the closed ball of the given radius around
// the field's source. Components are numbered by their smallest surviving
// vertex id; vertex-free components follow in (edge, offset) order.
inline ComponentIndex ball_complement_components(const DistanceField& field, const Rational& radius) {
  const LabeledMetricGraph& g = field.graph();
  ComponentIndex index;
  const std::size_t n = g.vertex_count();
  std::vector<char> alive(n, 0);
  for (VertexId v = 0; v < n; ++v) alive[v] = !field.reachable(v) || field.to_vertex(v) > radius;

  struct Interval {
    Rational lo, hi;
  };
  for (const auto& e : g.edges()) {
    std::vector<Interval> covered;
    if (field.reachable(e.u)) {
      const Rational du = field.to_vertex(e.u);
      if (du <= radius) covered.push_back({Rational(0), (radius - du) / e.length});
    }
    if (field.reachable(e.v)) {
      const Rational dv = field.to_vertex(e.v);
      if (dv <= radius) covered.push_back({Rational(1) - (radius - dv) / e.length, Rational(1)});
    }
    for (const auto& s : field.sources_on_edge(e.id))
      covered.push_back({s - radius / e.length, s + radius / e.length});
    for (auto& c : covered) {
      c.lo = max(c.lo, Rational(0));
      c.hi = min(c.hi, Rational(1));
    }
    std::sort(covered.begin(), covered.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    // walk the complement of the union in [0,1]
    Rational cursor{0};
    bool cursor_closed = true;  // cursor itself is not covered
    for (const auto& c : covered) {
      if (c.lo > cursor) {
        index.fragments.push_back({e.id, cursor, c.lo, cursor_closed, false, -1});
      }
      if (c.hi > cursor || (c.hi == cursor && cursor_closed)) {
        cursor = max(cursor, c.hi);
        cursor_closed = false;
      }
    }
    if (cursor < Rational(1)) index.fragments.push_back({e.id, cursor, Rational(1), cursor_closed, true, -1});
  }

  const std::size_t fcount = index.fragments.size();
  detail::DisjointSets sets(n + fcount);
  for (std::size_t i = 0; i < fcount; ++i) {
    const auto& f = index.fragments[i];
    const Edge& e = g.edge(f.edge);
    if (f.from_closed && f.from.is_zero()) sets.unite(n + i, e.u);
    if (f.to_closed && f.to == Rational(1)) sets.unite(n + i, e.v);
  }
  std::vector<int> label(n + fcount, -1);
  int next = 0;
  index.vertex_component.assign(n, -1);
  for (VertexId v = 0; v < n; ++v) {
    if (!alive[v]) continue;
    const std::size_t root = sets.find(v);
    if (label[root] < 0) label[root] = next++;
    index.vertex_component[v] = label[root];
  }
  for (std::size_t i = 0; i < fcount; ++i) {
    const std::size_t root = sets.find(n + i);
    if (label[root] < 0) label[root] = next++;
    index.fragments[i].component = label[root];
  }
  index.component_count = next;
  return index;
}

inline ComponentIndex ball_complement_components(const LabeledMetricGraph& g, const GraphPoint& center,
                                                 const Rational& radius) {
  return ball_complement_components(DistanceField(g, center), radius);
}

// True iff every path from x to y meets the closed ball B(w, r).
inline bool is_separated(const LabeledMetricGraph& g, const GraphPoint& x, const GraphPoint& y,
                         const GraphPoint& w, const Rational& r) {
  validate_point(g, x);
  validate_point(g, y);
  const DistanceField field(g, w);
  if (field.to(x) <= r || field.to(y) <= r) return true;
  const auto index = ball_complement_components(field, r);
  return index.component_of(x) != index.component_of(y);
}

// A vertex route from x to y avoiding B(w, r), if one exists. The route lists
// the surviving vertices passed through; it is empty when x and y share a
// surviving edge fragment.
inline std::optional<std::vector<VertexId>> avoiding_route(const LabeledMetricGraph& g, const GraphPoint& x,
                                                           const GraphPoint& y, const GraphPoint& w,
                                                           const Rational& r) {
  const DistanceField field(g, w);
  if (field.to(x) <= r || field.to(y) <= r) return std::nullopt;
  const auto index = ball_complement_components(field, r);
  if (index.component_of(x) != index.component_of(y)) return std::nullopt;

  auto fragment_of = [&](const GraphPoint& p) -> const EdgeFragment* {
    for (const auto& f : index.fragments)
      if (f.edge == p.edge() && f.contains(p.offset())) return &f;
    return nullptr;
  };
  auto entry_vertices = [&](const GraphPoint& p) {
    std::vector<VertexId> out;
    if (p.is_vertex()) {
      out.push_back(p.vertex());
      return out;
    }
    const auto* f = fragment_of(p);
    if (f->from_closed && f->from.is_zero()) out.push_back(g.edge(p.edge()).u);
    if (f->to_closed && f->to == Rational(1)) out.push_back(g.edge(p.edge()).v);
    return out;
  };
  if (x.is_interior() && y.is_interior() && fragment_of(x) == fragment_of(y)) return std::vector<VertexId>{};

  auto edge_survives = [&](EdgeId e) {
    for (const auto& f : index.fragments)
      if (f.edge == e && f.from.is_zero() && f.to == Rational(1) && f.from_closed && f.to_closed) return true;
    return false;
  };
  std::vector<std::int64_t> parent(g.vertex_count(), -2);
  std::deque<VertexId> queue;
  for (VertexId s : entry_vertices(x)) {
    parent[s] = -1;
    queue.push_back(s);
  }
  const auto targets = entry_vertices(y);
  while (!queue.empty()) {
    const VertexId v = queue.front();
    queue.pop_front();
    if (std::find(targets.begin(), targets.end(), v) != targets.end()) {
      std::vector<VertexId> route;
      for (std::int64_t c = v; c >= 0; c = parent[c]) route.push_back(static_cast<VertexId>(c));
      std::reverse(route.begin(), route.end());
      return route;
    }
    for (const auto& inc : g.incident(v)) {
      if (parent[inc.other] != -2 || index.vertex_component[inc.other] < 0 || !edge_survives(inc.edge)) continue;
      parent[inc.other] = v;
      queue.push_back(inc.other);
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

// All vertices followed by the midpoint of every edge.
inline std::vector<GraphPoint> half_net(const LabeledMetricGraph& g) {
  std::vector<GraphPoint> net;
  net.reserve(g.vertex_count() + g.edge_count());
  for (const auto& v : g.vertices()) net.push_back(GraphPoint::at_vertex(v.id));
  for (const auto& e : g.edges()) net.push_back(GraphPoint::midpoint_of(e.id));
  return net;
}

inline LabeledMetricGraph scale_metric(const LabeledMetricGraph& g, const Rational& lambda) {
  if (lambda.sign() <= 0) throw Error(ErrorCode::NonPositiveScale, "scale factor must be positive: " + lambda.str());
  LabeledMetricGraph out;
  for (const auto& v : g.vertices()) out.add_vertex(v.label);
  for (const auto& e : g.edges()) out.add_edge(e.u, e.v, e.length * lambda, e.label);
  out.set_basepoint(g.basepoint());
  return out;
}

}  // namespace qichoice

template <>
struct std::hash<qichoice::GraphPoint> {
  std::size_t operator()(const qichoice::GraphPoint& p) const noexcept {
    const std::size_t base = p.is_vertex() ? p.vertex() : (std::size_t{1} << 40) ^ p.edge();
    return base * 0x9E3779B97F4A7C15ull ^ std::hash<qichoice::Rational>{}(p.offset());
  }
};
