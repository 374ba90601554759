#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "qichoice/coarse_maps.hpp"
#include "qichoice/error.hpp"
#include "qichoice/metric_graph.hpp"

namespace qichoice {

// Connected acyclic metric graph (possibly empty). Pruned trees remember the
// id each vertex had in the tree they were pruned from.
class FiniteTree {
 public:
  explicit FiniteTree(GraphRef g) : FiniteTree(std::move(g), {}) {}

  FiniteTree(GraphRef g, std::vector<VertexId> origin) : graph_(std::move(g)), origin_(std::move(origin)) {
    if (!graph_) throw Error(ErrorCode::NotATree, "null graph");
    const auto n = graph_->vertex_count();
    if (n > 0 && (graph_->edge_count() != n - 1 || !is_connected(*graph_)))
      throw Error(ErrorCode::NotATree, "graph is not a tree (" + std::to_string(n) + " vertices, " +
                                           std::to_string(graph_->edge_count()) + " edges)");
    if (n == 0 && graph_->edge_count() != 0) throw Error(ErrorCode::NotATree, "edges without vertices");
    if (origin_.empty()) {
      origin_.resize(n);
      std::iota(origin_.begin(), origin_.end(), VertexId{0});
    }
    if (origin_.size() != n) throw Error(ErrorCode::NotATree, "origin map size mismatch");
  }

  const LabeledMetricGraph& graph() const { return *graph_; }
  const GraphRef& ref() const { return graph_; }
  bool empty() const { return graph_->vertex_count() == 0; }
  bool simplicial() const { return graph_->unit_lengths(); }
  std::span<const VertexId> origin() const { return origin_; }
  VertexId origin_of(VertexId v) const { return origin_.at(v); }

 private:
  GraphRef graph_;
  std::vector<VertexId> origin_;
};

struct PruneStep {
  FiniteTree tree;
  std::vector<VertexId> removed;  // in original ids
};

// Removes every valence-one vertex and its edge at once. An isolated vertex
// is stable; a single edge prunes to the empty tree.
inline PruneStep prune_once(const FiniteTree& t) {
  const auto& g = t.graph();
  const std::size_t n = g.vertex_count();
  std::vector<std::int64_t> remap(n, -1);
  std::vector<VertexId> origin;
  std::vector<VertexId> removed;
  LabeledMetricGraph out;
  for (VertexId v = 0; v < n; ++v) {
    if (g.valence(v) == 1) {
      removed.push_back(t.origin_of(v));
      continue;
    }
    remap[v] = out.add_vertex(g.vertex(v).label);
    origin.push_back(t.origin_of(v));
  }
  for (const auto& e : g.edges()) {
    if (remap[e.u] < 0 || remap[e.v] < 0) continue;
    std::optional<VertexId> label;
    if (e.label) label = static_cast<VertexId>(remap[*e.label]);
    out.add_edge(static_cast<VertexId>(remap[e.u]), static_cast<VertexId>(remap[e.v]), e.length, label);
  }
  if (auto b = g.basepoint(); b && remap[*b] >= 0) out.set_basepoint(static_cast<VertexId>(remap[*b]));
  return {FiniteTree(share(std::move(out)), std::move(origin)), std::move(removed)};
}

struct PruneTrace {
  std::vector<std::vector<VertexId>> stages;  // removed vertices per round, original ids
  std::size_t rounds = 0;
  bool emptied = false;
};

struct PruneResult {
  FiniteTree tree;
  PruneTrace trace;
};

inline PruneResult prune_k(const FiniteTree& t, std::size_t k) {
  PruneResult result{t, {}};
  for (std::size_t i = 0; i < k; ++i) {
    auto step = prune_once(result.tree);
    result.trace.stages.push_back(std::move(step.removed));
    result.tree = std::move(step.tree);
  }
  result.trace.rounds = k;
  result.trace.emptied = result.tree.empty() && !t.empty();
  return result;
}

// The point m on [z,a] with [z,a] n [z,b] = [z,m].
inline GraphPoint tree_median(const FiniteTree& t, const GraphPoint& z, const GraphPoint& a, const GraphPoint& b) {
  const auto& g = t.graph();
  const DistanceField fz(g, z);
  const Rational reach = (fz.to(a) + fz.to(b) - distance(g, a, b)) / Rational(2);
  return point_along(g, canonical_geodesic(g, z, a), reach);
}

// Meet of the segments [z, p] over all points, folded in the given order.
inline GraphPoint tree_meet(const FiniteTree& t, const GraphPoint& z, std::span<const GraphPoint> points) {
  if (points.empty()) throw Error(ErrorCode::EmptyPreimage, "meet of an empty set");
  GraphPoint acc = points.front();
  for (std::size_t i = 1; i < points.size(); ++i) acc = tree_median(t, z, acc, points[i]);
  return acc;
}

struct QuasiInverseOptions {
  std::optional<VertexId> basepoint;      // defaults to vertex 0
  std::optional<std::uint64_t> shuffle;   // fold preimages in a seeded random order
};

struct QuasiInverseResult {
  QuasiMap h;
  std::int64_t bound = 0;           // 9 N^2
  QiCertificate certificate;        // exhaustive check of h at the bound
  std::int64_t minimal_constant = 0;
  Rational round_trip_max{0};       // max over domain(f) of d(w, h(f(w)))
  std::int64_t round_trip_bound = 0;  // 3 N^2
};

// Quasi-inverse of f : T -> T' for a tree T. For each half-net point x of T',
// h(x) is the meet from the basepoint of all domain points y0 with
// d'(f(y0), x) <= N.
inline QuasiInverseResult quasi_inverse(const QuasiMap& f, std::int64_t n, QuasiInverseOptions options = {}) {
  if (n < 1) throw Error(ErrorCode::ConstantTooSmall, "quasi-isometry constant must be at least 1");
  const FiniteTree tree(f.source_ref());
  if (tree.empty()) throw Error(ErrorCode::NotATree, "source tree is empty");
  const GraphPoint z = GraphPoint::at_vertex(options.basepoint.value_or(0));
  validate_point(tree.graph(), z);
  const auto& target = f.target();
  const auto assign = f.assignments();
  const Rational radius(n);
  std::optional<std::mt19937_64> rng;
  if (options.shuffle) rng.emplace(*options.shuffle);

  std::vector<Assignment> out;
  for (const auto& x : half_net(target)) {
    const DistanceField fx(target, x);
    std::vector<GraphPoint> pre;
    for (const auto& a : assign)
      if (fx.to(a.to) <= radius) pre.push_back(a.from);
    if (pre.empty())
      throw Error(ErrorCode::EmptyPreimage, "no domain point maps within " + std::to_string(n) + " of a target net point");
    if (rng) std::shuffle(pre.begin(), pre.end(), *rng);
    out.push_back({x, tree_meet(tree, z, pre)});
  }

  QuasiInverseResult result{QuasiMap(f.target_ref(), f.source_ref(), std::move(out)), 9 * n * n, {}, 0,
                            Rational(0), 3 * n * n};
  result.certificate = verify_quasi_isometry(result.h, result.bound, VerifyMode::exhaustive());
  result.minimal_constant = minimal_qi_constant(result.h);
  for (const auto& a : assign) {
    const GraphPoint back = *result.h.image_of(snap_to_domain(result.h, a.to));
    result.round_trip_max = max(result.round_trip_max, distance(tree.graph(), a.from, back));
  }
  return result;
}

}  // namespace qichoice
