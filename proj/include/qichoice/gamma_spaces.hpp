#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "qichoice/coarse_maps.hpp"
#include "qichoice/error.hpp"
#include "qichoice/metric_graph.hpp"

namespace qichoice {

struct NamedSet {
  std::string name;
  std::vector<std::string> elements;

  friend bool operator==(const NamedSet&, const NamedSet&) = default;
};

// Nonempty family of nonempty, pairwise disjoint finite sets. Element names
// are globally unique; set names are unique.
class SetFamily {
 public:
  SetFamily() = default;
  explicit SetFamily(std::vector<NamedSet> sets) : sets_(std::move(sets)) {
    if (sets_.empty()) throw Error(ErrorCode::EmptyFamily, "family has no sets");
    std::unordered_map<std::string, bool> set_names;
    for (std::size_t s = 0; s < sets_.size(); ++s) {
      const auto& set = sets_[s];
      if (set.elements.empty()) throw Error(ErrorCode::EmptyMemberSet, "set '" + set.name + "' is empty");
      if (!set_names.emplace(set.name, true).second)
        throw Error(ErrorCode::InvalidFamily, "duplicate set name '" + set.name + "'");
      first_element_.push_back(elements_.size());
      for (const auto& x : set.elements) {
        if (!element_index_.emplace(x, elements_.size()).second)
          throw Error(ErrorCode::DuplicateElement, "element '" + x + "' appears twice");
        elements_.push_back(x);
        set_of_.push_back(s);
      }
    }
  }

  std::span<const NamedSet> sets() const { return sets_; }
  std::size_t set_count() const { return sets_.size(); }
  std::size_t element_count() const { return elements_.size(); }
  const std::string& element(std::size_t global) const { return elements_.at(global); }
  std::size_t set_of(std::size_t global) const { return set_of_.at(global); }
  std::size_t first_element_of(std::size_t set) const { return first_element_.at(set); }
  std::optional<std::size_t> element_index(const std::string& name) const {
    if (auto it = element_index_.find(name); it != element_index_.end()) return it->second;
    return std::nullopt;
  }

  friend bool operator==(const SetFamily& a, const SetFamily& b) { return a.sets_ == b.sets_; }

 private:
  std::vector<NamedSet> sets_;
  std::vector<std::string> elements_;  // flattened in family order
  std::vector<std::size_t> set_of_;
  std::vector<std::size_t> first_element_;
  std::unordered_map<std::string, std::size_t> element_index_;
};

// Truncation of Gamma_0 at levels 1..depth. Vertex 0 is the basepoint b;
// vertex (element e, level n) has id 1 + e * depth + (n - 1), with elements
// numbered in family order.
struct GammaZero {
  GraphRef graph;
  SetFamily family;
  std::int64_t depth = 0;
  std::shared_ptr<const DistanceField> from_base;

  static constexpr VertexId base = 0;

  VertexId vertex_of(std::size_t element, std::int64_t level) const {
    if (element >= family.element_count() || level < 1 || level > depth)
      throw Error(ErrorCode::InvalidPoint, "no vertex at level " + std::to_string(level));
    return static_cast<VertexId>(1 + element * depth + (level - 1));
  }
  VertexId vertex_of(const std::string& element, std::int64_t level) const {
    auto idx = family.element_index(element);
    if (!idx) throw Error(ErrorCode::UnknownElement, "unknown element '" + element + "'");
    return vertex_of(*idx, level);
  }
  // Element index of a non-base vertex.
  std::optional<std::size_t> element_of(VertexId v) const {
    if (v == base) return std::nullopt;
    return (v - 1) / depth;
  }
  std::int64_t vertex_level(VertexId v) const { return v == base ? 0 : (v - 1) % depth + 1; }
  GraphPoint point(const std::string& element, std::int64_t level) const {
    return GraphPoint::at_vertex(vertex_of(element, level));
  }
};

inline std::string gamma0_vertex_label(const std::string& element, std::int64_t level) {
  return "(" + element + "," + std::to_string(level) + ")";
}

inline GammaZero build_gamma0(const SetFamily& family, std::int64_t depth) {
  if (family.set_count() == 0) throw Error(ErrorCode::EmptyFamily, "family has no sets");
  if (depth < 1) throw Error(ErrorCode::DepthTooSmall, "depth must be at least 1");
  LabeledMetricGraph g;
  g.add_vertex("b");
  for (std::size_t e = 0; e < family.element_count(); ++e)
    for (std::int64_t n = 1; n <= depth; ++n) g.add_vertex(gamma0_vertex_label(family.element(e), n));
  g.set_basepoint(GammaZero::base);

  GammaZero out;
  out.family = family;
  out.depth = depth;
  auto id = [&](std::size_t e, std::int64_t n) { return out.vertex_of(e, n); };
  auto doubled = [&](VertexId u, VertexId v) {
    g.add_edge(u, v, Rational(1), u);
    g.add_edge(u, v, Rational(1), v);
  };
  for (std::size_t e = 0; e < family.element_count(); ++e) doubled(GammaZero::base, id(e, 1));
  for (std::size_t s = 0; s < family.set_count(); ++s) {
    const std::size_t first = family.first_element_of(s);
    const std::size_t size = family.sets()[s].elements.size();
    for (std::int64_t n = 1; n <= depth; ++n) {
      for (std::size_t i = 0; i < size; ++i)
        for (std::size_t j = i + 1; j < size; ++j) doubled(id(first + i, n), id(first + j, n));
      if (n == depth) continue;
      for (std::size_t i = 0; i < size; ++i)
        for (std::size_t j = 0; j < size; ++j) doubled(id(first + i, n), id(first + j, n + 1));
    }
  }
  out.graph = share(std::move(g));
  out.from_base = std::make_shared<const DistanceField>(*out.graph, GraphPoint::at_vertex(GammaZero::base));
  return out;
}

// Simplicial tree on B plus (X, n); vertex 0 is B and (set s, level n) has
// id 1 + s * depth + (n - 1).
struct GammaOne {
  GraphRef graph;
  SetFamily family;
  std::int64_t depth = 0;

  static constexpr VertexId base = 0;

  VertexId vertex_of(std::size_t set, std::int64_t level) const {
    if (set >= family.set_count() || level < 1 || level > depth)
      throw Error(ErrorCode::InvalidPoint, "no vertex at level " + std::to_string(level));
    return static_cast<VertexId>(1 + set * depth + (level - 1));
  }
  std::int64_t vertex_level(VertexId v) const { return v == base ? 0 : (v - 1) % depth + 1; }
  std::optional<std::size_t> set_of(VertexId v) const {
    if (v == base) return std::nullopt;
    return (v - 1) / depth;
  }
  // The edge from level n-1 (or B) to level n of the given arm.
  EdgeId edge_into(std::size_t set, std::int64_t level) const {
    return static_cast<EdgeId>(set * depth + (level - 1));
  }
};

inline GammaOne build_gamma1(const SetFamily& family, std::int64_t depth) {
  if (family.set_count() == 0) throw Error(ErrorCode::EmptyFamily, "family has no sets");
  if (depth < 1) throw Error(ErrorCode::DepthTooSmall, "depth must be at least 1");
  GammaOne out;
  out.family = family;
  out.depth = depth;
  LabeledMetricGraph g;
  g.add_vertex("B");
  for (const auto& set : family.sets())
    for (std::int64_t n = 1; n <= depth; ++n) g.add_vertex("(" + set.name + "," + std::to_string(n) + ")");
  for (std::size_t s = 0; s < family.set_count(); ++s) {
    g.add_edge(GammaOne::base, out.vertex_of(s, 1), Rational(1));
    for (std::int64_t n = 2; n <= depth; ++n) g.add_edge(out.vertex_of(s, n - 1), out.vertex_of(s, n), Rational(1));
  }
  g.set_basepoint(GammaOne::base);
  out.graph = share(std::move(g));
  return out;
}

struct PointClass {
  bool base = true;
  std::size_t set = 0;  // meaningful when !base
  std::int64_t level = 0;

  friend bool operator==(const PointClass&, const PointClass&) = default;
};

inline PointClass classify_point(const GammaZero& g0, const GraphPoint& p) {
  validate_point(*g0.graph, p);
  PointClass out;
  if (p.is_vertex()) {
    out.level = g0.vertex_level(p.vertex());
  } else {
    out.level = g0.from_base->to(p).floor();
  }
  out.base = out.level == 0;
  if (out.base) return out;
  // Every edge meets an element vertex, and both ends of a non-base edge lie
  // in the same set, so any element endpoint names the arm.
  VertexId witness = p.is_vertex() ? p.vertex() : g0.graph->edge(p.edge()).u;
  if (witness == GammaZero::base) witness = g0.graph->edge(p.edge()).v;
  out.set = g0.family.set_of(*g0.element_of(witness));
  return out;
}

inline std::int64_t level_of(const GammaZero& g0, const GraphPoint& p) { return classify_point(g0, p).level; }

// The collapse map Gamma_0 -> Gamma_1 on the half-net of Gamma_0.
inline QuasiMap build_collapse_map(const GammaZero& g0, const GammaOne& g1) {
  if (!(g0.family == g1.family) || g0.depth != g1.depth)
    throw Error(ErrorCode::FamilyMismatch, "Gamma_0 and Gamma_1 built from different families or depths");
  const auto& src = *g0.graph;
  auto image_vertex = [&](VertexId v) -> VertexId {
    if (v == GammaZero::base) return GammaOne::base;
    return g1.vertex_of(g0.family.set_of(*g0.element_of(v)), g0.vertex_level(v));
  };
  std::vector<Assignment> assign;
  assign.reserve(src.vertex_count() + src.edge_count());
  for (const auto& v : src.vertices()) assign.push_back({GraphPoint::at_vertex(v.id), GraphPoint::at_vertex(image_vertex(v.id))});
  for (const auto& e : src.edges()) {
    const auto mid = GraphPoint::midpoint_of(e.id);
    const std::int64_t lu = g0.vertex_level(e.u), lv = g0.vertex_level(e.v);
    if (lu == lv) {
      assign.push_back({mid, GraphPoint::at_vertex(image_vertex(e.u))});
    } else {
      const VertexId upper = lu > lv ? e.u : e.v;
      const std::size_t set = g0.family.set_of(*g0.element_of(upper));
      assign.push_back({mid, GraphPoint::midpoint_of(g1.edge_into(set, std::max(lu, lv)))});
    }
  }
  return QuasiMap(g0.graph, g1.graph, std::move(assign));
}

// A vertex z with d(x,z) > L, d(y,z) > L, Lev(z) > L such that every path
// from x to z passes within 4 of y.
inline VertexId find_far_witness(const GammaZero& g0, const GraphPoint& x, const GraphPoint& y, const Rational& L) {
  if (L.sign() <= 0) throw Error(ErrorCode::InvalidPoint, "L must be positive");
  const PointClass cx = classify_point(g0, x);
  const PointClass cy = classify_point(g0, y);
  // least integer strictly above L + Lev(x) + Lev(y) + 2
  const std::int64_t l0 = (L + Rational(cx.level + cy.level + 2)).floor() + 1;
  if (l0 > g0.depth)
    throw Error(ErrorCode::DepthTooSmall,
                "witness needs level " + std::to_string(l0) + " but depth is " + std::to_string(g0.depth));
  auto arm_vertex = [&](std::size_t set) { return g0.vertex_of(g0.family.first_element_of(set), l0); };

  const bool same_arm_x_above = !cx.base && !cy.base && cx.set == cy.set && cx.level > cy.level;
  if (same_arm_x_above || cy.base) {
    for (std::size_t s = 0; s < g0.family.set_count(); ++s)
      if (cx.base || s != cx.set) return arm_vertex(s);
    // every path from x starts within 4 of y
    if (distance(*g0.graph, x, y) <= Rational(4)) return arm_vertex(0);
    throw Error(ErrorCode::NoAlternateArm, "a second arm is needed but the family has a single set");
  }
  return arm_vertex(cy.set);
}

enum class LevelProfile { Short, Increasing, Decreasing, VShaped };

inline std::string_view to_string(LevelProfile p) {
  switch (p) {
    case LevelProfile::Short: return "Short";
    case LevelProfile::Increasing: return "Increasing";
    case LevelProfile::Decreasing: return "Decreasing";
    case LevelProfile::VShaped: return "VShaped";
  }
  return "?";
}

// Shape of the level sequence of a geodesic's vertex hits. Throws
// NotAGeodesic if the path is not length-minimizing and ProfileViolation if
// the sequence has any other shape.
inline LevelProfile level_profile(const GammaZero& g0, const Geodesic& geo) {
  const auto& g = *g0.graph;
  const Rational len = path_length(g, geo);
  if (len != geo.length || len != distance(g, geo.start, geo.end))
    throw Error(ErrorCode::NotAGeodesic, "recorded length " + geo.length.str() + ", path length " + len.str());
  if (geo.vertices.size() <= 2) return LevelProfile::Short;
  std::vector<std::int64_t> lv;
  for (VertexId v : geo.vertices) lv.push_back(g0.vertex_level(v));
  auto fail = [&](const std::string& why) {
    std::string seq;
    for (auto l : lv) seq += (seq.empty() ? "" : ",") + std::to_string(l);
    throw Error(ErrorCode::ProfileViolation, why + " (levels " + seq + ")");
  };
  std::size_t i = 1;
  while (i < lv.size() && lv[i] == lv[i - 1] - 1) ++i;
  const std::size_t descent_end = i;  // lv[0..descent_end) strictly decreasing
  while (i < lv.size() && lv[i] == lv[i - 1] + 1) ++i;
  if (i != lv.size()) fail("level steps are not unit monotone");
  if (descent_end == lv.size()) return LevelProfile::Decreasing;
  if (descent_end == 1) return LevelProfile::Increasing;
  if (lv[descent_end - 1] != 0) fail("V-shaped profile with minimum above the base");
  return LevelProfile::VShaped;
}

}  // namespace qichoice
