#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "qichoice/coarse_maps.hpp"
#include "qichoice/error.hpp"
#include "qichoice/gamma_spaces.hpp"
#include "qichoice/metric_graph.hpp"
#include "qichoice/tree_ops.hpp"

namespace qichoice {

// True iff A meets every member of the family in exactly one element.
inline bool verify_transversal(const std::vector<std::string>& chosen, const SetFamily& family) {
  std::vector<int> hits(family.set_count(), 0);
  std::set<std::string> distinct(chosen.begin(), chosen.end());
  for (const auto& name : distinct) {
    auto idx = family.element_index(name);
    if (!idx) throw Error(ErrorCode::UnknownElement, "'" + name + "' is not an element of the family");
    ++hits[family.set_of(*idx)];
  }
  return std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
}

struct ChoiceCertificate {
  std::int64_t n = 0;
  std::int64_t k = 0;                // 7 N^2
  std::int64_t required_depth = 0;   // 2KN + 2N^2 + 4N
  std::size_t tree_vertices = 0;
  std::size_t pruned_vertices = 0;   // vertices left after K rounds
  VertexId v = 0;                    // ids below refer to the input tree
  Rational v_image_distance{0};      // d_0(g(v), b)
  std::vector<VertexId> w;           // vertices at distance exactly 2K from v
  std::map<std::string, VertexId> arm_assignment;  // set name -> w
  std::map<VertexId, std::string> h_values;
  std::map<VertexId, std::int64_t> image_levels;   // Lev(g(w))
  std::vector<std::string> choice;   // A, in family order
  QiCertificate precheck;
  bool verified = false;
};

inline std::int64_t choice_required_depth(std::int64_t n) {
  const std::int64_t k = 7 * n * n;
  return 2 * k * n + 2 * n * n + 4 * n;
}

// Extracts a transversal of the family from a quasi-isometry g from a
// simplicial tree into Gamma_0. When `precheck` is absent, g is verified over
// all vertex pairs first.
inline ChoiceCertificate extract_choice(const FiniteTree& gamma, const QuasiMap& g, const GammaZero& g0,
                                        std::int64_t n, std::optional<QiCertificate> precheck = std::nullopt) {
  if (n < 4) throw Error(ErrorCode::ConstantTooSmall, "N must be at least 4, got " + std::to_string(n));
  ChoiceCertificate cert;
  cert.n = n;
  cert.k = 7 * n * n;
  cert.required_depth = choice_required_depth(n);
  if (g0.depth < cert.required_depth)
    throw Error(ErrorCode::DepthError, "Gamma_0 depth " + std::to_string(g0.depth) + " is below the required " +
                                           std::to_string(cert.required_depth) + " for N = " + std::to_string(n));
  if (!gamma.simplicial()) throw Error(ErrorCode::NotATree, "tree must be simplicial (unit edge lengths)");
  if (!(g.source() == gamma.graph())) throw Error(ErrorCode::GraphMismatch, "map source is not the given tree");
  if (!(g.target() == *g0.graph)) throw Error(ErrorCode::GraphMismatch, "map target is not the given Gamma_0");
  cert.tree_vertices = gamma.graph().vertex_count();

  cert.precheck = precheck ? *precheck : verify_quasi_isometry(g, n, VerifyMode::vertex_pairs());
  if (!cert.precheck.accepted() || !cert.precheck.mode.certifying() || cert.precheck.constant > n)
    throw Error(ErrorCode::NotQuasiIsometry, "map is not certified as a quasi-isometry with constant " + std::to_string(n));

  const auto pruned = prune_k(gamma, static_cast<std::size_t>(cert.k));
  const FiniteTree& core = pruned.tree;
  cert.pruned_vertices = core.graph().vertex_count();
  if (core.empty()) throw Error(ErrorCode::DepthError, "tree vanishes after " + std::to_string(cert.k) + " pruning rounds");

  // surviving vertex ids, original -> pruned
  std::map<VertexId, VertexId> survivor;
  for (VertexId i = 0; i < core.graph().vertex_count(); ++i) survivor.emplace(core.origin_of(i), i);

  const Rational n_r(n);
  const auto& base_field = *g0.from_base;
  std::optional<VertexId> v;
  for (const auto& a : g.assignments()) {
    if (base_field.to(a.to) > n_r) continue;
    std::vector<VertexId> near;
    if (a.from.is_vertex()) {
      near.push_back(a.from.vertex());
    } else {
      const Edge& e = g.source().edge(a.from.edge());
      near = {e.u, e.v};  // unit edges: both ends within 1/2 of the midpoint
    }
    for (VertexId c : near)
      if (survivor.count(c) && (!v || c < *v)) v = c;
  }
  if (!v) throw Error(ErrorCode::NotQuasiIsometry, "no surviving vertex maps within N of the basepoint");
  cert.v = *v;
  cert.v_image_distance = base_field.to(*g.image_of(GraphPoint::at_vertex(*v)));
  if (cert.v_image_distance > Rational(3 * n))
    throw Error(ErrorCode::NotQuasiIsometry, "d_0(g(v), b) exceeds 3N");

  const DistanceField from_v(core.graph(), GraphPoint::at_vertex(survivor.at(*v)));
  const Rational ring(2 * cert.k);
  for (VertexId i = 0; i < core.graph().vertex_count(); ++i)
    if (from_v.to_vertex(i) == ring) cert.w.push_back(core.origin_of(i));
  if (cert.w.empty())
    throw Error(ErrorCode::DepthError, "no vertex at distance 2K = " + std::to_string(2 * cert.k) + " from v");

  const std::int64_t min_level = 10 * n;
  for (VertexId w : cert.w) {
    const GraphPoint img = *g.image_of(GraphPoint::at_vertex(w));
    const PointClass cls = classify_point(g0, img);
    cert.image_levels[w] = cls.level;
    if (cls.base || cls.level < min_level)
      throw Error(ErrorCode::NotQuasiIsometry, "g(" + std::to_string(w) + ") has level " + std::to_string(cls.level) +
                                                   " below 10N = " + std::to_string(min_level));
    std::size_t element;
    if (img.is_vertex()) {
      element = *g0.element_of(img.vertex());
    } else {
      const auto label = g0.graph->edge(img.edge()).label;
      if (!label || *label == GammaZero::base)
        throw Error(ErrorCode::LabelError, "g(" + std::to_string(w) + ") lies on an edge not labeled by an element");
      element = *g0.element_of(*label);
    }
    cert.h_values[w] = g0.family.element(element);
    const std::string& arm = g0.family.sets()[cls.set].name;
    if (!cert.arm_assignment.emplace(arm, w).second)
      throw Error(ErrorCode::ArmCollision, "vertices " + std::to_string(cert.arm_assignment.at(arm)) + " and " +
                                               std::to_string(w) + " both map into arm " + arm);
  }
  for (const auto& set : g0.family.sets())
    if (!cert.arm_assignment.count(set.name))
      throw Error(ErrorCode::DepthError, "no vertex at distance 2K from v maps into arm " + set.name);

  std::set<std::size_t> chosen;
  for (const auto& [w, name] : cert.h_values) chosen.insert(*g0.family.element_index(name));
  for (auto idx : chosen) cert.choice.push_back(g0.family.element(idx));

  bool ok = cert.w.size() == g0.family.set_count() && cert.arm_assignment.size() == g0.family.set_count();
  for (const auto& [arm, w] : cert.arm_assignment) {
    const auto idx = *g0.family.element_index(cert.h_values.at(w));
    ok = ok && g0.family.sets()[g0.family.set_of(idx)].name == arm && cert.image_levels.at(w) >= min_level;
  }
  cert.verified = ok && verify_transversal(cert.choice, g0.family);
  return cert;
}

// How a section Gamma_1 -> Gamma_0 picks its representative per level.
struct SectionSpec {
  enum class Policy { First, Alternate, Explicit };
  Policy policy = Policy::First;
  std::map<std::string, std::string> representatives;  // Explicit: set name -> element
  // Seeded perturbation: random representative per level, occasional one-level
  // shifts and moves onto edge midpoints.
  std::optional<std::uint64_t> adversarial_seed;
};

// A map from the vertices of Gamma_1 into Gamma_0 sending B to b and (X, n)
// near level n of the X-arm.
inline QuasiMap build_section(const GammaOne& g1, const GammaZero& g0, const SectionSpec& spec) {
  if (!(g0.family == g1.family) || g0.depth != g1.depth)
    throw Error(ErrorCode::FamilyMismatch, "Gamma_0 and Gamma_1 built from different families or depths");
  const auto& family = g0.family;
  std::vector<std::size_t> fixed(family.set_count());
  for (std::size_t s = 0; s < family.set_count(); ++s) {
    fixed[s] = family.first_element_of(s);
    if (spec.policy == SectionSpec::Policy::Explicit) {
      const auto& name = family.sets()[s].name;
      auto it = spec.representatives.find(name);
      if (it == spec.representatives.end()) throw Error(ErrorCode::SchemaError, "no representative for set " + name);
      auto idx = family.element_index(it->second);
      if (!idx || family.set_of(*idx) != s)
        throw Error(ErrorCode::UnknownElement, "'" + it->second + "' is not an element of " + name);
      fixed[s] = *idx;
    }
  }
  std::optional<std::mt19937_64> rng;
  if (spec.adversarial_seed) rng.emplace(*spec.adversarial_seed);
  auto roll = [&](std::size_t bound) { return std::uniform_int_distribution<std::size_t>(0, bound - 1)(*rng); };

  std::vector<Assignment> assign;
  assign.push_back({GraphPoint::at_vertex(GammaOne::base), GraphPoint::at_vertex(GammaZero::base)});
  for (std::size_t s = 0; s < family.set_count(); ++s) {
    const std::size_t first = family.first_element_of(s);
    const std::size_t size = family.sets()[s].elements.size();
    for (std::int64_t level = 1; level <= g1.depth; ++level) {
      std::size_t element = fixed[s];
      if (spec.policy == SectionSpec::Policy::Alternate) element = first + static_cast<std::size_t>(level) % size;
      GraphPoint image = g0.point(family.element(element), level);
      if (rng) {
        element = first + roll(size);
        std::int64_t lv = level;
        const std::size_t move = roll(8);
        if (move == 0 && lv > 1) --lv;
        if (move == 1 && lv < g0.depth) ++lv;
        image = GraphPoint::at_vertex(g0.vertex_of(element, lv));
        if (move >= 6 && lv < g0.depth) {
          // midpoint of one of the two parallel edges up to a random element
          const VertexId from = g0.vertex_of(element, lv);
          const VertexId to = g0.vertex_of(first + roll(size), lv + 1);
          std::vector<EdgeId> parallel;
          for (const auto& inc : g0.graph->incident(from))
            if (inc.other == to) parallel.push_back(inc.edge);
          std::sort(parallel.begin(), parallel.end());
          image = GraphPoint::midpoint_of(parallel[roll(parallel.size())]);
        }
      }
      assign.push_back({GraphPoint::at_vertex(g1.vertex_of(s, level)), image});
    }
  }
  std::sort(assign.begin(), assign.end(), [](const Assignment& a, const Assignment& b) { return a.from < b.from; });
  return QuasiMap(g1.graph, g0.graph, std::move(assign));
}

}  // namespace qichoice
