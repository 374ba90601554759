#pragma once

// JSON documents for graphs, families, maps and reports. Output is canonical:
// object keys sorted, rationals as reduced "p/q" strings, no floats.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qichoice/choice_pipeline.hpp"
#include "qichoice/coarse_analysis.hpp"
#include "qichoice/coarse_maps.hpp"
#include "qichoice/error.hpp"
#include "qichoice/gamma_spaces.hpp"
#include "qichoice/metric_graph.hpp"
#include "qichoice/tree_ops.hpp"

namespace qichoice::io {

using json = nlohmann::json;

[[noreturn]] inline void schema_error(const std::string& what) { throw Error(ErrorCode::SchemaError, what); }

inline std::string canonical_dump(const json& doc) { return doc.dump(2) + "\n"; }

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) schema_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    schema_error(path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) schema_error("cannot write " + path.string());
  out << text;
}

inline const json& member(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) schema_error(std::string("missing field '") + key + "'");
  return obj.at(key);
}

template <typename T>
T field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) schema_error(std::string("missing field '") + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    schema_error(std::string("field '") + key + "' has the wrong type");
  }
}

// ---------------------------------------------------------------------------
// Rationals and points

inline json to_json(const Rational& r) { return r.str(); }

inline Rational rational_from_json(const json& j) {
  try {
    if (j.is_string()) return Rational::parse(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  } catch (const std::exception& e) {
    schema_error(e.what());
  }
  schema_error("rational must be a \"p/q\" string");
}

inline json to_json(const GraphPoint& p) {
  if (p.is_vertex()) return json{{"vertex", p.vertex()}};
  return json{{"edge", p.edge()}, {"offset", p.offset().str()}};
}

inline GraphPoint point_from_json(const LabeledMetricGraph& g, const json& j) {
  if (!j.is_object()) schema_error("point must be an object");
  GraphPoint p;
  if (j.contains("vertex")) {
    p = GraphPoint::at_vertex(field<VertexId>(j, "vertex"));
  } else if (j.contains("edge")) {
    p = GraphPoint::on_edge(g, field<EdgeId>(j, "edge"), rational_from_json(j.at("offset")));
  } else {
    schema_error("point needs 'vertex' or 'edge'");
  }
  validate_point(g, p);
  return p;
}

// ---------------------------------------------------------------------------
// Graphs

inline json to_json(const LabeledMetricGraph& g) {
  json vertices = json::array();
  for (const auto& v : g.vertices()) {
    json jv{{"id", v.id}};
    if (v.label) jv["label"] = *v.label;
    vertices.push_back(std::move(jv));
  }
  json edges = json::array();
  for (const auto& e : g.edges()) {
    json je{{"id", e.id}, {"u", e.u}, {"v", e.v}, {"len", e.length.str()}};
    if (e.label) je["label"] = *e.label;
    edges.push_back(std::move(je));
  }
  json doc{{"vertices", std::move(vertices)}, {"edges", std::move(edges)}};
  if (g.basepoint()) doc["basepoint"] = *g.basepoint();
  return doc;
}

// Vertex and edge ids must be exactly 0..n-1 (in any order).
inline LabeledMetricGraph graph_from_json(const json& doc) {
  const json& vs = member(doc, "vertices");
  if (!vs.is_array()) schema_error("'vertices' must be an array");
  std::vector<std::optional<std::string>> labels(vs.size());
  std::vector<char> seen(vs.size(), 0);
  for (const auto& jv : vs) {
    const auto id = field<std::int64_t>(jv, "id");
    if (id < 0 || static_cast<std::size_t>(id) >= vs.size() || seen[id])
      schema_error("vertex ids must be exactly 0.." + std::to_string(vs.size() - 1));
    seen[id] = 1;
    if (jv.contains("label")) labels[id] = field<std::string>(jv, "label");
  }
  LabeledMetricGraph g;
  for (auto& l : labels) g.add_vertex(std::move(l));

  const json& es = member(doc, "edges");
  if (!es.is_array()) schema_error("'edges' must be an array");
  std::vector<const json*> by_id(es.size(), nullptr);
  for (const auto& je : es) {
    const auto id = field<std::int64_t>(je, "id");
    if (id < 0 || static_cast<std::size_t>(id) >= es.size() || by_id[id])
      schema_error("edge ids must be exactly 0.." + std::to_string(es.size() - 1));
    by_id[id] = &je;
  }
  for (const json* je : by_id) {
    std::optional<VertexId> label;
    if (je->contains("label")) label = field<VertexId>(*je, "label");
    if (!je->contains("len")) schema_error("edge missing 'len'");
    g.add_edge(field<VertexId>(*je, "u"), field<VertexId>(*je, "v"), rational_from_json(je->at("len")), label);
  }
  if (doc.contains("basepoint") && !doc.at("basepoint").is_null()) g.set_basepoint(field<VertexId>(doc, "basepoint"));
  return g;
}

inline json tree_to_json(const FiniteTree& t) {
  json doc = to_json(t.graph());
  doc["tree"] = true;
  return doc;
}

// Graph document with "tree": true; the tree shape is checked on load.
inline FiniteTree tree_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("tree") || doc.at("tree") != true) schema_error("document is not marked as a tree");
  return FiniteTree(share(graph_from_json(doc)));
}

// Point syntax for the command line: a vertex label such as "(a,2)" or "b",
// "v<id>" for a vertex, or "e<id>:<p/q>" for the point at that fraction of
// an edge measured from its u end.
inline GraphPoint parse_point(const LabeledMetricGraph& g, const std::string& text) {
  for (const auto& v : g.vertices())
    if (v.label && *v.label == text) return GraphPoint::at_vertex(v.id);
  auto number = [&](std::string_view digits) -> std::uint32_t {
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string_view::npos || digits.size() > 9)
      throw Error(ErrorCode::InvalidPoint, "cannot parse point '" + text + "'");
    return static_cast<std::uint32_t>(std::stoul(std::string(digits)));
  };
  GraphPoint p;
  if (text.size() > 1 && text[0] == 'v') {
    p = GraphPoint::at_vertex(number(std::string_view(text).substr(1)));
  } else if (text.size() > 1 && text[0] == 'e' && text.find(':') != std::string::npos) {
    const auto colon = text.find(':');
    const EdgeId e = number(std::string_view(text).substr(1, colon - 1));
    if (!g.has_edge(e)) throw Error(ErrorCode::InvalidPoint, "no edge " + std::to_string(e));
    Rational t;
    try {
      t = Rational::parse(std::string_view(text).substr(colon + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidPoint, "cannot parse point '" + text + "'");
    }
    p = GraphPoint::on_edge(g, e, t);
  } else {
    throw Error(ErrorCode::InvalidPoint, "cannot parse point '" + text + "'");
  }
  validate_point(g, p);
  return p;
}

// ---------------------------------------------------------------------------
// Families and the Gamma spaces

inline json to_json(const SetFamily& family) {
  json sets = json::array();
  for (const auto& s : family.sets()) sets.push_back(json{{"name", s.name}, {"elements", s.elements}});
  return json{{"sets", std::move(sets)}};
}

inline SetFamily family_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("sets") || !doc.at("sets").is_array()) schema_error("family needs a 'sets' array");
  std::vector<NamedSet> sets;
  for (const auto& js : doc.at("sets")) sets.push_back({field<std::string>(js, "name"), field<std::vector<std::string>>(js, "elements")});
  return SetFamily(std::move(sets));
}

inline json to_json(const GammaZero& g0) {
  json doc = to_json(*g0.graph);
  doc["kind"] = "gamma0";
  doc["depth"] = g0.depth;
  doc["family"] = to_json(g0.family);
  return doc;
}

inline json to_json(const GammaOne& g1) {
  json doc = to_json(*g1.graph);
  doc["kind"] = "gamma1";
  doc["depth"] = g1.depth;
  doc["family"] = to_json(g1.family);
  return doc;
}

// Rebuilds Gamma_0 from the recorded family and depth and checks that the
// stored graph matches it.
inline GammaZero gamma0_from_json(const json& doc) {
  if (!doc.contains("kind") || doc.at("kind") != "gamma0") schema_error("document is not a gamma0 graph");
  GammaZero g0 = build_gamma0(family_from_json(doc.at("family")), field<std::int64_t>(doc, "depth"));
  if (!(graph_from_json(doc) == *g0.graph)) schema_error("gamma0 graph does not match its family and depth");
  return g0;
}

// ---------------------------------------------------------------------------
// Maps

inline json to_json(const QuasiMap& m, const std::string& source_path, const std::string& target_path) {
  json assign = json::array();
  for (const auto& a : m.assignments()) assign.push_back(json{{"from", to_json(a.from)}, {"to", to_json(a.to)}});
  json doc{{"source", source_path}, {"target", target_path}, {"assign", std::move(assign)}};
  if (m.asserted_constant()) doc["N"] = *m.asserted_constant();
  return doc;
}

inline QuasiMap map_from_json(const json& doc, GraphRef source, GraphRef target) {
  if (!doc.contains("assign") || !doc.at("assign").is_array()) schema_error("map needs an 'assign' array");
  std::vector<Assignment> assign;
  for (const auto& ja : doc.at("assign")) {
    if (!ja.contains("from") || !ja.contains("to")) schema_error("assignment needs 'from' and 'to'");
    assign.push_back({point_from_json(*source, ja.at("from")), point_from_json(*target, ja.at("to"))});
  }
  std::optional<std::int64_t> n;
  if (doc.contains("N") && !doc.at("N").is_null()) n = field<std::int64_t>(doc, "N");
  return QuasiMap(std::move(source), std::move(target), std::move(assign), n);
}

inline GraphRef load_graph(const std::filesystem::path& path) { return share(graph_from_json(read_json_file(path))); }

// Loads a map document; relative graph paths resolve against the map's directory.
inline QuasiMap load_map(const std::filesystem::path& path) {
  const json doc = read_json_file(path);
  const auto dir = path.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path q(p);
    return q.is_absolute() ? q : dir / q;
  };
  auto source = load_graph(resolve(field<std::string>(doc, "source")));
  auto target = field<std::string>(doc, "source") == field<std::string>(doc, "target")
                    ? source
                    : load_graph(resolve(field<std::string>(doc, "target")));
  return map_from_json(doc, std::move(source), std::move(target));
}

// {"policy": "first" | "alternate" | "explicit", "representatives": {set: element},
//  "adversarial_seed": integer}
inline SectionSpec section_from_json(const json& doc) {
  if (!doc.is_object()) schema_error("section spec must be an object");
  SectionSpec spec;
  const auto policy = doc.contains("policy") ? field<std::string>(doc, "policy") : std::string("first");
  if (policy == "first") spec.policy = SectionSpec::Policy::First;
  else if (policy == "alternate") spec.policy = SectionSpec::Policy::Alternate;
  else if (policy == "explicit") spec.policy = SectionSpec::Policy::Explicit;
  else schema_error("unknown section policy '" + policy + "'");
  if (doc.contains("representatives")) spec.representatives = field<std::map<std::string, std::string>>(doc, "representatives");
  if (doc.contains("adversarial_seed") && !doc.at("adversarial_seed").is_null())
    spec.adversarial_seed = field<std::uint64_t>(doc, "adversarial_seed");
  return spec;
}

inline json to_json(const SectionSpec& spec) {
  static const char* names[] = {"first", "alternate", "explicit"};
  json doc{{"policy", names[static_cast<int>(spec.policy)]}, {"representatives", spec.representatives}};
  doc["adversarial_seed"] = spec.adversarial_seed ? json(*spec.adversarial_seed) : json(nullptr);
  return doc;
}

// ---------------------------------------------------------------------------
// Reports

inline std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::LowerBound: return "lower_bound";
    case ViolationKind::UpperBound: return "upper_bound";
    case ViolationKind::Surjectivity: return "surjectivity";
  }
  return "?";
}

inline json to_json(const VerifyMode& mode) {
  switch (mode.kind) {
    case VerifyMode::Kind::Exhaustive: return json{{"kind", "exhaustive"}};
    case VerifyMode::Kind::VertexPairs: return json{{"kind", "vertex_pairs"}};
    case VerifyMode::Kind::Sampled: return json{{"kind", "sampled"}, {"seed", mode.seed}, {"count", mode.count}};
  }
  return nullptr;
}

inline json to_json(const SampleSource& s) {
  if (s.kind == SampleSource::Kind::Exhaustive) return json{{"kind", "exhaustive"}};
  return json{{"kind", "sampled"}, {"seed", s.seed}, {"count", s.count}};
}

inline json to_json(const QiCertificate& c) {
  json doc{{"constant", c.constant},
           {"mode", to_json(c.mode)},
           {"certifying", c.mode.certifying()},
           {"surjectivity_radius", c.surjectivity_radius.str()},
           {"pairs_checked", c.pairs_checked},
           {"accepted", c.accepted()},
           {"violation", nullptr}};
  if (c.violation) {
    const auto& v = *c.violation;
    json jv{{"kind", to_string(v.kind)}, {"x", to_json(v.x)}};
    if (v.kind == ViolationKind::Surjectivity) {
      jv["distance_to_image"] = v.target_distance.str();
      jv["limit"] = v.upper_bound.str();
    } else {
      jv["y"] = to_json(v.y);
      jv["source_distance"] = v.source_distance.str();
      jv["target_distance"] = v.target_distance.str();
      jv["lower_bound"] = v.lower_bound.str();
      jv["upper_bound"] = v.upper_bound.str();
    }
    doc["violation"] = std::move(jv);
  }
  return doc;
}

inline json to_json(const DeltaReport& r) {
  json doc{{"delta_upper_observed", r.delta_upper_observed.str()},
           {"triples_checked", r.triples_checked},
           {"mode", to_json(r.mode)},
           {"sampling_slack", r.sampling_slack.str()},
           {"certified_upper_bound", (r.delta_upper_observed + r.sampling_slack).str()},
           {"witness", nullptr}};
  if (r.witness)
    doc["witness"] = json{{"x", r.witness->x}, {"y", r.witness->y}, {"z", r.witness->z}, {"probe", to_json(r.witness->probe)}};
  return doc;
}

inline json to_json(const BottleneckReport& r) {
  json doc{{"delta", r.delta_param.str()},   {"radius", r.radius.str()},   {"mode", to_json(r.mode)},
           {"pairs_checked", r.pairs_checked}, {"accepted", r.accepted()}, {"violation", nullptr}};
  if (r.violation)
    doc["violation"] = json{{"x", to_json(r.violation->x)},
                            {"y", to_json(r.violation->y)},
                            {"midpoint", to_json(r.violation->m)},
                            {"avoiding_route", r.violation->avoiding_route}};
  return doc;
}

inline json to_json(const Geodesic& g) {
  return json{{"start", to_json(g.start)}, {"end", to_json(g.end)}, {"vertices", g.vertices},
              {"edges", g.edges},          {"length", g.length.str()}};
}

inline json to_json(const PruneTrace& t) {
  return json{{"rounds", t.rounds}, {"stages", t.stages}, {"emptied", t.emptied}};
}

inline json to_json(const ChoiceCertificate& c) {
  json arms = json::object();
  for (const auto& [name, w] : c.arm_assignment) arms[name] = w;
  json h = json::object();
  for (const auto& [w, x] : c.h_values) h[std::to_string(w)] = x;
  json levels = json::object();
  for (const auto& [w, l] : c.image_levels) levels[std::to_string(w)] = l;
  return json{{"N", c.n},
              {"K", c.k},
              {"required_depth", c.required_depth},
              {"tree_vertices", c.tree_vertices},
              {"pruned_vertices", c.pruned_vertices},
              {"v", c.v},
              {"v_image_distance", c.v_image_distance.str()},
              {"W", c.w},
              {"arm_assignment", std::move(arms)},
              {"h_values", std::move(h)},
              {"image_levels", std::move(levels)},
              {"A", c.choice},
              {"precheck", to_json(c.precheck)},
              {"verified", c.verified}};
}

// 64-bit FNV-1a of a string, hex encoded; used for input digests.
inline std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

}  // namespace qichoice::io
