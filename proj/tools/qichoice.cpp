// qichoice: command-line front end for the library.
//
// Exit status: 0 success or accepted, 1 verification rejected (the report
// carries a witness), 2 input or schema error, 3 precondition error.

#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "qichoice/io.hpp"
#include "qichoice/qichoice.hpp"

namespace fs = std::filesystem;
using namespace qichoice;
using io::json;

namespace {

constexpr int kOk = 0;
constexpr int kRejected = 1;
constexpr int kInputError = 2;
constexpr int kPreconditionError = 3;

struct Sampling {
  std::string mode = "exhaustive";
  std::optional<std::uint64_t> seed;
  std::size_t samples = 200;
};

void add_sampling(CLI::App* cmd, Sampling& s, const std::vector<std::string>& modes) {
  cmd->add_option("--mode", s.mode, "Which pairs or triples to visit")
      ->check(CLI::IsMember(modes))
      ->capture_default_str();
  cmd->add_option("--seed", s.seed, "RNG seed; required with --mode sampled");
  cmd->add_option("--samples", s.samples, "Number of sampled pairs or triples")->capture_default_str();
}

void require_seed(const Sampling& s) {
  if (s.mode == "sampled" && !s.seed) throw Error(ErrorCode::SchemaError, "--seed is required with --mode sampled");
}

VerifyMode verify_mode(const Sampling& s) {
  require_seed(s);
  if (s.mode == "sampled") return VerifyMode::sampled(*s.seed, s.samples);
  if (s.mode == "vertex-pairs") return VerifyMode::vertex_pairs();
  return VerifyMode::exhaustive();
}

SampleSource sample_source(const Sampling& s) {
  require_seed(s);
  if (s.mode == "sampled") return SampleSource::sampled(*s.seed, s.samples);
  return SampleSource::exhaustive();
}

void emit(const json& doc, const std::string& out) {
  const std::string text = io::canonical_dump(doc);
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    io::write_text_file(out, text);
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::SchemaError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

GammaZero load_gamma0(const std::string& path) { return io::gamma0_from_json(io::read_json_file(path)); }

SetFamily load_family(const std::string& path) { return io::family_from_json(io::read_json_file(path)); }

// Path of `target` as seen from the directory that will hold `doc`.
std::string relative_to(const std::string& target, const std::string& doc) {
  const fs::path base = fs::path(doc).parent_path();
  return fs::proximate(fs::path(target), base.empty() ? fs::path(".") : base).generic_string();
}

json point_json(const LabeledMetricGraph& g, const GraphPoint& p) {
  json j = io::to_json(p);
  if (p.is_vertex() && g.vertex(p.vertex()).label) j["label"] = *g.vertex(p.vertex()).label;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact coarse-geometry toolkit: Gamma spaces, quasi-isometries, hyperbolicity checks and choice extraction.\n"
               "Set QICHOICE_THREADS to bound worker threads."};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::function<int()> run;
  std::string out;
  auto out_option = [&](CLI::App* cmd) {
    cmd->add_option("--out", out, "Write the JSON result here instead of standard output");
  };

  // gamma0 / gamma1
  std::string family_path;
  std::int64_t depth = 0;
  for (const char* name : {"gamma0", "gamma1"}) {
    const bool zero = std::string(name) == "gamma0";
    auto* cmd = app.add_subcommand(name, zero ? "Build the truncated Gamma_0 graph of a family"
                                              : "Build the truncated Gamma_1 tree of a family");
    cmd->add_option("--family", family_path, "Family document")->required();
    cmd->add_option("--depth", depth, "Number of levels above the basepoint")->required();
    out_option(cmd);
    cmd->callback([&, zero] {
      run = [&, zero] {
        const auto family = load_family(family_path);
        emit(zero ? io::to_json(build_gamma0(family, depth)) : io::to_json(build_gamma1(family, depth)), out);
        return kOk;
      };
    });
  }

  // collapse
  std::string gamma0_out, gamma1_out;
  {
    auto* cmd = app.add_subcommand("collapse", "Write Gamma_0, Gamma_1 and the collapse map between them");
    cmd->add_option("--family", family_path, "Family document")->required();
    cmd->add_option("--depth", depth, "Number of levels")->required();
    cmd->add_option("--gamma0", gamma0_out, "Where to write the Gamma_0 document")->required();
    cmd->add_option("--gamma1", gamma1_out, "Where to write the Gamma_1 document")->required();
    cmd->add_option("--out", out, "Where to write the map document")->required();
    cmd->callback([&] {
      run = [&] {
        const auto family = load_family(family_path);
        const auto g0 = build_gamma0(family, depth);
        const auto g1 = build_gamma1(family, depth);
        io::write_text_file(gamma0_out, io::canonical_dump(io::to_json(g0)));
        io::write_text_file(gamma1_out, io::canonical_dump(io::to_json(g1)));
        const auto f = build_collapse_map(g0, g1);
        emit(io::to_json(f, relative_to(gamma0_out, out), relative_to(gamma1_out, out)), out);
        return kOk;
      };
    });
  }

  // check-qi / min-qi
  std::string map_path;
  std::int64_t constant = 0;
  Sampling sampling;
  {
    auto* cmd = app.add_subcommand("check-qi", "Verify a quasi-isometry with constant N");
    cmd->add_option("--map", map_path, "Map document")->required();
    cmd->add_option("--constant", constant, "Constant N (defaults to the map's asserted N)");
    add_sampling(cmd, sampling, {"exhaustive", "vertex-pairs", "sampled"});
    out_option(cmd);
    cmd->callback([&] {
      run = [&] {
        const auto m = io::load_map(map_path);
        std::int64_t n = constant;
        if (n == 0) {
          if (!m.asserted_constant()) throw Error(ErrorCode::SchemaError, "no --constant and the map asserts none");
          n = *m.asserted_constant();
        }
        const auto cert = verify_quasi_isometry(m, n, verify_mode(sampling));
        emit(io::to_json(cert), out);
        return cert.accepted() ? kOk : kRejected;
      };
    });
  }
  {
    auto* cmd = app.add_subcommand("min-qi", "Least constant N for which a map verifies");
    cmd->add_option("--map", map_path, "Map document")->required();
    cmd->add_option("--mode", sampling.mode, "Pairs to visit")
        ->check(CLI::IsMember({"exhaustive", "vertex-pairs"}))
        ->capture_default_str();
    out_option(cmd);
    cmd->callback([&] {
      run = [&] {
        const auto m = io::load_map(map_path);
        const auto mode = verify_mode(sampling);
        const auto n = minimal_qi_constant(m, mode);
        emit(json{{"minimal_constant", n}, {"mode", io::to_json(mode)}}, out);
        return kOk;
      };
    });
  }

  // delta
  std::string graph_path;
  std::optional<std::string> max_delta;
  {
    auto* cmd = app.add_subcommand("delta", "Observed slim-triangle constant of a graph");
    cmd->add_option("--graph", graph_path, "Graph document")->required();
    cmd->add_option("--max-delta", max_delta, "Reject (exit 1) when the observed value exceeds this p/q bound");
    add_sampling(cmd, sampling, {"exhaustive", "sampled"});
    out_option(cmd);
    cmd->callback([&] {
      run = [&] {
        const auto g = io::load_graph(graph_path);
        const auto report = slim_triangle_delta(*g, sample_source(sampling));
        json doc = io::to_json(report);
        int status = kOk;
        if (max_delta) {
          const Rational bound = io::rational_from_json(*max_delta);
          doc["bound"] = bound.str();
          doc["accepted"] = report.delta_upper_observed <= bound;
          if (!(report.delta_upper_observed <= bound)) status = kRejected;
        }
        emit(doc, out);
        return status;
      };
    });
  }

  // bottleneck
  std::string delta_text = "3/1";
  std::optional<std::string> radius_text;
  {
    auto* cmd = app.add_subcommand("bottleneck", "Check the midpoint bottleneck condition");
    cmd->add_option("--graph", graph_path, "Graph document")->required();
    cmd->add_option("--delta", delta_text, "Bottleneck constant (p/q)")->capture_default_str();
    cmd->add_option("--radius", radius_text, "Ball radius r with 0 <= r < delta (default delta - 1)");
    add_sampling(cmd, sampling, {"exhaustive", "sampled"});
    out_option(cmd);
    cmd->callback([&] {
      run = [&] {
        const auto g = io::load_graph(graph_path);
        std::optional<Rational> r;
        if (radius_text) r = io::rational_from_json(*radius_text);
        const auto report = verify_bottleneck(*g, io::rational_from_json(delta_text), r, sample_source(sampling));
        emit(io::to_json(report), out);
        return report.accepted() ? kOk : kRejected;
      };
    });
  }

  // separation
  std::string x_text, y_text, w_text;
  {
    auto* cmd = app.add_subcommand(
        "separation",
        "Without --x: sampled separation certificate that Gamma_0 is 2-hyperbolic. "
        "With --x --y --w: whether every x-y path meets the closed ball B(w, radius)");
    cmd->add_option("--graph", graph_path, "Gamma_0 document (any graph for a single query)")->required();
    cmd->add_option("--x", x_text, "First endpoint");
    cmd->add_option("--y", y_text, "Second endpoint");
    cmd->add_option("--w", w_text, "Ball center");
    cmd->add_option("--radius", radius_text, "Ball radius for a single query (default 2)");
    cmd->add_option("--seed", sampling.seed, "RNG seed for the certificate");
    cmd->add_option("--samples", sampling.samples, "Number of sampled pairs")->capture_default_str();
    out_option(cmd);
    cmd->callback([&] {
      run = [&] {
        if (!x_text.empty() || !y_text.empty() || !w_text.empty()) {
          if (x_text.empty() || y_text.empty() || w_text.empty())
            throw Error(ErrorCode::SchemaError, "--x, --y and --w go together");
          const auto g = io::load_graph(graph_path);
          const Rational r = radius_text ? io::rational_from_json(*radius_text) : Rational(2);
          const auto x = io::parse_point(*g, x_text), y = io::parse_point(*g, y_text), w = io::parse_point(*g, w_text);
          json doc{{"x", point_json(*g, x)}, {"y", point_json(*g, y)}, {"w", point_json(*g, w)},
                   {"radius", r.str()},      {"separated", is_separated(*g, x, y, w, r)}, {"avoiding_route", nullptr}};
          if (auto route = avoiding_route(*g, x, y, w, r)) doc["avoiding_route"] = *route;
          emit(doc, out);
          return doc["separated"].get<bool>() ? kOk : kRejected;
        }
        if (!sampling.seed) throw Error(ErrorCode::SchemaError, "--seed is required for the sampled certificate");
        const auto g0 = load_gamma0(graph_path);
        const auto report = certify_two_hyperbolic_gamma0(g0, *sampling.seed, sampling.samples);
        json doc{{"accepted", report.accepted},
                 {"pairs_checked", report.pairs_checked},
                 {"probes_checked", report.probes_checked},
                 {"probes_skipped", report.probes_skipped},
                 {"mode", io::to_json(SampleSource::sampled(*sampling.seed, sampling.samples))},
                 {"witness", nullptr}};
        if (report.witness)
          doc["witness"] = json{{"x", io::to_json(report.witness->x)},
                                {"y", io::to_json(report.witness->y)},
                                {"w", io::to_json(report.witness->w)}};
        emit(doc, out);
        return report.accepted ? kOk : kRejected;
      };
    });
  }

  // profile
  std::size_t cap = 1000;
  {
    auto* cmd = app.add_subcommand("profile", "Level profiles of the geodesics between two points of Gamma_0");
    cmd->add_option("--graph", graph_path, "Gamma_0 document")->required();
    cmd->add_option("--from", x_text, "Start point: a label such as (a,2), v<id> or e<id>:<p/q>")->required();
    cmd->add_option("--to", y_text, "End point")->required();
    cmd->add_option("--cap", cap, "Maximum number of geodesics to enumerate")->capture_default_str();
    out_option(cmd);
    cmd->callback([&] {
      run = [&] {
        const auto g0 = load_gamma0(graph_path);
        const auto& g = *g0.graph;
        const auto set = enumerate_geodesics(g, io::parse_point(g, x_text), io::parse_point(g, y_text), cap);
        json geos = json::array();
        for (const auto& geo : set.geodesics) {
          json j = io::to_json(geo);
          std::vector<std::int64_t> levels;
          for (VertexId v : geo.vertices) levels.push_back(g0.vertex_level(v));
          j["levels"] = levels;
          j["profile"] = std::string(to_string(level_profile(g0, geo)));
          geos.push_back(std::move(j));
        }
        emit(json{{"geodesics", std::move(geos)}, {"count", set.geodesics.size()}, {"truncated", set.truncated}}, out);
        return kOk;
      };
    });
  }

  // witness
  std::string l_text;
  {
    auto* cmd = app.add_subcommand("witness", "Far vertex z such that every x-z path passes within 4 of y");
    cmd->add_option("--graph", graph_path, "Gamma_0 document")->required();
    cmd->add_option("--x", x_text, "Point x")->required();
    cmd->add_option("--y", y_text, "Point y")->required();
    cmd->add_option("--L", l_text, "Distance threshold L > 0 (p/q)")->required();
    out_option(cmd);
    cmd->callback([&] {
      run = [&] {
        const auto g0 = load_gamma0(graph_path);
        const auto& g = *g0.graph;
        const auto x = io::parse_point(g, x_text), y = io::parse_point(g, y_text);
        const Rational L = io::rational_from_json(l_text);
        const auto z = GraphPoint::at_vertex(find_far_witness(g0, x, y, L));
        const bool separated = is_separated(g, x, z, y, Rational(4));
        json doc{{"z", point_json(g, z)},
                 {"level", level_of(g0, z)},
                 {"distance_x", distance(g, x, z).str()},
                 {"distance_y", distance(g, y, z).str()},
                 {"passes_within_4_of_y", separated}};
        emit(doc, out);
        return separated ? kOk : kRejected;
      };
    });
  }

  // prune
  std::string tree_path;
  std::size_t rounds = 1;
  {
    auto* cmd = app.add_subcommand("prune", "Remove all leaves, repeatedly");
    cmd->add_option("--tree", tree_path, "Tree document (graph document with \"tree\": true)")->required();
    cmd->add_option("--rounds", rounds, "Number of pruning rounds")->capture_default_str();
    out_option(cmd);
    cmd->callback([&] {
      run = [&] {
        const auto t = io::tree_from_json(io::read_json_file(tree_path));
        const auto r = prune_k(t, rounds);
        emit(json{{"tree", io::tree_to_json(r.tree)}, {"origin", r.tree.origin()}, {"trace", io::to_json(r.trace)}},
             out);
        return kOk;
      };
    });
  }

  // median
  std::string z_text;
  {
    auto* cmd = app.add_subcommand("median", "Point m with [z,a] n [z,b] = [z,m] in a tree");
    cmd->add_option("--tree", tree_path, "Tree document")->required();
    cmd->add_option("--z", z_text, "Basepoint")->required();
    cmd->add_option("--a", x_text, "First point")->required();
    cmd->add_option("--b", y_text, "Second point")->required();
    out_option(cmd);
    cmd->callback([&] {
      run = [&] {
        const auto t = io::tree_from_json(io::read_json_file(tree_path));
        const auto& g = t.graph();
        const auto m = tree_median(t, io::parse_point(g, z_text), io::parse_point(g, x_text), io::parse_point(g, y_text));
        emit(json{{"median", point_json(g, m)}}, out);
        return kOk;
      };
    });
  }

  // quasi-inverse
  std::string map_out;
  std::optional<VertexId> basepoint;
  {
    auto* cmd = app.add_subcommand("quasi-inverse", "Quasi-inverse of a quasi-isometry out of a tree");
    cmd->add_option("--map", map_path, "Map document whose source is a tree")->required();
    cmd->add_option("--constant", constant, "Constant N of the map (defaults to its asserted N)");
    cmd->add_option("--basepoint", basepoint, "Basepoint vertex of the tree (default 0)");
    cmd->add_option("--map-out", map_out, "Where to write the inverse map document");
    out_option(cmd);
    cmd->callback([&] {
      run = [&] {
        const auto f = io::load_map(map_path);
        std::int64_t n = constant;
        if (n == 0) {
          if (!f.asserted_constant()) throw Error(ErrorCode::SchemaError, "no --constant and the map asserts none");
          n = *f.asserted_constant();
        }
        const auto r = quasi_inverse(f, n, {basepoint, std::nullopt});
        json doc{{"N", n},
                 {"bound", r.bound},
                 {"certificate", io::to_json(r.certificate)},
                 {"minimal_constant", r.minimal_constant},
                 {"round_trip_max", r.round_trip_max.str()},
                 {"round_trip_bound", r.round_trip_bound},
                 {"within_bounds", r.certificate.accepted() && r.round_trip_max <= Rational(r.round_trip_bound)}};
        if (!map_out.empty()) {
          const auto src = io::read_json_file(map_path);
          auto rebase = [&](const std::string& p) {
            const fs::path q(p);
            if (q.is_absolute()) return p;
            return relative_to((fs::path(map_path).parent_path() / q).string(), map_out);
          };
          io::write_text_file(map_out, io::canonical_dump(io::to_json(r.h, rebase(io::field<std::string>(src, "target")),
                                                                      rebase(io::field<std::string>(src, "source")))));
        } else {
          json assign = json::array();
          for (const auto& a : r.h.assignments())
            assign.push_back(json{{"from", io::to_json(a.from)}, {"to", io::to_json(a.to)}});
          doc["h"] = std::move(assign);
        }
        emit(doc, out);
        return doc["within_bounds"].get<bool>() ? kOk : kRejected;
      };
    });
  }

  // extract-choice
  std::string section_path;
  std::optional<std::uint64_t> adversarial_seed;
  {
    auto* cmd = app.add_subcommand("extract-choice",
                                   "Build Gamma_0, Gamma_1 and a section, then extract a transversal from the section");
    cmd->add_option("--family", family_path, "Family document")->required();
    cmd->add_option("--depth", depth, "Depth of both Gamma spaces")->required();
    cmd->add_option("--constant", constant, "Quasi-isometry constant N (at least 4)")->required();
    cmd->add_option("--section", section_path, "Section spec document")->required();
    cmd->add_option("--adversarial-seed", adversarial_seed, "Perturb the section with this seed");
    out_option(cmd);
    cmd->callback([&] {
      run = [&] {
        const std::string family_text = read_text(family_path);
        const std::string section_text = read_text(section_path);
        const auto family = load_family(family_path);
        auto spec = io::section_from_json(io::read_json_file(section_path));
        if (adversarial_seed) spec.adversarial_seed = adversarial_seed;
        if (constant < 4) throw Error(ErrorCode::ConstantTooSmall, "N must be at least 4, got " + std::to_string(constant));
        if (depth < choice_required_depth(constant))
          throw Error(ErrorCode::DepthError, "depth " + std::to_string(depth) + " is below the required " +
                                                 std::to_string(choice_required_depth(constant)) + " for N = " +
                                                 std::to_string(constant));
        const auto g0 = build_gamma0(family, depth);
        const auto g1 = build_gamma1(family, depth);
        const auto g = build_section(g1, g0, spec);
        const auto cert = extract_choice(FiniteTree(g1.graph), g, g0, constant);
        json doc = io::to_json(cert);
        doc["inputs"] = json{{"family_fnv1a", io::fnv1a_hex(family_text)},
                             {"section_fnv1a", io::fnv1a_hex(section_text)},
                             {"depth", depth},
                             {"section", io::to_json(spec)}};
        emit(doc, out);
        return cert.verified ? kOk : kRejected;
      };
    });
  }

  // verify-transversal
  std::vector<std::string> chosen;
  {
    auto* cmd = app.add_subcommand("verify-transversal", "Check that a set meets every member of a family exactly once");
    cmd->add_option("--family", family_path, "Family document")->required();
    cmd->add_option("--choice", chosen, "Chosen elements, comma separated")->delimiter(',')->required();
    out_option(cmd);
    cmd->callback([&] {
      run = [&] {
        const auto family = load_family(family_path);
        const bool ok = verify_transversal(chosen, family);
        std::vector<std::string> sorted(chosen.begin(), chosen.end());
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        emit(json{{"choice", sorted}, {"transversal", ok}}, out);
        return ok ? kOk : kRejected;
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    return run();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_input_error(e.code()) ? kInputError : kPreconditionError;
  } catch (const json::exception& e) {
    std::cerr << "error: SchemaError: " << e.what() << "\n";
    return kInputError;
  } catch (const std::overflow_error& e) {
    std::cerr << "error: overflow: " << e.what() << "\n";
    return kPreconditionError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
}
