#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qichoice/error.hpp"
#include "qichoice/metric_graph.hpp"
#include "qichoice/parallel.hpp"
#include "qichoice/rational.hpp"

namespace qichoice {

using GraphRef = std::shared_ptr<const LabeledMetricGraph>;

inline GraphRef share(LabeledMetricGraph g) { return std::make_shared<const LabeledMetricGraph>(std::move(g)); }

struct Assignment {
  GraphPoint from;
  GraphPoint to;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

// Finite map from a net of the source graph into the target graph. The domain
// must contain every source vertex and no point twice.
class QuasiMap {
 public:
  QuasiMap(GraphRef source, GraphRef target, std::vector<Assignment> assignments,
           std::optional<std::int64_t> asserted_constant = std::nullopt)
      : source_(std::move(source)), target_(std::move(target)), assign_(std::move(assignments)),
        asserted_(asserted_constant) {
    if (!source_ || !target_) throw Error(ErrorCode::InvalidGraph, "quasi-map needs source and target graphs");
    std::vector<char> covered(source_->vertex_count(), 0);
    index_.reserve(assign_.size());
    for (std::size_t i = 0; i < assign_.size(); ++i) {
      const auto& a = assign_[i];
      validate_point(*source_, a.from);
      validate_point(*target_, a.to);
      if (!index_.emplace(a.from, i).second) throw Error(ErrorCode::DomainNotNet, "duplicate domain point");
      if (a.from.is_vertex()) covered[a.from.vertex()] = 1;
    }
    for (VertexId v = 0; v < covered.size(); ++v)
      if (!covered[v]) throw Error(ErrorCode::DomainNotNet, "domain misses vertex " + std::to_string(v));
  }

  const LabeledMetricGraph& source() const { return *source_; }
  const LabeledMetricGraph& target() const { return *target_; }
  const GraphRef& source_ref() const { return source_; }
  const GraphRef& target_ref() const { return target_; }
  std::span<const Assignment> assignments() const { return assign_; }
  std::size_t size() const { return assign_.size(); }
  std::optional<std::int64_t> asserted_constant() const { return asserted_; }

  std::optional<GraphPoint> image_of(const GraphPoint& p) const {
    if (auto it = index_.find(p); it != index_.end()) return assign_[it->second].to;
    return std::nullopt;
  }

  friend bool operator==(const QuasiMap& a, const QuasiMap& b) {
    return a.assign_ == b.assign_ && *a.source_ == *b.source_ && *a.target_ == *b.target_;
  }

 private:
  GraphRef source_;
  GraphRef target_;
  std::vector<Assignment> assign_;
  std::optional<std::int64_t> asserted_;
  std::unordered_map<GraphPoint, std::size_t> index_;
};

inline QuasiMap identity_map(const GraphRef& g) {
  std::vector<Assignment> assign;
  for (const auto& p : half_net(*g)) assign.push_back({p, p});
  return QuasiMap(g, g, std::move(assign), 1);
}

struct VerifyMode {
  enum class Kind { Exhaustive, VertexPairs, Sampled };
  Kind kind = Kind::Exhaustive;
  std::uint64_t seed = 0;
  std::size_t count = 0;

  static VerifyMode exhaustive() { return {}; }
  // Exhaustive over pairs of domain vertices only; surjectivity is still
  // checked against the full target net.
  static VerifyMode vertex_pairs() { return {Kind::VertexPairs, 0, 0}; }
  static VerifyMode sampled(std::uint64_t seed, std::size_t count) { return {Kind::Sampled, seed, count}; }

  bool certifying() const { return kind != Kind::Sampled; }
  friend bool operator==(const VerifyMode&, const VerifyMode&) = default;
};

enum class ViolationKind { LowerBound, UpperBound, Surjectivity };

struct QiViolation {
  ViolationKind kind;
  // For pair violations: the two domain points. For surjectivity: x is the
  // uncovered target net point and y is unused.
  GraphPoint x;
  GraphPoint y;
  Rational source_distance{0};
  Rational target_distance{0};
  Rational lower_bound{0};
  Rational upper_bound{0};
};

struct QiCertificate {
  std::int64_t constant = 1;
  VerifyMode mode;
  Rational surjectivity_radius{0};
  std::size_t pairs_checked = 0;
  std::optional<QiViolation> violation;

  bool accepted() const { return !violation.has_value(); }
};

namespace detail {

struct PairCheck {
  bool ok;
  Rational lower;
  Rational upper;
};

inline PairCheck check_pair(const Rational& ds, const Rational& dt, std::int64_t n) {
  const Rational nn(n);
  const Rational lower = ds / nn - nn;
  const Rational upper = nn * ds + nn;
  return {lower <= dt && dt <= upper, lower, upper};
}

// Max over the target net of the distance to the image; also the first net
// point (in net order) farther than `limit`, if any.
inline std::pair<Rational, std::optional<GraphPoint>> coverage(const QuasiMap& m, const Rational& limit) {
  std::vector<GraphPoint> images;
  images.reserve(m.size());
  for (const auto& a : m.assignments()) images.push_back(a.to);
  std::sort(images.begin(), images.end());
  images.erase(std::unique(images.begin(), images.end()), images.end());
  const DistanceField field(m.target(), images);
  Rational radius{0};
  std::optional<GraphPoint> first_far;
  for (const auto& p : half_net(m.target())) {
    const Rational d = field.to(p);
    radius = max(radius, d);
    if (!first_far && d > limit) first_far = p;
  }
  return {radius, first_far};
}

inline std::vector<std::size_t> row_indices(const QuasiMap& m, const VerifyMode& mode) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (mode.kind != VerifyMode::Kind::VertexPairs || m.assignments()[i].from.is_vertex()) rows.push_back(i);
  return rows;
}

}  // namespace detail

// Checks (1/N) d_S(x,y) - N <= d_T(f x, f y) <= N d_S(x,y) + N on domain
// pairs and that every target net point lies within N of the image. Pair
// witnesses are lexicographically least in domain order.
inline QiCertificate verify_quasi_isometry(const QuasiMap& m, std::int64_t n, VerifyMode mode) {
  if (n < 1) throw Error(ErrorCode::ConstantTooSmall, "quasi-isometry constant must be at least 1");
  QiCertificate cert;
  cert.constant = n;
  cert.mode = mode;
  const auto assign = m.assignments();

  std::optional<QiViolation> pair_violation;
  if (mode.kind == VerifyMode::Kind::Sampled) {
    if (assign.size() >= 2) {
      std::mt19937_64 rng(mode.seed);
      std::uniform_int_distribution<std::size_t> pick(0, assign.size() - 1);
      std::vector<std::pair<std::size_t, std::size_t>> pairs;
      while (pairs.size() < mode.count) {
        std::size_t i = pick(rng), j = pick(rng);
        if (i == j) continue;
        pairs.emplace_back(std::min(i, j), std::max(i, j));
      }
      std::sort(pairs.begin(), pairs.end());
      pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
      cert.pairs_checked = pairs.size();
      for (std::size_t k = 0; k < pairs.size() && !pair_violation;) {
        const std::size_t i = pairs[k].first;
        const DistanceField src(m.source(), assign[i].from);
        const DistanceField dst(m.target(), assign[i].to);
        for (; k < pairs.size() && pairs[k].first == i; ++k) {
          const std::size_t j = pairs[k].second;
          const Rational ds = src.to(assign[j].from);
          const Rational dt = dst.to(assign[j].to);
          const auto check = detail::check_pair(ds, dt, n);
          if (!check.ok) {
            pair_violation = QiViolation{dt < check.lower ? ViolationKind::LowerBound : ViolationKind::UpperBound,
                                         assign[i].from, assign[j].from, ds, dt, check.lower, check.upper};
            break;
          }
        }
      }
    }
  } else {
    const auto rows = detail::row_indices(m, mode);
    std::atomic<std::size_t> first_bad{rows.size()};
    std::vector<std::optional<QiViolation>> found(rows.size());
    std::vector<std::size_t> checked(rows.size(), 0);
    parallel_for(rows.size(), [&](std::size_t r) {
      if (r > first_bad.load()) return;
      const std::size_t i = rows[r];
      const DistanceField src(m.source(), assign[i].from);
      const DistanceField dst(m.target(), assign[i].to);
      for (std::size_t c = r + 1; c < rows.size(); ++c) {
        const std::size_t j = rows[c];
        const Rational ds = src.to(assign[j].from);
        const Rational dt = dst.to(assign[j].to);
        ++checked[r];
        const auto check = detail::check_pair(ds, dt, n);
        if (!check.ok) {
          found[r] = QiViolation{dt < check.lower ? ViolationKind::LowerBound : ViolationKind::UpperBound,
                                 assign[i].from, assign[j].from, ds, dt, check.lower, check.upper};
          std::size_t cur = first_bad.load();
          while (r < cur && !first_bad.compare_exchange_weak(cur, r)) {
          }
          return;
        }
      }
    });
    const std::size_t bad = first_bad.load();
    for (std::size_t r = 0; r < rows.size() && r <= bad; ++r) cert.pairs_checked += checked[r];
    if (bad < rows.size()) pair_violation = found[bad];
  }

  auto [radius, far] = detail::coverage(m, Rational(n));
  cert.surjectivity_radius = radius;
  if (pair_violation) {
    cert.violation = pair_violation;
  } else if (far) {
    QiViolation v{ViolationKind::Surjectivity, *far, *far, Rational(0), radius, Rational(0), Rational(n)};
    cert.violation = v;
  }
  return cert;
}

namespace detail {

// Least n >= 1 with ds/n - n <= dt <= n ds + n. Both conditions are monotone in n.
inline std::int64_t required_constant(const Rational& ds, const Rational& dt) {
  auto ok = [&](std::int64_t n) { return check_pair(ds, dt, n).ok; };
  std::int64_t hi = 1;
  while (!ok(hi)) {
    if (hi > (std::int64_t{1} << 40)) throw std::overflow_error("quasi-isometry constant search overflow");
    hi *= 2;
  }
  std::int64_t lo = hi / 2;  // ok(lo) is false unless lo == 0
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace detail

// Least N accepted by verify_quasi_isometry in the given (certifying) mode.
// Computed in one pass as the maximum over pairs of the per-pair least
// constant, together with the ceiling of the surjectivity radius.
inline std::int64_t minimal_qi_constant(const QuasiMap& m, VerifyMode mode = VerifyMode::exhaustive(),
                                        std::int64_t cap = 1'000'000) {
  if (!mode.certifying()) throw Error(ErrorCode::SchemaError, "minimal constant needs a certifying mode");
  const auto assign = m.assignments();
  const auto rows = detail::row_indices(m, mode);
  std::vector<std::int64_t> row_max(rows.size(), 1);
  parallel_for(rows.size(), [&](std::size_t r) {
    const std::size_t i = rows[r];
    const DistanceField src(m.source(), assign[i].from);
    const DistanceField dst(m.target(), assign[i].to);
    std::int64_t best = 1;
    for (std::size_t c = r + 1; c < rows.size(); ++c) {
      const std::size_t j = rows[c];
      const Rational ds = src.to(assign[j].from);
      const Rational dt = dst.to(assign[j].to);
      if (!detail::check_pair(ds, dt, best).ok) best = detail::required_constant(ds, dt);
    }
    row_max[r] = best;
  });
  std::int64_t n = 1;
  for (auto v : row_max) n = std::max(n, v);
  const auto [radius, far] = detail::coverage(m, Rational(0));
  n = std::max(n, radius.ceil());
  if (n > cap)
    throw Error(ErrorCode::NotCoarselySurjective,
                "no constant up to " + std::to_string(cap) + " works (needs " + std::to_string(n) + ")");
  return n;
}

// Nearest domain point of m to p; ties go to the least point in GraphPoint order.
inline GraphPoint snap_to_domain(const QuasiMap& m, const GraphPoint& p) {
  if (m.image_of(p)) return p;
  const DistanceField field(m.source(), p);
  std::optional<std::pair<Rational, GraphPoint>> best;
  for (const auto& a : m.assignments()) {
    const Rational d = field.to(a.from);
    if (!best || d < best->first || (d == best->first && a.from < best->second)) best.emplace(d, a.from);
  }
  return best->second;
}

// m2 after m1. Each image of m1 is snapped to the nearest domain point of m2.
inline QuasiMap compose(const QuasiMap& m2, const QuasiMap& m1) {
  if (m1.target_ref() != m2.source_ref() && !(m1.target() == m2.source()))
    throw Error(ErrorCode::GraphMismatch, "target of the inner map is not the source of the outer map");
  std::vector<Assignment> out;
  out.reserve(m1.size());
  for (const auto& a : m1.assignments()) out.push_back({a.from, *m2.image_of(snap_to_domain(m2, a.to))});
  return QuasiMap(m1.source_ref(), m2.target_ref(), std::move(out));
}

}  // namespace qichoice
