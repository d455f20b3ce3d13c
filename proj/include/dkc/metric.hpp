#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dkc/errors.hpp"
#include "dkc/random.hpp"

namespace dkc {

/// Identity of a point over a whole run. Ids are never reused.
enum class PointId : std::uint64_t {};

constexpr std::uint64_t to_u64(PointId id) { return static_cast<std::uint64_t>(id); }
constexpr PointId point_id(std::uint64_t v) { return static_cast<PointId>(v); }

inline std::string to_string(PointId id) { return std::to_string(to_u64(id)); }

struct PointRecord {
  PointId id{};
  std::vector<double> position;  // empty in matrix mode
  std::size_t row = 0;           // matrix mode only
  std::uint64_t seq = 0;
  double priority = 0.0;
};

/// Global order used for MIS greedy scans: ascending priority, ties by id.
struct PriorityKey {
  double priority;
  PointId id;
  friend auto operator<=>(const PriorityKey&, const PriorityKey&) = default;
};

/// "Lexicographic" order of points: ascending arrival, ties by id.
struct ArrivalKey {
  std::uint64_t seq;
  PointId id;
  friend auto operator<=>(const ArrivalKey&, const ArrivalKey&) = default;
};

inline PriorityKey priority_key(const PointRecord& r) { return {r.priority, r.id}; }
inline ArrivalKey arrival_key(const PointRecord& r) { return {r.seq, r.id}; }

struct MetricBounds {
  double d_min = 1.0;
  double d_max = 1.0;

  double aspect_ratio() const { return d_max / d_min; }
};

/// Dense symmetric distance matrix for explicit-metric mode.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  static DistanceMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    DistanceMatrix m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.size())
        throw InvalidArgument("distance matrix row " + std::to_string(i) + " has " +
                              std::to_string(rows[i].size()) + " entries, expected " +
                              std::to_string(rows.size()));
      std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + i * m.n_);
    }
    return m;
  }

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct MetricViolation {
  enum class Kind { negative, nonzero_diagonal, asymmetric, triangle };
  Kind kind;
  std::size_t i, j, k;  // k unused except for triangle: d(i,k) > d(i,j) + d(j,k)

  std::string describe() const {
    switch (kind) {
      case Kind::negative:
        return "negative distance at (" + std::to_string(i) + "," + std::to_string(j) + ")";
      case Kind::nonzero_diagonal:
        return "nonzero diagonal at " + std::to_string(i);
      case Kind::asymmetric:
        return "asymmetric entries (" + std::to_string(i) + "," + std::to_string(j) + ")";
      case Kind::triangle:
        return "triangle inequality broken by (" + std::to_string(i) + "," + std::to_string(j) +
               "," + std::to_string(k) + ")";
    }
    return {};
  }
};

/// Scans an explicit matrix for the first metric-axiom violation. O(n^3).
/// Triangle checks use relative tolerance 1e-9.
inline std::optional<MetricViolation> find_metric_violation(const DistanceMatrix& m) {
  const std::size_t n = m.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (m(i, i) != 0.0) return MetricViolation{MetricViolation::Kind::nonzero_diagonal, i, i, 0};
    for (std::size_t j = 0; j < n; ++j) {
      if (m(i, j) < 0.0) return MetricViolation{MetricViolation::Kind::negative, i, j, 0};
      if (m(i, j) != m(j, i)) return MetricViolation{MetricViolation::Kind::asymmetric, i, j, 0};
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        const double via = m(i, j) + m(j, k);
        if (m(i, k) > via * (1.0 + 1e-9) + 1e-12)
          return MetricViolation{MetricViolation::Kind::triangle, i, j, k};
      }
  return std::nullopt;
}

/// The dynamic point set (V, d). Owns point records, assigns arrival sequence
/// numbers and random priorities, and evaluates distances.
///
/// Records live in node-stable storage: references returned by insert() and
/// record() stay valid until that point is erased.
class MetricSpace {
 public:
  enum class Mode { euclidean, matrix };

  /// Lp distance over coordinate vectors; p = 2 is Euclidean.
  static MetricSpace euclidean(MetricBounds bounds, std::uint64_t priority_seed, double p = 2.0) {
    if (!(p >= 1.0)) throw InvalidArgument("Lp exponent must be >= 1");
    MetricSpace s(Mode::euclidean, bounds, priority_seed);
    s.p_ = p;
    return s;
  }

  /// Explicit metric; validated once here.
  static MetricSpace explicit_matrix(DistanceMatrix matrix, MetricBounds bounds,
                                     std::uint64_t priority_seed) {
    if (auto v = find_metric_violation(matrix)) throw InvalidArgument("not a metric: " + v->describe());
    MetricSpace s(Mode::matrix, bounds, priority_seed);
    s.matrix_ = std::move(matrix);
    return s;
  }

  Mode mode() const { return mode_; }
  const MetricBounds& bounds() const { return bounds_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  bool contains(PointId id) const { return points_.count(id) != 0; }

  /// Full O(n) bound validation on every insert. On by default.
  void set_bounds_check(bool on) { bounds_check_ = on; }
  bool bounds_check() const { return bounds_check_; }

  const PointRecord& insert(PointId id, std::vector<double> position) {
    if (mode_ != Mode::euclidean) throw InvalidArgument("coordinate insert into a matrix-mode space");
    if (dim_ == 0) {
      if (position.empty()) throw InvalidArgument("points need at least one coordinate");
      dim_ = position.size();
    } else if (position.size() != dim_) {
      throw InvalidArgument("point " + to_string(id) + " has dimension " +
                            std::to_string(position.size()) + ", expected " + std::to_string(dim_));
    }
    PointRecord rec;
    rec.id = id;
    rec.position = std::move(position);
    return admit(std::move(rec));
  }

  /// Matrix mode: the point is row `row` of the matrix.
  const PointRecord& insert_row(PointId id, std::size_t row) {
    if (mode_ != Mode::matrix) throw InvalidArgument("row insert into a coordinate space");
    if (row >= matrix_.size())
      throw InvalidArgument("row " + std::to_string(row) + " outside the " +
                            std::to_string(matrix_.size()) + "-point matrix");
    PointRecord rec;
    rec.id = id;
    rec.row = row;
    return admit(std::move(rec));
  }

  void erase(PointId id) {
    if (points_.erase(id) == 0) throw NotFound("point " + to_string(id) + " is not live");
  }

  const PointRecord& record(PointId id) const {
    auto it = points_.find(id);
    if (it == points_.end()) throw NotFound("point " + to_string(id) + " is not live");
    return it->second;
  }

  double distance(PointId a, PointId b) const {
    const PointRecord& ra = record(a);
    if (a == b) return 0.0;
    return distance(ra, record(b));
  }

  double distance(const PointRecord& a, const PointRecord& b) const {
    if (mode_ == Mode::matrix) return matrix_(a.row, b.row);
    const double* x = a.position.data();
    const double* y = b.position.data();
    const std::size_t d = a.position.size();
    if (p_ == 2.0) {
      double acc = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double t = x[i] - y[i];
        acc += t * t;
      }
      return std::sqrt(acc);
    }
    if (p_ == 1.0) {
      double acc = 0.0;
      for (std::size_t i = 0; i < d; ++i) acc += std::abs(x[i] - y[i]);
      return acc;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) acc += std::pow(std::abs(x[i] - y[i]), p_);
    return std::pow(acc, 1.0 / p_);
  }

  /// Live ids in ascending order.
  std::vector<PointId> ids() const {
    std::vector<PointId> out;
    out.reserve(points_.size());
    for (const auto& [id, rec] : points_) out.push_back(id);
    std::sort(out.begin(), out.end());
    return out;
  }

  std::uint64_t next_seq() const { return next_seq_; }

 private:
  MetricSpace(Mode mode, MetricBounds bounds, std::uint64_t seed)
      : mode_(mode), bounds_(bounds), rng_(seed) {
    if (!(bounds.d_min > 0.0) || !(bounds.d_max >= bounds.d_min))
      throw InvalidArgument("need 0 < d_min <= d_max");
  }

  const PointRecord& admit(PointRecord rec) {
    if (points_.count(rec.id)) throw InvalidState("point " + to_string(rec.id) + " is already live");
    if (bounds_check_) {
      for (const auto& [other, orec] : points_) {
        const double d = distance(rec, orec);
        if (d > 0.0 && (d < bounds_.d_min * (1.0 - 1e-12) || d > bounds_.d_max * (1.0 + 1e-12)))
          throw BoundsViolation("distance " + std::to_string(d) + " between " + to_string(rec.id) +
                                " and " + to_string(other) + " is outside [d_min, d_max]");
      }
    }
    rec.seq = next_seq_++;
    rec.priority = unit_real(rng_);
    auto [it, ok] = points_.emplace(rec.id, std::move(rec));
    return it->second;
  }

  Mode mode_;
  MetricBounds bounds_;
  double p_ = 2.0;
  std::size_t dim_ = 0;
  DistanceMatrix matrix_;
  Rng rng_;
  std::uint64_t next_seq_ = 0;
  bool bounds_check_ = true;
  std::unordered_map<PointId, PointRecord> points_;
};

/// d(x, S): distance from x to the nearest center.
inline double distance_to_set(const MetricSpace& m, PointId x, std::span<const PointId> centers) {
  const PointRecord& rx = m.record(x);
  double best = std::numeric_limits<double>::infinity();
  for (PointId c : centers) best = std::min(best, m.distance(rx, m.record(c)));
  return best;
}

/// Clustering cost cl(S, W) = max over x in W of d(x, S).
inline double cl(const MetricSpace& m, std::span<const PointId> centers, std::span<const PointId> space) {
  if (space.empty()) return 0.0;
  if (centers.empty()) throw InvalidArgument("cl: no centers for a nonempty space");
  std::vector<const PointRecord*> cs;
  cs.reserve(centers.size());
  for (PointId c : centers) cs.push_back(&m.record(c));
  double worst = 0.0;
  for (PointId x : space) {
    const PointRecord& rx = m.record(x);
    double best = std::numeric_limits<double>::infinity();
    for (const PointRecord* c : cs) {
      best = std::min(best, m.distance(rx, *c));
      if (best <= worst) break;
    }
    worst = std::max(worst, best);
  }
  return worst;
}

/// B(x, r) restricted to `space`, boundary inclusive, ascending ids.
inline std::vector<PointId> ball(const MetricSpace& m, PointId x, double r, std::span<const PointId> space) {
  const PointRecord& rx = m.record(x);
  std::vector<PointId> out;
  for (PointId y : space)
    if (m.distance(rx, m.record(y)) <= r) out.push_back(y);
  std::sort(out.begin(), out.end());
  return out;
}

struct UpdateEvent {
  enum class Kind { insert, erase };
  Kind kind = Kind::insert;
  PointId id{};
  std::vector<double> position;    // coordinate insert
  std::optional<std::size_t> row;  // matrix insert

  static UpdateEvent insert(PointId id, std::vector<double> pos) {
    return {Kind::insert, id, std::move(pos), std::nullopt};
  }
  static UpdateEvent insert_row(PointId id, std::size_t row) { return {Kind::insert, id, {}, row}; }
  static UpdateEvent erase(PointId id) { return {Kind::erase, id, {}, std::nullopt}; }
};

/// Applies the insert half of an event to the space.
inline const PointRecord& admit_event(MetricSpace& m, const UpdateEvent& e) {
  if (e.row) return m.insert_row(e.id, *e.row);
  return m.insert(e.id, e.position);
}

}  // namespace dkc
