#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "dkc/metric.hpp"
#include "dkc/random.hpp"

// Brute-force references. Nothing here calls into the dynamic structures; the
// only shared code is MetricSpace::distance and the RNG helpers.
namespace dkc::oracles {

struct OracleBudget {
  std::size_t max_n = 14;             // exhaustive OPT
  std::size_t max_k = 4;              // subset size for OPT enumeration
  std::size_t max_mis_vertices = 64;  // greedy MIS reference
  std::size_t max_mu_n = 12;          // exhaustive mu_k^beta
  std::size_t max_metric_n = 1024;    // O(n^3) metric validation
};

namespace detail {

inline std::vector<std::vector<double>> distances(const MetricSpace& m, std::span<const PointId> pts) {
  const std::size_t n = pts.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d[i][j] = d[j][i] = m.distance(pts[i], pts[j]);
  return d;
}

}  // namespace detail

/// max_{x in space} min_{c in centers} d(x, c), written out independently.
inline double cost(const MetricSpace& m, std::span<const PointId> centers, std::span<const PointId> space) {
  double worst = 0.0;
  for (PointId x : space) {
    double best = std::numeric_limits<double>::infinity();
    for (PointId c : centers) best = std::min(best, m.distance(x, c));
    worst = std::max(worst, best);
  }
  return worst;
}

struct OptResult {
  double value = 0.0;
  std::vector<PointId> centers;
};

/// Exact OPT_k(space) by enumerating every min(k, |space|)-subset.
inline OptResult opt_k_exact(const MetricSpace& m, std::span<const PointId> space, std::size_t k,
                             const OracleBudget& budget = {}) {
  const std::size_t n = space.size();
  if (n > budget.max_n) throw BudgetExceeded("opt_k_exact: n = " + std::to_string(n));
  if (n == 0) return {};
  if (k >= n) return {0.0, {space.begin(), space.end()}};
  if (k > budget.max_k) throw BudgetExceeded("opt_k_exact: k = " + std::to_string(k));
  const auto d = detail::distances(m, space);

  OptResult best{std::numeric_limits<double>::infinity(), {}};
  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  while (true) {
    double worst = 0.0;
    for (std::size_t x = 0; x < n && worst < best.value; ++x) {
      double near = std::numeric_limits<double>::infinity();
      for (std::size_t c : pick) near = std::min(near, d[x][c]);
      worst = std::max(worst, near);
    }
    if (worst < best.value) {
      best.value = worst;
      best.centers.clear();
      for (std::size_t c : pick) best.centers.push_back(space[c]);
    }
    // next combination in lexicographic order
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  std::sort(best.centers.begin(), best.centers.end());
  return best;
}

/// Farthest-first traversal from `first`; returns centers in pick order.
inline std::vector<PointId> gonzalez(const MetricSpace& m, std::span<const PointId> space, std::size_t k,
                                     PointId first) {
  if (space.empty()) throw InvalidArgument("gonzalez on an empty space");
  std::vector<PointId> centers{first};
  std::vector<double> near(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) near[i] = m.distance(space[i], first);
  while (centers.size() < std::min(k, space.size())) {
    std::size_t far = 0;
    for (std::size_t i = 1; i < space.size(); ++i)
      if (near[i] > near[far] || (near[i] == near[far] && space[i] < space[far])) far = i;
    if (near[far] == 0.0) break;  // everything already covered exactly
    centers.push_back(space[far]);
    for (std::size_t i = 0; i < space.size(); ++i) near[i] = std::min(near[i], m.distance(space[i], space[far]));
  }
  return centers;
}

/// Greedy MIS: scan `order` front to back, keep a vertex iff no kept neighbor.
inline std::vector<PointId> greedy_mis(std::span<const PointId> order,
                                       const std::function<bool(PointId, PointId)>& adjacent,
                                       const OracleBudget& budget = {}) {
  if (order.size() > budget.max_mis_vertices) throw BudgetExceeded("greedy_mis: too many vertices");
  std::vector<PointId> kept;
  for (PointId v : order) {
    bool free = true;
    for (PointId u : kept)
      if (adjacent(u, v)) {
        free = false;
        break;
      }
    if (free) kept.push_back(v);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

/// Greedy MIS of the lambda-threshold graph on `vertices`, in (priority, id) order.
inline std::vector<PointId> greedy_threshold_mis(const MetricSpace& m, std::span<const PointId> vertices,
                                                 double lambda) {
  std::vector<PointId> order(vertices.begin(), vertices.end());
  std::sort(order.begin(), order.end(), [&](PointId a, PointId b) {
    const PointRecord& ra = m.record(a);
    const PointRecord& rb = m.record(b);
    return std::pair(ra.priority, a) < std::pair(rb.priority, b);
  });
  OracleBudget unlimited;
  unlimited.max_mis_vertices = std::numeric_limits<std::size_t>::max();
  return greedy_mis(order, [&](PointId a, PointId b) { return m.distance(a, b) <= lambda; }, unlimited);
}

/// Scratch recomputation of the nested-MIS output: levels I_0..I_tau and the
/// first min(k, |V|) points of I_tau, I_{tau-1} \ I_tau, ..., I_0 \ I_1 with
/// each block in (seq, id) order.
struct NestedReference {
  std::vector<std::vector<PointId>> levels;  // ascending ids
  std::vector<PointId> solution;             // ascending ids
  int star = 1;
};

inline NestedReference nested_reference(const MetricSpace& m, std::span<const PointId> space, std::size_t k,
                                        const MetricBounds& bounds) {
  int tau = 0;
  while (std::ldexp(bounds.d_min, tau) < bounds.d_max) ++tau;
  tau += 2;
  NestedReference ref;
  ref.levels.emplace_back(space.begin(), space.end());
  std::sort(ref.levels[0].begin(), ref.levels[0].end());
  for (int i = 1; i <= tau; ++i)
    ref.levels.push_back(greedy_threshold_mis(m, ref.levels[i - 1], std::ldexp(bounds.d_min, i - 2)));
  ref.star = tau;
  for (int i = 1; i <= tau; ++i)
    if (ref.levels[i].size() <= k) {
      ref.star = i;
      break;
    }
  auto by_arrival = [&](PointId a, PointId b) {
    return std::pair(m.record(a).seq, a) < std::pair(m.record(b).seq, b);
  };
  std::vector<PointId> order;
  for (int i = tau; i >= 0; --i) {
    std::vector<PointId> block;
    if (i == tau) {
      block = ref.levels[tau];
    } else {
      std::set_difference(ref.levels[i].begin(), ref.levels[i].end(), ref.levels[i + 1].begin(),
                          ref.levels[i + 1].end(), std::back_inserter(block));
    }
    std::sort(block.begin(), block.end(), by_arrival);
    order.insert(order.end(), block.begin(), block.end());
  }
  order.resize(std::min(order.size(), k));
  std::sort(order.begin(), order.end());
  ref.solution = std::move(order);
  return ref;
}

/// diam(C); 0 for |C| <= 1.
inline double diameter(const MetricSpace& m, std::span<const PointId> c) {
  double best = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j) best = std::max(best, m.distance(c[i], c[j]));
  return best;
}

namespace detail {

inline std::vector<double> candidate_diameters(const std::vector<std::vector<double>>& d) {
  std::vector<double> cand{0.0};
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = i + 1; j < d.size(); ++j) cand.push_back(d[i][j]);
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  return cand;
}

// Smallest candidate for which `feasible` holds; feasibility is monotone.
inline double smallest_feasible(const std::vector<double>& cand, const std::function<bool(double)>& feasible) {
  std::size_t lo = 0, hi = cand.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (feasible(cand[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return cand[lo];
}

}  // namespace detail

/// mu_k^beta(W): least mu such that k disjoint subsets of W, each of diameter
/// <= mu, hold at least beta*|W| points. Exhaustive over subsets of W.
inline double mu_k_beta(const MetricSpace& m, std::span<const PointId> w, std::size_t k, double beta,
                        const OracleBudget& budget = {}) {
  const std::size_t n = w.size();
  if (n > budget.max_mu_n) throw BudgetExceeded("mu_k_beta: n = " + std::to_string(n));
  if (n == 0) return 0.0;
  const auto d = detail::distances(m, w);
  const double need = beta * static_cast<double>(n);
  const std::uint32_t full = (1u << n) - 1;

  auto feasible = [&](double mu) {
    std::vector<char> valid(full + 1, 0);
    valid[0] = 1;
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
      const int low = std::countr_zero(mask);
      const std::uint32_t rest = mask & (mask - 1);
      if (!valid[rest]) continue;
      bool ok = true;
      for (std::uint32_t r = rest; r && ok; r &= r - 1) ok = d[low][std::countr_zero(r)] <= mu;
      valid[mask] = ok;
    }
    // parts[mask] = fewest valid sets partitioning mask
    constexpr std::uint8_t inf = 255;
    std::vector<std::uint8_t> parts(full + 1, inf);
    parts[0] = 0;
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
      const std::uint32_t low = mask & (~mask + 1);
      const std::uint32_t rest = mask ^ low;
      for (std::uint32_t sub = rest;; sub = (sub - 1) & rest) {
        const std::uint32_t part = sub | low;
        if (valid[part] && parts[mask ^ part] != inf)
          parts[mask] = std::min<std::uint8_t>(parts[mask], parts[mask ^ part] + 1);
        if (sub == 0) break;
      }
      if (parts[mask] <= k && std::popcount(mask) >= need) return true;
    }
    return false;
  };
  return detail::smallest_feasible(detail::candidate_diameters(d), feasible);
}

/// mu_k^beta for points on a line. Optimal groups are runs of consecutive
/// points, so coverage for a fixed mu is a k-window dynamic program.
inline double mu_k_beta_line(std::vector<double> xs, std::size_t k, double beta) {
  const std::size_t n = xs.size();
  if (n == 0) return 0.0;
  std::sort(xs.begin(), xs.end());
  const double need = beta * static_cast<double>(n);

  auto coverage = [&](double mu) {
    std::vector<std::size_t> reach(n);  // one past the last point within mu of xs[i]
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
      j = std::max(j, i);
      while (j < n && xs[j] - xs[i] <= mu) ++j;
      reach[i] = j;
    }
    std::vector<std::size_t> prev(n + 1, 0), cur(n + 1, 0);
    for (std::size_t t = 1; t <= k; ++t) {
      cur[n] = 0;
      for (std::size_t i = n; i-- > 0;) cur[i] = std::max(cur[i + 1], reach[i] - i + prev[reach[i]]);
      std::swap(prev, cur);
    }
    return prev[0];
  };

  std::vector<double> cand{0.0};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) cand.push_back(xs[j] - xs[i]);
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  return detail::smallest_feasible(cand, [&](double mu) { return static_cast<double>(coverage(mu)) >= need; });
}

/// Static Mettu-Plaxton pass with boosting, mirroring the dynamic rebuild's
/// sampling contract: points in ascending id order; per cover call a partial
/// Fisher-Yates over positions (uniform_below(n - i) for the i-th of
/// min(2k, n) centers); C = floor(n/4) nearest by (distance, centers first,
/// id); of M calls the first with the smallest covering radius wins.
struct StaticLayers {
  std::vector<std::vector<PointId>> layers;   // U_1 .. U_l, ascending
  std::vector<std::vector<PointId>> centers;  // S_1 .. S_{l-1}, ascending
  std::vector<PointId> output;                // ascending
};

inline StaticLayers static_mettu_plaxton(const MetricSpace& m, std::span<const PointId> space, std::size_t k,
                                         std::size_t boost, std::size_t stop, Rng& rng) {
  StaticLayers out;
  std::vector<PointId> u(space.begin(), space.end());
  std::sort(u.begin(), u.end());
  while (u.size() > stop) {
    out.layers.push_back(u);
    const std::size_t n = u.size();
    const std::size_t s = std::min(2 * k, n);
    double best_radius = std::numeric_limits<double>::infinity();
    std::vector<PointId> best_centers, best_rest;
    for (std::size_t call = 0; call < boost; ++call) {
      std::vector<std::size_t> pos(n);
      for (std::size_t i = 0; i < n; ++i) pos[i] = i;
      for (std::size_t i = 0; i < s; ++i) std::swap(pos[i], pos[i + uniform_below(rng, n - i)]);
      std::vector<char> chosen(n, 0);
      std::vector<PointId> centers;
      for (std::size_t i = 0; i < s; ++i) {
        chosen[pos[i]] = 1;
        centers.push_back(u[pos[i]]);
      }
      struct Ranked {
        double dist;
        int non_center;
        PointId id;
        auto operator<=>(const Ranked&) const = default;
      };
      std::vector<Ranked> ranked;
      for (std::size_t i = 0; i < n; ++i) {
        double near = std::numeric_limits<double>::infinity();
        if (chosen[i]) {
          near = 0.0;
        } else {
          for (PointId c : centers) near = std::min(near, m.distance(u[i], c));
        }
        ranked.push_back({near, chosen[i] ? 0 : 1, u[i]});
      }
      std::sort(ranked.begin(), ranked.end());
      const std::size_t covered = n / 4;
      double radius = 0.0;
      for (std::size_t i = 0; i < covered; ++i) radius = std::max(radius, ranked[i].dist);
      if (radius < best_radius) {
        best_radius = radius;
        best_centers = centers;
        best_rest.clear();
        for (std::size_t i = covered; i < n; ++i) best_rest.push_back(ranked[i].id);
      }
    }
    std::sort(best_centers.begin(), best_centers.end());
    std::sort(best_rest.begin(), best_rest.end());
    out.centers.push_back(best_centers);
    u = std::move(best_rest);
  }
  out.layers.push_back(u);
  for (const auto& s : out.centers) out.output.insert(out.output.end(), s.begin(), s.end());
  out.output.insert(out.output.end(), u.begin(), u.end());
  std::sort(out.output.begin(), out.output.end());
  return out;
}

/// First metric-axiom violation of an explicit matrix, if any.
inline std::optional<MetricViolation> verify_metric(const DistanceMatrix& matrix, const OracleBudget& budget = {}) {
  if (matrix.size() > budget.max_metric_n) throw BudgetExceeded("verify_metric: n = " + std::to_string(matrix.size()));
  return find_metric_violation(matrix);
}

}  // namespace dkc::oracles
