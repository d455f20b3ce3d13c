#pragma once

#include <algorithm>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dkc/buffered_sparsifier.hpp"
#include "dkc/dynamic_mis.hpp"
#include "dkc/mp_sparsifier.hpp"
#include "dkc/nested_kcenter.hpp"
#include "dkc/oracles.hpp"
#include "dkc/pipeline.hpp"

// Invariant checks shared by the unit tests, the CLI `verify` command and the
// acceptance runner. Each check appends human-readable messages to a Failures
// list instead of throwing, so a caller can report everything at once.
namespace dkc::checks {

/// Relative slack for comparisons between sums of floating-point distances.
/// Pure max/min comparisons of the same computed values use no slack.
inline constexpr double kFloatSlack = 1e-9;

inline bool le(double a, double b) { return a <= b + kFloatSlack * std::max(1.0, std::abs(b)); }

struct Failures {
  std::vector<std::string> messages;
  std::size_t checks = 0;

  bool ok() const { return messages.empty(); }
  void expect(bool cond, const std::string& what) {
    ++checks;
    if (!cond) messages.push_back(what);
  }
};

namespace detail {

inline std::string ids(const std::vector<PointId>& v) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << to_u64(v[i]);
  os << '}';
  return os.str();
}

inline std::vector<PointId> sorted(std::vector<PointId> v) {
  std::sort(v.begin(), v.end());
  return v;
}

inline bool is_subset(const std::vector<PointId>& a, const std::vector<PointId>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline std::vector<PointId> minus(const std::vector<PointId>& a, const std::vector<PointId>& b) {
  std::vector<PointId> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace detail

/// Independence and maximality of `members` inside `vertices` for threshold lambda.
inline void check_independent_maximal(const MetricSpace& m, const std::vector<PointId>& vertices,
                                      const std::vector<PointId>& members, double lambda, const std::string& tag,
                                      Failures& f) {
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = i + 1; j < members.size(); ++j)
      f.expect(m.distance(members[i], members[j]) > lambda,
               tag + ": members " + to_string(members[i]) + " and " + to_string(members[j]) + " are adjacent");
  for (PointId v : detail::minus(vertices, members)) {
    bool dominated = false;
    for (PointId u : members)
      if (m.distance(u, v) <= lambda) {
        dominated = true;
        break;
      }
    f.expect(dominated, tag + ": vertex " + to_string(v) + " could be added (not maximal)");
  }
}

/// DynamicMis against the greedy oracle under the same priorities.
inline void check_mis(const DynamicMis& mis, const MetricSpace& m, Failures& f,
                      const oracles::OracleBudget& budget = {}) {
  const std::vector<PointId> vertices = mis.vertices().sorted_ids();
  const std::vector<PointId> members = mis.member_ids();
  f.expect(detail::is_subset(members, vertices), "mis: members outside the vertex set");
  check_independent_maximal(m, vertices, members, mis.threshold(), "mis", f);
  if (vertices.size() <= budget.max_mis_vertices) {
    std::vector<PointId> order = vertices;
    std::sort(order.begin(), order.end(),
              [&](PointId a, PointId b) { return priority_key(m.record(a)) < priority_key(m.record(b)); });
    const double lambda = mis.threshold();
    const auto expect = oracles::greedy_mis(
        order, [&](PointId a, PointId b) { return m.distance(a, b) <= lambda; }, budget);
    f.expect(expect == members, "mis: members " + detail::ids(members) + " differ from greedy " + detail::ids(expect));
  }
}

struct NestedCheckOptions {
  bool reference = true;  // compare against the scratch recomputation
  bool opt = false;       // exhaustive OPT checks (ratio 8, star-level lower bound)
  oracles::OracleBudget budget;
};

/// Structural and approximation invariants of NestedKCenter.
inline void check_nested(const NestedKCenter& kc, const MetricSpace& m, Failures& f,
                         const NestedCheckOptions& opt = {}) {
  const LevelConfig& cfg = kc.config();
  const std::size_t k = cfg.k;
  const int tau = kc.tau();
  const std::vector<PointId> v = kc.level_members(0);

  std::vector<std::vector<PointId>> levels{v};
  for (int i = 1; i <= tau; ++i) {
    levels.push_back(kc.level_members(i));
    const std::string tag = "level " + std::to_string(i);
    f.expect(detail::is_subset(levels[i], levels[i - 1]), tag + ": not nested in its parent");
    f.expect(kc.mis(i).vertices().sorted_ids() == levels[i - 1], tag + ": vertex set differs from the parent level");
    if (opt.reference) check_independent_maximal(m, levels[i - 1], levels[i], cfg.lambda(i), tag, f);

    // front/rest split of I_{i-1} \ I_i
    const auto front = kc.diff_front(i);
    const auto rest = kc.diff_rest(i);
    std::vector<PointId> both = front;
    both.insert(both.end(), rest.begin(), rest.end());
    f.expect(detail::sorted(both) == detail::minus(levels[i - 1], levels[i]),
             tag + ": front and rest do not partition the difference set");
    if (!front.empty() && !rest.empty())
      f.expect(arrival_key(m.record(front.back())) < arrival_key(m.record(rest.front())),
               tag + ": front is not an arrival-order prefix");
    const std::size_t room = k > levels[i].size() ? k - levels[i].size() : 0;
    f.expect(front.size() == std::min(room, both.size()), tag + ": front has the wrong size");

    // coverage chain: every point is within 2 * lambda_i of I_i
    if (!v.empty()) f.expect(le(cl(m, levels[i], v), 2.0 * cfg.lambda(i)), tag + ": coverage chain broken");
  }
  f.expect(kc.level_size(tau) <= 1 || v.empty(), "top level holds more than one point");

  const Solution& sol = kc.solution();
  f.expect(sol.centers.size() == std::min(k, v.size()), "solution size is not min(k, |V|)");
  f.expect(detail::is_subset(sol.centers, v), "solution is not a subset of the space");
  f.expect(sol.level == kc.star_level(), "solution level differs from the star level");
  if (!v.empty()) {
    const double cost = cl(m, sol.centers, v);
    f.expect(cost <= kc.cost_certificate(), "cost above certificate");
  }

  if (opt.reference) {
    const auto ref = oracles::nested_reference(m, v, k, cfg.bounds);
    for (int i = 0; i <= tau; ++i)
      f.expect(ref.levels[i] == levels[i], "level " + std::to_string(i) + " differs from scratch recomputation");
    f.expect(ref.star == sol.level, "star level differs from scratch recomputation");
    f.expect(ref.solution == sol.centers, "output order consistency: solution " + detail::ids(sol.centers) +
                                              " differs from scratch " + detail::ids(ref.solution));
  }

  if (opt.opt && !v.empty() && v.size() <= opt.budget.max_n && k <= opt.budget.max_k) {
    const double best = oracles::opt_k_exact(m, v, k, opt.budget).value;
    const double cost = cl(m, sol.centers, v);
    f.expect(cost <= 8.0 * best, "approximation ratio above 8");
    const int star = sol.level;
    if (star >= 2 && levels[star - 1].size() > k)
      f.expect(cfg.lambda(star - 1) <= 2.0 * best, "lambda below the star level exceeds 2 * OPT");
  }
}

/// Layer structure of MpSparsifier.
inline void check_sparsifier(const MpSparsifier& sp, const std::vector<PointId>& space, Failures& f) {
  const int l = sp.layers();
  const auto& cfg = sp.config();
  f.expect(sp.layer_members(1) == space, "sparsifier: U_1 differs from the space");
  std::vector<PointId> expect_out;
  for (int i = 1; i <= l; ++i) {
    const std::string tag = "sparsifier layer " + std::to_string(i);
    const auto ui = sp.layer_members(i);
    f.expect(sp.layer_size(i) == ui.size(), tag + ": size counter is stale");
    f.expect(4 * sp.count(i) < sp.layer_size(i) || sp.layer_size(i) == 0, tag + ": counter at its trigger");
    if (i == l) {
      expect_out.insert(expect_out.end(), ui.begin(), ui.end());
      break;
    }
    const auto next = sp.layer_members(i + 1);
    f.expect(detail::is_subset(next, ui), tag + ": next layer not nested");
    std::vector<PointId> covered;
    for (const Cluster& c : sp.clusters(i)) {
      f.expect(std::binary_search(c.members.begin(), c.members.end(), c.center),
               tag + ": center " + to_string(c.center) + " outside its cluster");
      covered.insert(covered.end(), c.members.begin(), c.members.end());
      expect_out.push_back(c.center);
    }
    const auto sorted_cov = detail::sorted(covered);
    f.expect(std::adjacent_find(sorted_cov.begin(), sorted_cov.end()) == sorted_cov.end(),
             tag + ": clusters overlap");
    f.expect(sorted_cov == detail::minus(ui, next), tag + ": clusters do not partition U_i minus U_{i+1}");
    f.expect(sp.centers(i).size() <= 2 * cfg.k, tag + ": more than 2k centers");
  }
  f.expect(detail::sorted(expect_out) == sp.output().points, "sparsifier: output is not S_1..S_{l-1} plus U_l");
  if (l >= 2)
    f.expect(16 * sp.layer_size(l) >= 9 * cfg.stop_threshold(), "sparsifier: bottom layer below 9/16 of the stop size");
}

/// Pipeline-level invariants: subset chain, certificate, triangle composition.
inline void check_pipeline(const Pipeline& p, Failures& f, const NestedCheckOptions& opt = {}) {
  const MetricSpace& m = p.metric();
  const std::vector<PointId> v = m.ids();
  const std::vector<PointId> u = p.space();
  const std::vector<PointId>& s = p.kcenter().centers();
  f.expect(detail::is_subset(u, v), "pipeline: U is not a subset of V");
  f.expect(detail::is_subset(s, u), "pipeline: S is not a subset of U");
  if (p.sparsifier()) {
    f.expect(p.sparsifier()->output().points == u, "pipeline: k-center space differs from the sparsifier output");
    check_sparsifier(*p.sparsifier(), v, f);
  }
  if (p.buffered()) f.expect(p.buffered()->output() == u, "pipeline: k-center space differs from the buffered output");
  NestedCheckOptions inner = opt;
  inner.opt = false;
  check_nested(p.kcenter(), m, f, inner);
  if (v.empty()) return;
  const double cost_sv = cl(m, s, v);
  const double cost_uv = cl(m, u, v);
  const double cost_su = cl(m, s, u);
  f.expect(le(cost_sv, cost_uv + cost_su), "pipeline: cl(S,V) > cl(U,V) + cl(S,U)");
  f.expect(le(cost_sv, cost_uv + p.kcenter().cost_certificate()), "pipeline: cost above certificate");
}

// ---- bound checks on explicit instances ------------------------------------

/// OPT_k(W) <= 2 OPT_k(V) for W a subset of V.
inline void check_subset_opt(const MetricSpace& m, const std::vector<PointId>& v, const std::vector<PointId>& w,
                             std::size_t k, Failures& f, const oracles::OracleBudget& budget = {}) {
  const double ov = oracles::opt_k_exact(m, v, k, budget).value;
  const double ow = oracles::opt_k_exact(m, w, k, budget).value;
  f.expect(ow <= 2.0 * ov, "subset OPT: OPT_k(W) = " + std::to_string(ow) + " > 2 OPT_k(V) = " + std::to_string(2 * ov));
}

/// OPT_{k+s}(V) <= OPT_k(V') whenever |V xor V'| <= s.
inline void check_lazy_updates(const MetricSpace& m, const std::vector<PointId>& v, const std::vector<PointId>& v2,
                               std::size_t k, Failures& f, const oracles::OracleBudget& budget = {}) {
  const std::size_t s = diff_sorted(v, v2).size();
  oracles::OracleBudget wide = budget;
  wide.max_k = std::max(budget.max_k, k + s);
  const double lhs = oracles::opt_k_exact(m, v, k + s, wide).value;
  const double rhs = oracles::opt_k_exact(m, v2, k, budget).value;
  f.expect(lhs <= rhs, "lazy updates: OPT_{k+s}(V) > OPT_k(V')");
}

/// mu_k^1(V) <= 2 OPT_k(V); mu_k^1(W) <= mu_k^1(V) for W in V;
/// mu_k^{1/2}(W') <= mu_k^1(W) whenever |W xor W'| <= |W| / 4.
inline void check_mu_bounds(const MetricSpace& m, const std::vector<PointId>& v, const std::vector<PointId>& w,
                            const std::vector<PointId>& w2, std::size_t k, Failures& f,
                            const oracles::OracleBudget& budget = {}) {
  const double mu_v = oracles::mu_k_beta(m, v, k, 1.0, budget);
  const double opt_v = oracles::opt_k_exact(m, v, k, budget).value;
  f.expect(mu_v <= 2.0 * opt_v, "mu: mu_k^1(V) > 2 OPT_k(V)");
  const double mu_w = oracles::mu_k_beta(m, w, k, 1.0, budget);
  f.expect(mu_w <= mu_v, "mu: mu_k^1(W) > mu_k^1(V)");
  if (4 * diff_sorted(w, w2).size() <= w.size())
    f.expect(oracles::mu_k_beta(m, w2, k, 0.5, budget) <= mu_w, "mu: mu_k^{1/2}(W') > mu_k^1(W)");
}

}  // namespace dkc::checks
