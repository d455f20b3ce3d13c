#pragma once

#include <cmath>
#include <set>
#include <vector>

#include "dkc/change_set.hpp"
#include "dkc/dynamic_mis.hpp"
#include "dkc/metric.hpp"

namespace dkc {

/// Threshold ladder: lambda_i = 2^(i-2) * d_min for 0 <= i <= tau, with tau
/// the smallest value such that lambda_tau >= d_max (ceil(log2 Delta) + 2).
struct LevelConfig {
  std::size_t k = 1;
  MetricBounds bounds;

  int tau() const {
    int t = 0;
    while (std::ldexp(bounds.d_min, t) < bounds.d_max) ++t;
    return t + 2;
  }
  double lambda(int i) const { return std::ldexp(bounds.d_min, i - 2); }
};

struct Solution {
  std::vector<PointId> centers;  // ascending ids
  int level = 1;                 // i*
  double cost_upper = 0.0;       // 2 * lambda_{i*}; 0 for an empty space
};

struct StepReport {
  ChangeSet solution;
  std::vector<ChangeSet> levels;  // levels[i] = delta(I_i), i = 0..tau
};

struct NestedKCenterOptions {
  bool skip_rebalance = false;  // fault injection for mutation tests only
};

/// Nested-MIS k-center: I_0 = V, and for each level i in [1, tau] I_i is the
/// greedy MIS of the lambda_i-threshold graph induced on I_{i-1}. The output
/// is I_{i*} plus the first k - |I_{i*}| points of I_{i*-1} \ I_{i*} in
/// arrival order, where i* is the first level holding at most k points.
///
/// Each difference set I_{i-1} \ I_i is split into an ordered `front` holding
/// exactly the prefix that the output would use at that level, and `rest`.
class NestedKCenter {
 public:
  using Options = NestedKCenterOptions;

  NestedKCenter(const MetricSpace& metric, std::size_t k)
      : NestedKCenter(metric, LevelConfig{k, metric.bounds()}) {}

  NestedKCenter(const MetricSpace& metric, LevelConfig config, Options options = {})
      : metric_(&metric), config_(config), options_(options) {
    if (config_.k == 0) throw InvalidArgument("k must be positive");
    const int tau = config_.tau();
    levels_.reserve(tau);
    for (int i = 1; i <= tau; ++i) levels_.push_back(Level{DynamicMis(metric, config_.lambda(i)), {}, {}});
  }

  const LevelConfig& config() const { return config_; }
  int tau() const { return static_cast<int>(levels_.size()); }
  std::size_t size() const { return base_.size(); }
  bool contains(PointId id) const { return base_.contains(id); }

  /// I_i as ascending ids; level 0 is the whole space.
  std::vector<PointId> level_members(int i) const {
    return i == 0 ? base_.sorted_ids() : level(i).mis.member_ids();
  }
  std::size_t level_size(int i) const { return i == 0 ? base_.size() : level(i).mis.size(); }
  const DynamicMis& mis(int i) const { return level(i).mis; }

  /// Front / rest parts of I_{i-1} \ I_i in arrival order.
  std::vector<PointId> diff_front(int i) const { return ids_of(level(i).front); }
  std::vector<PointId> diff_rest(int i) const { return ids_of(level(i).rest); }

  StepReport insert(PointId id) {
    const PointRecord& rec = metric_->record(id);
    if (base_.contains(id)) throw InvalidState("point " + to_string(id) + " already in the k-center space");
    base_.insert(&rec);
    ChangeSet delta;
    delta.added.push_back(id);
    return cascade(std::move(delta));
  }

  /// Call before erasing the point from the metric.
  StepReport erase(PointId id) {
    if (!base_.contains(id)) throw NotFound("point " + to_string(id) + " not in the k-center space");
    base_.erase(id);
    ChangeSet delta;
    delta.removed.push_back(id);
    return cascade(std::move(delta));
  }

  const Solution& solution() const { return solution_; }
  const std::vector<PointId>& centers() const { return solution_.centers; }
  double cost_certificate() const { return solution_.cost_upper; }

  /// Smallest level with |I_i| <= k.
  int star_level() const {
    for (int i = 1; i <= tau(); ++i)
      if (level(i).mis.size() <= config_.k) return i;
    return tau();
  }

 private:
  struct Level {
    DynamicMis mis;
    std::set<ArrivalKey> front;
    std::set<ArrivalKey> rest;
  };

  Level& level(int i) { return levels_[i - 1]; }
  const Level& level(int i) const { return levels_[i - 1]; }

  static std::vector<PointId> ids_of(const std::set<ArrivalKey>& s) {
    std::vector<PointId> out;
    out.reserve(s.size());
    for (const ArrivalKey& key : s) out.push_back(key.id);
    return out;
  }

  bool in_level(int i, PointId id) const { return i == 0 ? base_.contains(id) : level(i).mis.in_mis(id); }

  StepReport cascade(ChangeSet delta0) {
    StepReport report;
    report.levels.resize(tau() + 1);
    report.levels[0] = std::move(delta0);
    for (int i = 1; i <= tau(); ++i) {
      const ChangeSet& parent = report.levels[i - 1];
      if (parent.empty()) break;
      report.levels[i] = level(i).mis.apply(parent);
      refresh_diff(i, parent);
      refresh_diff(i, report.levels[i]);
      rebalance(i);
    }
    std::vector<PointId> before = std::move(solution_.centers);
    rebuild_solution();
    report.solution = diff_sorted(before, solution_.centers);
    return report;
  }

  void refresh_diff(int i, const ChangeSet& touched) {
    for (const auto* ids : {&touched.added, &touched.removed})
      for (PointId id : *ids) place(i, id);
  }

  // Re-files one point of I_{i-1} \ I_i after a membership change.
  void place(int i, PointId id) {
    Level& lv = level(i);
    const ArrivalKey key = arrival_key(metric_->record(id));
    lv.front.erase(key);
    lv.rest.erase(key);
    if (!in_level(i - 1, id) || in_level(i, id)) return;
    if (!lv.front.empty() && key < *lv.front.rbegin())
      lv.front.insert(key);
    else
      lv.rest.insert(key);
  }

  // Moves boundary elements one at a time until |front| = min(k - |I_i|, |D_i|).
  void rebalance(int i) {
    if (options_.skip_rebalance) return;
    Level& lv = level(i);
    const std::size_t members = lv.mis.size();
    const std::size_t room = config_.k > members ? config_.k - members : 0;
    while (lv.front.size() > room) {
      auto last = std::prev(lv.front.end());
      lv.rest.insert(*last);
      lv.front.erase(last);
    }
    while (lv.front.size() < room && !lv.rest.empty()) {
      lv.front.insert(*lv.rest.begin());
      lv.rest.erase(lv.rest.begin());
    }
  }

  void rebuild_solution() {
    const int star = star_level();
    const Level& lv = level(star);
    std::vector<PointId> s;
    s.reserve(lv.mis.size() + lv.front.size());
    for (const PointRecord* r : lv.mis.members()) s.push_back(r->id);
    for (const ArrivalKey& key : lv.front) s.push_back(key.id);
    std::sort(s.begin(), s.end());
    solution_.centers = std::move(s);
    solution_.level = star;
    solution_.cost_upper = base_.empty() ? 0.0 : 2.0 * config_.lambda(star);
  }

  const MetricSpace* metric_;
  LevelConfig config_;
  Options options_;
  PointBag base_;
  std::vector<Level> levels_;
  Solution solution_;
};

}  // namespace dkc
