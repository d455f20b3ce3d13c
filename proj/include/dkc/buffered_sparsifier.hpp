#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "dkc/change_set.hpp"
#include "dkc/mp_sparsifier.hpp"

namespace dkc {

struct ResetReport {
  std::vector<PointId> old_output;  // ascending
  std::vector<PointId> new_output;  // ascending
  /// Internal updates for the downstream consumer: every `removed` id
  /// (ascending), then every `added` id (ascending). Not reportable.
  ChangeSet internal;
};

struct BufferedStep {
  ChangeSet lazy;                    // reportable lazy change
  std::optional<ResetReport> reset;  // present when this update closed an epoch
};

/// Wraps an MpSparsifier run with parameter ceil(q*k), q = 4/epsilon, and
/// exposes a copy of its output that only changes lazily for ceil((q-1)k)
/// updates, then is replaced wholesale by the inner output.
///
/// Lazy rules: an insert joins U. Deleting a member of U removes it and
/// promotes the smallest surviving member of its recorded cluster, if any.
/// Cluster records are snapshots taken from the inner sparsifier at the epoch
/// start; U is isolated from inner output changes between resets.
class BufferedSparsifier {
 public:
  BufferedSparsifier(const MetricSpace& metric, std::size_t k, double epsilon, SparsifierConfig inner_config)
      : k_(k), epsilon_(epsilon), inner_(metric, with_k(inner_config, k, epsilon)) {
    epoch_length_ = static_cast<std::size_t>(std::ceil((q() - 1.0) * static_cast<double>(k_) - 1e-9));
  }

  double epsilon() const { return epsilon_; }
  double q() const { return 4.0 / epsilon_; }
  std::size_t k() const { return k_; }
  std::size_t epoch_length() const { return epoch_length_; }
  std::size_t updates_in_epoch() const { return updates_in_epoch_; }
  std::size_t epochs_completed() const { return epochs_; }
  const MpSparsifier& inner() const { return inner_; }

  std::vector<PointId> output() const { return {u_.begin(), u_.end()}; }
  std::size_t output_size() const { return u_.size(); }
  bool in_output(PointId id) const { return u_.count(id) != 0; }

  BufferedStep insert(PointId id) {
    inner_.insert(id);
    BufferedStep step;
    u_.insert(id);
    step.lazy.added.push_back(id);
    step.reset = advance();
    return step;
  }

  /// Call before erasing the point from the metric.
  BufferedStep erase(PointId id) {
    inner_.erase(id);
    BufferedStep step;
    auto owner = owner_.find(id);
    std::optional<PointId> cluster;
    if (owner != owner_.end()) {
      cluster = owner->second;
      owner_.erase(owner);
      clusters_[*cluster].erase(id);
    }
    if (u_.erase(id)) {
      step.lazy.removed.push_back(id);
      if (cluster && *cluster == id) {
        auto members = std::move(clusters_[id]);
        clusters_.erase(id);
        if (!members.empty()) {
          const PointId next = *members.begin();
          for (PointId m : members) owner_[m] = next;
          clusters_[next] = std::move(members);
          if (u_.insert(next).second) step.lazy.added.push_back(next);
        }
      }
    }
    step.reset = advance();
    return step;
  }

  /// Replaces U by the inner output. Only legal once the epoch is full.
  ResetReport reset_epoch() {
    if (updates_in_epoch_ != epoch_length_) throw InvalidState("reset_epoch called before the epoch is complete");
    ResetReport report;
    report.old_output.assign(u_.begin(), u_.end());
    SparsifierOutput w = inner_.output();
    report.new_output = w.points;
    report.internal = diff_sorted(report.old_output, report.new_output);
    u_ = std::set<PointId>(w.points.begin(), w.points.end());
    snapshot_clusters();
    updates_in_epoch_ = 0;
    ++epochs_;
    return report;
  }

 private:
  static SparsifierConfig with_k(SparsifierConfig c, std::size_t k, double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InvalidArgument("epsilon must lie in (0, 1]");
    if (k == 0) throw InvalidArgument("k must be positive");
    c.k = static_cast<std::size_t>(std::ceil(4.0 / epsilon * static_cast<double>(k) - 1e-9));
    return c;
  }

  std::optional<ResetReport> advance() {
    ++updates_in_epoch_;
    if (updates_in_epoch_ < epoch_length_) return std::nullopt;
    return reset_epoch();
  }

  void snapshot_clusters() {
    clusters_.clear();
    owner_.clear();
    for (int i = 1; i < inner_.layers(); ++i) {
      for (Cluster& c : inner_.clusters(i)) {
        for (PointId m : c.members) owner_[m] = c.center;
        clusters_[c.center] = std::set<PointId>(c.members.begin(), c.members.end());
      }
    }
  }

  std::size_t k_;
  double epsilon_;
  std::size_t epoch_length_ = 1;
  std::size_t updates_in_epoch_ = 0;
  std::size_t epochs_ = 0;
  MpSparsifier inner_;
  std::set<PointId> u_;
  std::unordered_map<PointId, std::set<PointId>> clusters_;  // center -> live members
  std::unordered_map<PointId, PointId> owner_;               // member -> center
};

}  // namespace dkc
