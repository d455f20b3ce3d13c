#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dkc/buffered_sparsifier.hpp"
#include "dkc/mp_sparsifier.hpp"
#include "dkc/nested_kcenter.hpp"

namespace dkc {

enum class PipelineMode { direct, sparsified, buffered };

inline std::string to_string(PipelineMode m) {
  switch (m) {
    case PipelineMode::direct: return "direct";
    case PipelineMode::sparsified: return "sparsified";
    case PipelineMode::buffered: return "buffered";
  }
  return "?";
}

inline PipelineMode parse_mode(const std::string& s) {
  if (s == "direct") return PipelineMode::direct;
  if (s == "sparsified") return PipelineMode::sparsified;
  if (s == "buffered") return PipelineMode::buffered;
  throw InvalidArgument("unknown mode '" + s + "'");
}

struct PipelineConfig {
  PipelineMode mode = PipelineMode::direct;
  std::size_t k = 1;
  double epsilon = 0.5;         // buffered mode only
  SparsifierConfig sparsifier;  // k is overridden from `k`
  NestedKCenter::Options kcenter_options;
};

struct PipelineStepReport {
  ChangeSet reported;               // S before the update ⊕ S after it
  ChangeSet space_change;           // net change of the k-center input space over the step
  std::size_t forwarded = 0;        // single updates fed to the k-center structure
  bool reset = false;               // buffered epoch reset happened in this step
  std::vector<std::size_t> level_recourse;  // sum over forwarded updates of |delta(I_i)|
  double micros_sparsifier = 0.0;
  double micros_kcenter = 0.0;
};

struct MetricsSnapshot {
  std::size_t steps = 0;
  std::size_t cumulative_recourse = 0;
  std::size_t forwarded_updates = 0;
  std::size_t resets = 0;
  double micros_sparsifier = 0.0;
  double micros_kcenter = 0.0;
};

struct PipelineReport {
  Solution solution;
  double cost = 0.0;  // cl(S, V)
  MetricsSnapshot metrics;
};

/// Composes an optional sparsifier with NestedKCenter. Owns the metric space.
/// In sparsified modes every change of the sparsifier output is fed to the
/// k-center structure as single updates (removals first, ascending ids), so
/// its space always equals the sparsifier output between steps.
class Pipeline {
 public:
  Pipeline(MetricSpace metric, PipelineConfig config)
      : metric_(std::make_unique<MetricSpace>(std::move(metric))), config_(config) {
    config_.sparsifier.k = config_.k;
    kcenter_ = std::make_unique<NestedKCenter>(*metric_, LevelConfig{config_.k, metric_->bounds()},
                                               config_.kcenter_options);
    if (config_.mode == PipelineMode::sparsified)
      sparsifier_ = std::make_unique<MpSparsifier>(*metric_, config_.sparsifier);
    if (config_.mode == PipelineMode::buffered)
      buffered_ = std::make_unique<BufferedSparsifier>(*metric_, config_.k, config_.epsilon, config_.sparsifier);
  }

  const PipelineConfig& config() const { return config_; }
  const MetricSpace& metric() const { return *metric_; }
  MetricSpace& metric() { return *metric_; }
  const NestedKCenter& kcenter() const { return *kcenter_; }
  const MpSparsifier* sparsifier() const { return sparsifier_.get(); }
  const BufferedSparsifier* buffered() const { return buffered_.get(); }
  const MetricsSnapshot& metrics() const { return metrics_; }

  /// The k-center input space U (V itself in direct mode), ascending.
  std::vector<PointId> space() const { return kcenter_->level_members(0); }

  PipelineStepReport apply(const UpdateEvent& event) {
    using clock = std::chrono::steady_clock;
    PipelineStepReport step;
    step.level_recourse.assign(kcenter_->tau() + 1, 0);
    const std::vector<PointId> before = kcenter_->centers();

    if (event.kind == UpdateEvent::Kind::insert) admit_event(*metric_, event);
    else if (!metric_->contains(event.id)) throw NotFound("point " + to_string(event.id) + " is not live");

    const auto t0 = clock::now();
    ChangeSet change;
    std::optional<ResetReport> reset;
    const bool ins = event.kind == UpdateEvent::Kind::insert;
    switch (config_.mode) {
      case PipelineMode::direct:
        if (ins) change.added.push_back(event.id);
        else change.removed.push_back(event.id);
        break;
      case PipelineMode::sparsified:
        change = ins ? sparsifier_->insert(event.id) : sparsifier_->erase(event.id);
        break;
      case PipelineMode::buffered: {
        BufferedStep b = ins ? buffered_->insert(event.id) : buffered_->erase(event.id);
        change = std::move(b.lazy);
        reset = std::move(b.reset);
        break;
      }
    }
    const auto t1 = clock::now();
    forward(change, step);
    if (reset) {
      step.reset = true;
      forward(reset->internal, step);
      change = compose(change, reset->internal);
    }
    const auto t2 = clock::now();

    if (!ins) metric_->erase(event.id);

    step.space_change = std::move(change);
    step.reported = diff_sorted(before, kcenter_->centers());
    step.micros_sparsifier = std::chrono::duration<double, std::micro>(t1 - t0).count();
    step.micros_kcenter = std::chrono::duration<double, std::micro>(t2 - t1).count();

    ++metrics_.steps;
    metrics_.cumulative_recourse += step.reported.size();
    metrics_.forwarded_updates += step.forwarded;
    metrics_.resets += step.reset ? 1 : 0;
    metrics_.micros_sparsifier += step.micros_sparsifier;
    metrics_.micros_kcenter += step.micros_kcenter;
    return step;
  }

  PipelineReport report() const {
    PipelineReport r;
    r.solution = kcenter_->solution();
    const std::vector<PointId> all = metric_->ids();
    r.cost = cl(*metric_, r.solution.centers, all);
    r.metrics = metrics_;
    return r;
  }

 private:
  void forward(const ChangeSet& change, PipelineStepReport& step) {
    for (PointId id : change.removed) record(kcenter_->erase(id), step);
    for (PointId id : change.added) record(kcenter_->insert(id), step);
  }

  static void record(const StepReport& r, PipelineStepReport& step) {
    ++step.forwarded;
    for (std::size_t i = 0; i < r.levels.size(); ++i) step.level_recourse[i] += r.levels[i].size();
  }

  std::unique_ptr<MetricSpace> metric_;
  PipelineConfig config_;
  std::unique_ptr<NestedKCenter> kcenter_;
  std::unique_ptr<MpSparsifier> sparsifier_;
  std::unique_ptr<BufferedSparsifier> buffered_;
  MetricsSnapshot metrics_;
};

}  // namespace dkc
