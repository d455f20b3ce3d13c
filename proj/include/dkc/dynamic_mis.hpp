#pragma once

#include <optional>
#include <queue>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dkc/change_set.hpp"
#include "dkc/metric.hpp"

namespace dkc {

/// Maximal independent set of a vertex-dynamic threshold graph.
///
/// The graph is implicit: its vertices are the records handed to this object
/// (the parent set) and x ~ y iff d(x, y) <= threshold. The maintained set is
/// always the greedy MIS over ascending PriorityKey, i.e. a vertex is a member
/// iff none of its lower-key neighbors is. Updates repair it by propagating
/// status changes upward in key order, so the result is a pure function of the
/// current vertex set and the priorities.
///
/// Adjacency is never stored; each touched vertex costs one scan over the
/// vertex set.
class DynamicMis {
 public:
  DynamicMis(const MetricSpace& metric, double threshold) : metric_(&metric), threshold_(threshold) {}

  double threshold() const { return threshold_; }
  const PointBag& vertices() const { return vertices_; }
  const PointBag& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool has_vertex(PointId id) const { return vertices_.contains(id); }
  bool in_mis(PointId id) const { return members_.contains(id); }
  std::vector<PointId> member_ids() const { return members_.sorted_ids(); }

  bool adjacent(const PointRecord& a, const PointRecord& b) const {
    return metric_->distance(a, b) <= threshold_;
  }

  /// Lowest-key member adjacent to a non-member vertex; nullopt for members.
  std::optional<PointId> dominator(PointId id) const {
    if (!vertices_.contains(id)) throw NotFound("vertex " + to_string(id) + " is not in this graph");
    if (members_.contains(id)) return std::nullopt;
    const PointRecord& r = metric_->record(id);
    const PointRecord* best = nullptr;
    for (const PointRecord* m : members_)
      if (adjacent(r, *m) && (!best || priority_key(*m) < priority_key(*best))) best = m;
    return best ? std::optional<PointId>(best->id) : std::nullopt;
  }

  ChangeSet insert_vertex(const PointRecord& x) {
    Tracker t;
    insert_one(x, t);
    return t.finish(*this);
  }

  /// The record of `x` must still be valid (erase from the metric afterwards).
  ChangeSet erase_vertex(PointId x) {
    Tracker t;
    erase_one(x, t);
    return t.finish(*this);
  }

  /// Applies a parent-set delta as single-vertex updates: all removals, then
  /// all insertions, each in ascending key order. Returns the net change.
  ChangeSet apply(const ChangeSet& parent_delta) {
    Tracker t;
    auto by_key = [this](const std::vector<PointId>& ids) {
      std::vector<const PointRecord*> recs;
      recs.reserve(ids.size());
      for (PointId id : ids) recs.push_back(&metric_->record(id));
      std::sort(recs.begin(), recs.end(),
                [](const PointRecord* a, const PointRecord* b) { return priority_key(*a) < priority_key(*b); });
      return recs;
    };
    for (const PointRecord* r : by_key(parent_delta.removed)) erase_one(r->id, t);
    for (const PointRecord* r : by_key(parent_delta.added)) insert_one(*r, t);
    return t.finish(*this);
  }

  /// Number of status evaluations performed so far (work counter).
  std::uint64_t evaluations() const { return evaluations_; }

 private:
  // Records the membership of every touched vertex before its first change.
  struct Tracker {
    std::unordered_map<PointId, bool> before;

    void touch(PointId id, bool was_member) { before.try_emplace(id, was_member); }

    ChangeSet finish(const DynamicMis& mis) const {
      ChangeSet c;
      for (const auto& [id, was] : before) {
        const bool now = mis.members_.contains(id);
        if (was && !now) c.removed.push_back(id);
        if (!was && now) c.added.push_back(id);
      }
      c.normalize();
      return c;
    }
  };

  struct HeapOrder {
    bool operator()(const PointRecord* a, const PointRecord* b) const {
      return priority_key(*b) < priority_key(*a);
    }
  };
  using Heap = std::priority_queue<const PointRecord*, std::vector<const PointRecord*>, HeapOrder>;

  void insert_one(const PointRecord& x, Tracker& t) {
    if (vertices_.contains(x.id)) throw InvalidState("vertex " + to_string(x.id) + " inserted twice");
    t.touch(x.id, false);
    vertices_.insert(&x);
    Heap heap;
    heap.push(&x);
    propagate(heap, t);
  }

  void erase_one(PointId id, Tracker& t) {
    if (!vertices_.contains(id)) throw NotFound("vertex " + to_string(id) + " is not in this graph");
    const PointRecord& x = metric_->record(id);
    const bool was_member = members_.contains(id);
    t.touch(id, was_member);
    vertices_.erase(id);
    if (!was_member) return;
    members_.erase(id);
    Heap heap;
    push_upper_neighbors(x, heap);
    propagate(heap, t);
  }

  void push_upper_neighbors(const PointRecord& u, Heap& heap) const {
    const PriorityKey ku = priority_key(u);
    for (const PointRecord* v : vertices_)
      if (ku < priority_key(*v) && adjacent(u, *v)) heap.push(v);
  }

  // Pops in ascending key order. Every push comes from a lower-key vertex, so
  // when u is popped all vertices below it are final and u is decided by its
  // lower-key members alone.
  void propagate(Heap& heap, Tracker& t) {
    std::unordered_set<PointId> done;
    while (!heap.empty()) {
      const PointRecord* u = heap.top();
      heap.pop();
      if (!done.insert(u->id).second) continue;
      ++evaluations_;
      const PriorityKey ku = priority_key(*u);
      bool free = true;
      for (const PointRecord* m : members_) {
        if (m != u && priority_key(*m) < ku && adjacent(*u, *m)) {
          free = false;
          break;
        }
      }
      const bool member = members_.contains(u->id);
      if (free == member) continue;
      t.touch(u->id, member);
      if (free)
        members_.insert(u);
      else
        members_.erase(u->id);
      push_upper_neighbors(*u, heap);
    }
  }

  const MetricSpace* metric_;
  double threshold_;
  PointBag vertices_;
  PointBag members_;
  std::uint64_t evaluations_ = 0;
};

}  // namespace dkc
