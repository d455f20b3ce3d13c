#pragma once

#include <algorithm>
#include <iterator>
#include <vector>

#include "dkc/metric.hpp"

namespace dkc {

/// Net membership change of a maintained set: |added| + |removed| is the recourse.
struct ChangeSet {
  std::vector<PointId> added;
  std::vector<PointId> removed;

  std::size_t size() const { return added.size() + removed.size(); }
  bool empty() const { return added.empty() && removed.empty(); }

  void normalize() {
    std::sort(added.begin(), added.end());
    std::sort(removed.begin(), removed.end());
  }

  friend bool operator==(const ChangeSet&, const ChangeSet&) = default;
};

/// Symmetric difference of two ascending id lists.
inline ChangeSet diff_sorted(const std::vector<PointId>& before, const std::vector<PointId>& after) {
  ChangeSet c;
  std::set_difference(after.begin(), after.end(), before.begin(), before.end(), std::back_inserter(c.added));
  std::set_difference(before.begin(), before.end(), after.begin(), after.end(), std::back_inserter(c.removed));
  return c;
}

/// O(1) insert/erase/contains over point records with contiguous iteration.
/// Iteration order is deterministic given the operation history.
class PointBag {
 public:
  bool contains(PointId id) const { return index_.count(id) != 0; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  bool insert(const PointRecord* rec) {
    auto [it, fresh] = index_.try_emplace(rec->id, items_.size());
    if (!fresh) return false;
    items_.push_back(rec);
    return true;
  }

  bool erase(PointId id) {
    auto it = index_.find(id);
    if (it == index_.end()) return false;
    const std::size_t pos = it->second;
    index_.erase(it);
    if (pos + 1 != items_.size()) {
      items_[pos] = items_.back();
      index_[items_[pos]->id] = pos;
    }
    items_.pop_back();
    return true;
  }

  void clear() {
    items_.clear();
    index_.clear();
  }

  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  const std::vector<const PointRecord*>& items() const { return items_; }

  std::vector<PointId> sorted_ids() const {
    std::vector<PointId> out;
    out.reserve(items_.size());
    for (const PointRecord* r : items_) out.push_back(r->id);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::vector<const PointRecord*> items_;
  std::unordered_map<PointId, std::size_t> index_;
};

}  // namespace dkc

namespace dkc {

/// Net effect of applying `first` and then `second` to the same set.
inline ChangeSet compose(const ChangeSet& first, const ChangeSet& second) {
  std::unordered_map<PointId, int> net;
  for (PointId id : first.added) ++net[id];
  for (PointId id : first.removed) --net[id];
  for (PointId id : second.added) ++net[id];
  for (PointId id : second.removed) --net[id];
  ChangeSet out;
  for (const auto& [id, d] : net) {
    if (d > 0) out.added.push_back(id);
    if (d < 0) out.removed.push_back(id);
  }
  out.normalize();
  return out;
}

}  // namespace dkc
