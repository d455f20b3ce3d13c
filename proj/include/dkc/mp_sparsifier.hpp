#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

#include "dkc/change_set.hpp"
#include "dkc/metric.hpp"
#include "dkc/random.hpp"

namespace dkc {

struct SparsifierConfig {
  std::size_t k = 1;
  std::size_t n_max = 1024;  // sizes the boost count
  double boost_c = 2.0;
  std::size_t stop_factor = 16;  // layers are peeled while |U_j| > stop_factor * k
  std::uint64_t seed = 1;

  /// M = max(1, ceil(c * log2 n_max)) independent covers per layer.
  std::size_t boost() const {
    const double m = std::ceil(boost_c * std::log2(static_cast<double>(std::max<std::size_t>(n_max, 1))));
    return m < 1.0 ? 1 : static_cast<std::size_t>(m);
  }
  std::size_t stop_threshold() const { return stop_factor * k; }
};

struct Cluster {
  PointId center;
  std::vector<PointId> members;  // ascending, includes the center
};

struct CoverResult {
  std::vector<PointId> centers;    // in sampling order
  std::vector<PointId> covered;    // C, ascending
  std::vector<PointId> remainder;  // W \ C, ascending
  std::vector<Cluster> clusters;   // one per center inside C, ascending by center
  double radius = 0.0;             // max over C of d(x, centers)
};

/// One sampling round over W (records in ascending id order).
///
/// Samples min(2k, |W|) centers uniformly without replacement by a partial
/// Fisher-Yates shuffle of W's positions (one uniform_below draw per center),
/// then takes C as the floor(|W|/4) points nearest to the sample, ranked by
/// (distance, center-before-non-center, id). Each point of C joins its nearest
/// center (ties by center id); a center always forms its own cluster.
inline CoverResult almost_cover(const MetricSpace& metric, std::span<const PointRecord* const> w,
                                std::size_t k, Rng& rng) {
  if (w.empty()) throw InvalidArgument("almost_cover on an empty set");
  const std::size_t n = w.size();
  const std::size_t s = std::min(2 * k, n);

  std::vector<std::size_t> pos(n);
  for (std::size_t i = 0; i < n; ++i) pos[i] = i;
  for (std::size_t i = 0; i < s; ++i) std::swap(pos[i], pos[i + uniform_below(rng, n - i)]);

  std::vector<const PointRecord*> centers(s);
  for (std::size_t i = 0; i < s; ++i) centers[i] = w[pos[i]];
  std::vector<const PointRecord*> by_id = centers;
  std::sort(by_id.begin(), by_id.end(), [](auto* a, auto* b) { return a->id < b->id; });

  std::vector<char> is_center(n, 0);
  for (std::size_t i = 0; i < s; ++i) is_center[pos[i]] = 1;

  std::vector<double> dist(n);
  std::vector<std::uint32_t> owner(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (is_center[i]) {
      dist[i] = 0.0;
      owner[i] = static_cast<std::uint32_t>(
          std::lower_bound(by_id.begin(), by_id.end(), w[i], [](auto* a, auto* b) { return a->id < b->id; }) -
          by_id.begin());
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t arg = 0;
    for (std::uint32_t c = 0; c < by_id.size(); ++c) {
      const double d = metric.distance(*w[i], *by_id[c]);
      if (d < best) {
        best = d;
        arg = c;
      }
    }
    dist[i] = best;
    owner[i] = arg;
  }

  const std::size_t c_size = n / 4;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  auto closer = [&](std::size_t a, std::size_t b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    if (is_center[a] != is_center[b]) return is_center[a] > is_center[b];
    return w[a]->id < w[b]->id;
  };
  if (c_size > 0 && c_size < n) std::nth_element(order.begin(), order.begin() + (c_size - 1), order.end(), closer);

  CoverResult out;
  out.centers.reserve(s);
  for (const PointRecord* c : centers) out.centers.push_back(c->id);

  std::vector<char> in_c(n, 0);
  for (std::size_t r = 0; r < c_size; ++r) in_c[order[r]] = 1;

  std::vector<std::vector<PointId>> members(by_id.size());
  std::vector<char> center_covered(by_id.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (in_c[i]) {
      out.covered.push_back(w[i]->id);
      out.radius = std::max(out.radius, dist[i]);
      members[owner[i]].push_back(w[i]->id);
      if (is_center[i]) center_covered[owner[i]] = 1;
    } else {
      out.remainder.push_back(w[i]->id);
    }
  }
  std::sort(out.covered.begin(), out.covered.end());
  std::sort(out.remainder.begin(), out.remainder.end());
  for (std::size_t c = 0; c < by_id.size(); ++c) {
    if (!center_covered[c]) continue;
    std::sort(members[c].begin(), members[c].end());
    out.clusters.push_back(Cluster{by_id[c]->id, std::move(members[c])});
  }
  return out;
}

struct ReconstructReport {
  std::optional<int> rebuilt_from;  // nullopt: no layer reached its threshold
  int layers_after = 1;
  std::size_t cover_calls = 0;
  ChangeSet output;
};

struct SparsifierOutput {
  std::vector<PointId> points;  // ascending
  int layers = 1;
};

/// Dynamic Mettu-Plaxton sparsifier for k-center.
///
/// Keeps nested layers V = U_1 ⊇ ... ⊇ U_l. For i < l the points of
/// U_i \ U_{i+1} are partitioned into clusters whose centers form S_i; the
/// output is S_1 ∪ ... ∪ S_{l-1} ∪ U_l. Inserts land in U_l, deletes of a
/// center hand the role to the smallest surviving member of its cluster, and
/// layer j and everything below it are resampled once the updates counted
/// since its last rebuild reach |U_j| / 4.
class MpSparsifier {
 public:
  MpSparsifier(const MetricSpace& metric, SparsifierConfig config)
      : metric_(&metric), config_(config), rng_(config.seed) {
    if (config_.k == 0) throw InvalidArgument("k must be positive");
    if (config_.stop_factor < 8)
      throw InvalidArgument("stop_factor below 8 would let sampled centers fall outside their cover");
    layers_.emplace_back();
  }

  const SparsifierConfig& config() const { return config_; }
  int layers() const { return static_cast<int>(layers_.size()); }
  std::size_t size() const { return homes_.size(); }
  bool contains(PointId id) const { return homes_.count(id) != 0; }

  /// |U_i|, 1-based.
  std::size_t layer_size(int i) const { return layer(i).size; }
  std::size_t count(int i) const { return layer(i).count; }

  /// U_i as ascending ids.
  std::vector<PointId> layer_members(int i) const {
    std::vector<PointId> out;
    for (int j = i; j <= layers(); ++j)
      for (const PointRecord* r : layer(j).bucket) out.push_back(r->id);
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Live clusters of layer i < l, ascending by center.
  std::vector<Cluster> clusters(int i) const {
    std::vector<Cluster> out;
    for (const auto& c : layer(i).clusters)
      if (!c.members.empty()) out.push_back(Cluster{c.center, {c.members.begin(), c.members.end()}});
    std::sort(out.begin(), out.end(), [](const Cluster& a, const Cluster& b) { return a.center < b.center; });
    return out;
  }

  /// S_i as ascending ids.
  std::vector<PointId> centers(int i) const {
    std::vector<PointId> out;
    for (const auto& c : layer(i).clusters)
      if (!c.members.empty()) out.push_back(c.center);
    std::sort(out.begin(), out.end());
    return out;
  }

  SparsifierOutput output() const { return {{output_.begin(), output_.end()}, layers()}; }
  std::size_t output_size() const { return output_.size(); }
  bool in_output(PointId id) const { return output_.count(id) != 0; }

  const ReconstructReport& last_reconstruct() const { return last_; }
  const Rng& rng() const { return rng_; }

  /// The point's record must be live in the metric.
  ChangeSet insert(PointId id) {
    if (homes_.count(id)) throw InvalidState("point " + to_string(id) + " already in the sparsifier");
    const PointRecord& rec = metric_->record(id);
    const int bottom = layers();
    homes_.emplace(id, Home{bottom, kNoCluster});
    layer(bottom).bucket.insert(&rec);
    for (auto& lv : layers_) ++lv.size;
    output_.insert(id);
    ChangeSet lazy;
    lazy.added.push_back(id);
    return compose(lazy, reconstruct());
  }

  /// Call before erasing the point from the metric.
  ChangeSet erase(PointId id) {
    auto it = homes_.find(id);
    if (it == homes_.end()) throw NotFound("point " + to_string(id) + " not in the sparsifier");
    const Home home = it->second;
    homes_.erase(it);
    Layer& lv = layer(home.layer);
    lv.bucket.erase(id);
    for (int i = 1; i <= home.layer; ++i) --layer(i).size;

    ChangeSet lazy;
    if (home.cluster == kNoCluster) {
      output_.erase(id);
      lazy.removed.push_back(id);
    } else {
      ClusterState& c = lv.clusters[home.cluster];
      c.members.erase(id);
      if (c.center == id) {
        output_.erase(id);
        lazy.removed.push_back(id);
        if (!c.members.empty()) {
          c.center = *c.members.begin();
          output_.insert(c.center);
          lazy.added.push_back(c.center);
        }
      }
    }
    return compose(lazy, reconstruct());
  }

 private:
  static constexpr std::uint32_t kNoCluster = std::numeric_limits<std::uint32_t>::max();

  struct Home {
    int layer;
    std::uint32_t cluster;
  };

  struct ClusterState {
    PointId center;
    std::set<PointId> members;
  };

  struct Layer {
    PointBag bucket;  // points whose deepest layer is this one
    std::vector<ClusterState> clusters;
    std::size_t size = 0;  // |U_i|
    std::size_t count = 0;
  };

  Layer& layer(int i) { return layers_[i - 1]; }
  const Layer& layer(int i) const { return layers_[i - 1]; }

  // Counter bump and trigger scan after every lazy update.
  //
  // A triggered layer that is already small enough to be the bottom layer is
  // not peeled. If it is also below 3/4 of the stop threshold the rebuild
  // starts one layer higher instead, so the bottom layer never drifts under
  // (9/16) * stop threshold while l >= 2.
  ChangeSet reconstruct() {
    for (auto& lv : layers_) ++lv.count;
    last_ = ReconstructReport{std::nullopt, layers(), 0, {}};
    int j = 0;
    for (int i = 1; i <= layers(); ++i) {
      if (4 * layer(i).count >= layer(i).size) {
        j = i;
        break;
      }
    }
    if (j == 0) return {};
    const std::size_t stop = config_.stop_threshold();
    while (j > 1 && 4 * layer(j).size < 3 * stop) --j;
    rebuild_from(j);
    return last_.output;
  }

  void rebuild_from(int j) {
    std::vector<const PointRecord*> w;
    std::vector<PointId> old_out;
    for (int i = j; i <= layers(); ++i) {
      Layer& lv = layer(i);
      for (const PointRecord* r : lv.bucket) w.push_back(r);
      if (i == layers())
        for (const PointRecord* r : lv.bucket) old_out.push_back(r->id);
      else
        for (const auto& c : lv.clusters)
          if (!c.members.empty()) old_out.push_back(c.center);
    }
    std::sort(w.begin(), w.end(), [](auto* a, auto* b) { return a->id < b->id; });
    std::sort(old_out.begin(), old_out.end());
    layers_.resize(j);
    layer(j) = Layer{};

    const std::size_t stop = config_.stop_threshold();
    const std::size_t boost = config_.boost();
    std::vector<PointId> new_out;
    std::size_t calls = 0;
    int cur = j;
    while (w.size() > stop) {
      std::optional<CoverResult> best;
      for (std::size_t m = 0; m < boost; ++m) {
        CoverResult r = almost_cover(*metric_, w, config_.k, rng_);
        ++calls;
        if (!best || r.radius < best->radius) best = std::move(r);
      }
      Layer& lv = layer(cur);
      lv.size = w.size();
      lv.count = 0;
      for (Cluster& c : best->clusters) {
        const auto idx = static_cast<std::uint32_t>(lv.clusters.size());
        for (PointId p : c.members) {
          homes_[p] = Home{cur, idx};
          lv.bucket.insert(&metric_->record(p));
        }
        new_out.push_back(c.center);
        lv.clusters.push_back(ClusterState{c.center, {c.members.begin(), c.members.end()}});
      }
      std::vector<const PointRecord*> next;
      next.reserve(best->remainder.size());
      for (PointId p : best->remainder) next.push_back(&metric_->record(p));
      w = std::move(next);
      layers_.emplace_back();
      ++cur;
    }
    Layer& bottom = layer(cur);
    bottom.size = w.size();
    bottom.count = 0;
    for (const PointRecord* r : w) {
      homes_[r->id] = Home{cur, kNoCluster};
      bottom.bucket.insert(r);
      new_out.push_back(r->id);
    }
    std::sort(new_out.begin(), new_out.end());

    for (PointId p : old_out) output_.erase(p);
    for (PointId p : new_out) output_.insert(p);
    last_.rebuilt_from = j;
    last_.layers_after = layers();
    last_.cover_calls = calls;
    last_.output = diff_sorted(old_out, new_out);
  }

  const MetricSpace* metric_;
  SparsifierConfig config_;
  Rng rng_;
  std::vector<Layer> layers_;
  std::unordered_map<PointId, Home> homes_;
  std::set<PointId> output_;
  ReconstructReport last_;
};

}  // namespace dkc
