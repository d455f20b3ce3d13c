#include <gtest/gtest.h>

#include <cmath>

#include "dkc/checks.hpp"
#include "dkc/mp_sparsifier.hpp"
#include "dkc/oracles.hpp"
#include "test_support.hpp"

namespace dkc {
namespace {

std::vector<const PointRecord*> records(const MetricSpace& m) {
  std::vector<const PointRecord*> w;
  for (PointId id : m.ids()) w.push_back(&m.record(id));
  return w;
}

MetricSpace random_plane(std::size_t n, std::uint64_t seed, std::uint64_t side = 1000) {
  Rng rng(seed);
  auto m = MetricSpace::euclidean({1.0, static_cast<double>(side) * std::sqrt(2.0)}, seed);
  m.set_bounds_check(false);
  for (std::uint64_t i = 0; i < n; ++i) m.insert(point_id(i), testing::grid_point(rng, 2, side));
  return m;
}

TEST(AlmostCover, EightPointsOneCenterPair) {
  auto m = random_plane(8, 1);
  Rng rng(3);
  const auto w = records(m);
  const CoverResult r = almost_cover(m, w, 1, rng);
  EXPECT_EQ(r.centers.size(), 2u);
  EXPECT_EQ(r.covered.size(), 2u);
  EXPECT_EQ(r.remainder.size(), 6u);
}

TEST(AlmostCover, SmallSetCoversItself) {
  auto m = random_plane(6, 2);
  Rng rng(4);
  const auto w = records(m);
  const CoverResult r = almost_cover(m, w, 3, rng);
  EXPECT_EQ(r.centers.size(), 6u);
  EXPECT_EQ(r.covered.size(), 1u);
  EXPECT_EQ(r.radius, 0.0);
  ASSERT_EQ(r.clusters.size(), 1u);
  EXPECT_EQ(r.clusters[0].members, std::vector<PointId>{r.clusters[0].center});
}

TEST(AlmostCover, EmptyThrows) {
  auto m = random_plane(1, 1);
  Rng rng(1);
  EXPECT_THROW(almost_cover(m, {}, 1, rng), InvalidArgument);
}

TEST(AlmostCover, ClustersPartitionCover) {
  auto m = random_plane(200, 5);
  Rng rng(6);
  const CoverResult r = almost_cover(m, records(m), 3, rng);
  EXPECT_EQ(r.covered.size(), 50u);
  std::vector<PointId> all;
  for (const Cluster& c : r.clusters) {
    EXPECT_TRUE(std::binary_search(c.members.begin(), c.members.end(), c.center));
    all.insert(all.end(), c.members.begin(), c.members.end());
  }
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, r.covered);
  for (PointId x : r.covered) EXPECT_LE(distance_to_set(m, x, r.centers), r.radius);
  for (PointId x : r.remainder) EXPECT_GE(distance_to_set(m, x, r.centers), r.radius);
}

// k unit-diameter blobs far apart: a single call covers within mu_k^{1/2}
// often enough (success probability bound about 0.088).
TEST(AlmostCover, SuccessFrequencyOnBlobs) {
  const std::size_t k = 3, per_blob = 40;
  auto m = MetricSpace::euclidean({0.25, 1000.0}, 1);
  std::vector<double> xs;
  std::uint64_t id = 0;
  for (std::size_t b = 0; b < k; ++b)
    for (std::size_t j = 0; j < per_blob; ++j) {
      const double x = 100.0 * static_cast<double>(b) + 0.25 * static_cast<double>(j % 5);
      xs.push_back(x);
      m.insert(point_id(id++), {x});
    }
  const double mu = oracles::mu_k_beta_line(xs, k, 0.5);
  EXPECT_EQ(mu, 0.5);  // three runs of 3 locations (24 points each) reach half of 120
  const auto w = records(m);
  Rng rng(11);
  std::size_t hits = 0;
  const std::size_t trials = 1000;
  for (std::size_t t = 0; t < trials; ++t) hits += almost_cover(m, w, k, rng).radius <= mu;
  EXPECT_GE(static_cast<double>(hits) / trials, 0.08);
}

TEST(MpSparsifier, ConfigErrors) {
  auto m = random_plane(1, 1);
  EXPECT_THROW(MpSparsifier(m, SparsifierConfig{0}), InvalidArgument);
  SparsifierConfig c{1};
  c.stop_factor = 4;
  EXPECT_THROW(MpSparsifier(m, c), InvalidArgument);
}

TEST(MpSparsifier, BoostCount) {
  SparsifierConfig c{1};
  c.n_max = 1024;
  EXPECT_EQ(c.boost(), 20u);
  c.n_max = 1;
  EXPECT_EQ(c.boost(), 1u);
}

TEST(MpSparsifier, SmallSpaceIsItsOwnOutput) {
  auto m = random_plane(16, 7);
  MpSparsifier sp(m, SparsifierConfig{1});
  for (PointId id : m.ids()) {
    const ChangeSet c = sp.insert(id);
    EXPECT_LE(c.size(), 1u);
  }
  EXPECT_EQ(sp.layers(), 1);
  EXPECT_EQ(sp.output().points, m.ids());
}

TEST(MpSparsifier, FifthInsertDoesNotRebuild) {
  auto m = random_plane(5, 8);
  MpSparsifier sp(m, SparsifierConfig{1});
  for (std::uint64_t i = 0; i < 4; ++i) {
    sp.insert(point_id(i));
    EXPECT_EQ(sp.last_reconstruct().rebuilt_from, 1);  // 4 * 1 >= size
  }
  sp.insert(point_id(4));
  EXPECT_FALSE(sp.last_reconstruct().rebuilt_from);
  EXPECT_EQ(sp.count(1), 1u);
}

TEST(MpSparsifier, InsertBumpsEveryCounter) {
  auto m = random_plane(400, 9);
  MpSparsifier sp(m, SparsifierConfig{1});
  auto ids = m.ids();
  for (std::size_t i = 0; i + 1 < ids.size(); ++i) sp.insert(ids[i]);
  ASSERT_GE(sp.layers(), 2);
  std::vector<std::size_t> before;
  for (int i = 1; i <= sp.layers(); ++i) before.push_back(sp.count(i));
  MpSparsifier trial = sp;
  const ChangeSet c = trial.insert(ids.back());
  if (!trial.last_reconstruct().rebuilt_from) {
    for (int i = 1; i <= trial.layers(); ++i) EXPECT_EQ(trial.count(i), before[i - 1] + 1);
    EXPECT_EQ(c.added, std::vector<PointId>{ids.back()});
    EXPECT_TRUE(c.removed.empty());
  }
}

// Tries each lazy deletion rule on a copy of a built structure, skipping
// copies where the deletion also triggers a rebuild.
TEST(MpSparsifier, LazyDeletionRules) {
  auto m = random_plane(600, 10);
  MpSparsifier sp(m, SparsifierConfig{2});
  for (PointId id : m.ids()) sp.insert(id);
  ASSERT_GE(sp.layers(), 2);
  bool center_two = false, center_alone = false, member = false;
  for (int i = 1; i < sp.layers(); ++i) {
    for (const Cluster& c : sp.clusters(i)) {
      std::vector<PointId> rest;
      for (PointId p : c.members)
        if (p != c.center) rest.push_back(p);
      MpSparsifier trial = sp;
      const ChangeSet got = trial.erase(c.center);
      if (trial.last_reconstruct().rebuilt_from) continue;
      if (rest.size() == 2) {
        EXPECT_EQ(got.removed, std::vector<PointId>{c.center});
        EXPECT_EQ(got.added, std::vector<PointId>{rest.front()});
        center_two = true;
      }
      if (rest.empty()) {
        EXPECT_EQ(got.removed, std::vector<PointId>{c.center});
        EXPECT_TRUE(got.added.empty());
        center_alone = true;
      }
      if (!rest.empty()) {
        MpSparsifier again = sp;
        const ChangeSet none = again.erase(rest.back());
        if (!again.last_reconstruct().rebuilt_from) {
          EXPECT_TRUE(none.empty());
          member = true;
        }
      }
    }
  }
  EXPECT_TRUE(center_two);
  EXPECT_TRUE(center_alone);
  EXPECT_TRUE(member);
}

TEST(MpSparsifier, Errors) {
  auto m = random_plane(3, 1);
  MpSparsifier sp(m, SparsifierConfig{1});
  sp.insert(point_id(0));
  EXPECT_THROW(sp.insert(point_id(0)), InvalidState);
  EXPECT_THROW(sp.erase(point_id(2)), NotFound);
}

TEST(StaticLayers, HundredPointsDecayByQuarters) {
  auto m = random_plane(100, 12);
  Rng rng(1);
  const auto ids = m.ids();
  const auto s = oracles::static_mettu_plaxton(m, ids, 1, 4, 16, rng);
  std::vector<std::size_t> sizes;
  for (const auto& u : s.layers) sizes.push_back(u.size());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{100, 75, 57, 43, 33, 25, 19, 15}));
  EXPECT_LE(s.output.size(), 2 * (s.layers.size() - 1) + 16);
}

// Right after a rebuild from layer 1 the dynamic output equals the static pass
// replayed with the same generator state.
TEST(MpSparsifier, RebuildFromTopMatchesStaticPass) {
  auto m = random_plane(3000, 13);
  SparsifierConfig cfg{2};
  cfg.n_max = 3000;
  MpSparsifier sp(m, cfg);
  int matched = 0;
  for (PointId id : m.ids()) {
    const Rng before = sp.rng();
    sp.insert(id);
    if (sp.last_reconstruct().rebuilt_from != 1 || sp.size() <= cfg.stop_threshold()) continue;
    std::vector<PointId> live;
    for (PointId p : m.ids())
      if (sp.contains(p)) live.push_back(p);
    Rng replay = before;
    const auto s = oracles::static_mettu_plaxton(m, live, cfg.k, cfg.boost(), cfg.stop_threshold(), replay);
    ASSERT_EQ(static_cast<int>(s.layers.size()), sp.layers());
    for (int i = 1; i <= sp.layers(); ++i) ASSERT_EQ(sp.layer_members(i), s.layers[i - 1]);
    ASSERT_EQ(sp.output().points, s.output);
    ++matched;
  }
  EXPECT_GE(matched, 2);
}

// Property: layer invariants after every update of a mixed stream.
TEST(MpSparsifierProperty, InvariantsOnMixedStream) {
  Rng rng(14);
  auto m = MetricSpace::euclidean({1.0, 300.0 * std::sqrt(2.0)}, 14);
  m.set_bounds_check(false);
  SparsifierConfig cfg{1};
  cfg.stop_factor = 8;
  cfg.n_max = 400;
  MpSparsifier sp(m, cfg);
  std::vector<PointId> live;
  std::uint64_t next = 0;
  for (int step = 0; step < 3000; ++step) {
    if (live.size() < 400 && (live.size() < 200 || unit_real(rng) < 0.5)) {
      const PointId id = point_id(next++);
      m.insert(id, testing::grid_point(rng, 2, 300));
      sp.insert(id);
      live.push_back(id);
    } else {
      const std::size_t pick = uniform_below(rng, live.size());
      sp.erase(live[pick]);
      m.erase(live[pick]);
      live[pick] = live.back();
      live.pop_back();
    }
    checks::Failures f;
    checks::check_sparsifier(sp, m.ids(), f);
    ASSERT_TRUE(f.ok()) << "step " << step << ": " << f.messages.front();
  }
}

TEST(MpSparsifierProperty, AmortizedRecourseBounded) {
  Rng rng(15);
  auto m = MetricSpace::euclidean({1.0, 1000.0 * std::sqrt(2.0)}, 15);
  m.set_bounds_check(false);
  SparsifierConfig cfg{5};
  cfg.n_max = 2000;
  MpSparsifier sp(m, cfg);
  std::vector<PointId> live;
  std::uint64_t next = 0;
  std::size_t total = 0;
  const std::size_t T = 100000;
  for (std::size_t t = 0; t < T; ++t) {
    if (live.size() < 2000 && (live.size() < 1000 || unit_real(rng) < 0.5)) {
      const PointId id = point_id(next++);
      m.insert(id, testing::grid_point(rng, 2, 1000));
      total += sp.insert(id).size();
      live.push_back(id);
    } else {
      const std::size_t pick = uniform_below(rng, live.size());
      total += sp.erase(live[pick]).size();
      m.erase(live[pick]);
      live[pick] = live.back();
      live.pop_back();
    }
  }
  EXPECT_LE(static_cast<double>(total) / T, 10.0);
}

}  // namespace
}  // namespace dkc
