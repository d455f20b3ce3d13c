#include <gtest/gtest.h>

#include <cmath>

#include "dkc/checks.hpp"
#include "dkc/oracles.hpp"
#include "dkc/pipeline.hpp"
#include "test_support.hpp"

namespace dkc {
namespace {

std::vector<UpdateEvent> random_events(Rng& rng, std::size_t n_max, std::size_t T, std::uint64_t side) {
  std::vector<UpdateEvent> out;
  std::vector<PointId> live;
  std::uint64_t next = 0;
  for (std::size_t t = 0; t < T; ++t) {
    if (live.empty() || (live.size() < n_max && unit_real(rng) < 0.6)) {
      const PointId id = point_id(next++);
      out.push_back(UpdateEvent::insert(id, testing::grid_point(rng, 2, side)));
      live.push_back(id);
    } else {
      const std::size_t pick = uniform_below(rng, live.size());
      out.push_back(UpdateEvent::erase(live[pick]));
      live[pick] = live.back();
      live.pop_back();
    }
  }
  return out;
}

PipelineConfig config(PipelineMode mode, std::size_t k) {
  PipelineConfig c;
  c.mode = mode;
  c.k = k;
  return c;
}

MetricSpace box(std::uint64_t side, std::uint64_t seed) {
  return MetricSpace::euclidean({1.0, static_cast<double>(side) * std::sqrt(2.0)}, seed);
}

TEST(Pipeline, ModeNames) {
  for (auto mode : {PipelineMode::direct, PipelineMode::sparsified, PipelineMode::buffered})
    EXPECT_EQ(parse_mode(to_string(mode)), mode);
  EXPECT_THROW(parse_mode("fast"), InvalidArgument);
}

TEST(Pipeline, EmptyReport) {
  Pipeline p(box(10, 1), config(PipelineMode::sparsified, 2));
  const PipelineReport r = p.report();
  EXPECT_TRUE(r.solution.centers.empty());
  EXPECT_EQ(r.cost, 0.0);
  EXPECT_EQ(r.metrics.steps, 0u);
  EXPECT_EQ(r.metrics.cumulative_recourse, 0u);
}

TEST(Pipeline, DirectModeIsPlainNestedKCenter) {
  Rng rng(1);
  const auto events = random_events(rng, 60, 300, 100);
  Pipeline p(box(100, 9), config(PipelineMode::direct, 3));
  auto m = box(100, 9);
  NestedKCenter kc(m, 3);
  for (const UpdateEvent& e : events) {
    const PipelineStepReport step = p.apply(e);
    StepReport r;
    if (e.kind == UpdateEvent::Kind::insert) {
      admit_event(m, e);
      r = kc.insert(e.id);
    } else {
      r = kc.erase(e.id);
      m.erase(e.id);
    }
    ASSERT_EQ(step.reported, r.solution);
    ASSERT_EQ(p.kcenter().centers(), kc.centers());
  }
}

TEST(Pipeline, RecourseCounterIsSumOfReportedSteps) {
  Rng rng(2);
  for (auto mode : {PipelineMode::direct, PipelineMode::sparsified, PipelineMode::buffered}) {
    PipelineConfig cfg = config(mode, 2);
    cfg.sparsifier.stop_factor = 8;
    Pipeline p(box(200, 3), cfg);
    std::size_t sum = 0;
    for (const UpdateEvent& e : random_events(rng, 100, 500, 200)) sum += p.apply(e).reported.size();
    EXPECT_EQ(p.metrics().cumulative_recourse, sum);
    EXPECT_EQ(p.report().metrics.cumulative_recourse, sum);
  }
}

TEST(Pipeline, UnknownDeleteThrows) {
  Pipeline p(box(10, 1), config(PipelineMode::direct, 1));
  EXPECT_THROW(p.apply(UpdateEvent::erase(point_id(3))), NotFound);
}

// Tiny instances in both sparsified modes: subset chain, triangle composition,
// ratio 20 against exact OPT, and the subset-OPT bound on U.
TEST(PipelineProperty, TinySparsifiedInstances) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    Rng rng(seed);
    const std::size_t k = 1 + uniform_below(rng, 3);
    PipelineConfig cfg = config(seed % 2 ? PipelineMode::sparsified : PipelineMode::buffered, k);
    cfg.epsilon = 1.0;
    cfg.sparsifier.stop_factor = 8;
    Pipeline p(box(30, seed), cfg);
    for (const UpdateEvent& e : random_events(rng, 12, 30, 30)) {
      const PipelineStepReport step = p.apply(e);
      EXPECT_LE(step.reported.size(), 2 * k);
      checks::Failures f;
      checks::check_pipeline(p, f);
      const auto v = p.metric().ids();
      const auto u = p.space();
      const double opt = oracles::opt_k_exact(p.metric(), v, k).value;
      f.expect(cl(p.metric(), p.kcenter().centers(), v) <= 20.0 * opt, "ratio above 20");
      if (!u.empty()) checks::check_subset_opt(p.metric(), v, u, k, f);
      ASSERT_TRUE(f.ok()) << "seed " << seed << ": " << f.messages.front();
    }
  }
}

TEST(PipelineProperty, BufferedResetsAreSuppressed) {
  Rng rng(7);
  PipelineConfig cfg = config(PipelineMode::buffered, 2);
  cfg.epsilon = 0.5;
  cfg.sparsifier.n_max = 800;
  auto m = box(400, 7);
  m.set_bounds_check(false);
  Pipeline p(std::move(m), cfg);
  std::size_t resets = 0, lazy_forwarded = 0, steps = 0;
  for (const UpdateEvent& e : random_events(rng, 800, 4000, 400)) {
    const PipelineStepReport step = p.apply(e);
    ++steps;
    if (step.reset) {
      ++resets;
      EXPECT_LE(step.reported.size(), 2 * cfg.k);
      EXPECT_EQ(p.space(), p.buffered()->inner().output().points);
    } else {
      lazy_forwarded += step.forwarded;
    }
  }
  EXPECT_EQ(resets, steps / p.buffered()->epoch_length());
  EXPECT_LE(lazy_forwarded, 2 * steps);
}

}  // namespace
}  // namespace dkc
