#include <gtest/gtest.h>

#include "dkc/metric.hpp"
#include "test_support.hpp"

namespace dkc {
namespace {

using testing::add_line;
using testing::plane;

TEST(MetricSpace, DistanceToSelfIsZero) {
  auto m = plane();
  m.insert(point_id(1), {3.0, 4.0});
  EXPECT_EQ(m.distance(point_id(1), point_id(1)), 0.0);
}

TEST(MetricSpace, EuclideanPythagoras) {
  auto m = plane();
  m.insert(point_id(1), {0.0, 0.0});
  m.insert(point_id(2), {3.0, 4.0});
  EXPECT_EQ(m.distance(point_id(1), point_id(2)), 5.0);
}

TEST(MetricSpace, L1Distance) {
  auto m = MetricSpace::euclidean({1.0, 64.0}, 1, 1.0);
  m.insert(point_id(1), {0.0, 0.0});
  m.insert(point_id(2), {3.0, 4.0});
  EXPECT_EQ(m.distance(point_id(1), point_id(2)), 7.0);
}

TEST(MetricSpace, ExplicitMatrixIsSymmetric) {
  auto d = DistanceMatrix::from_rows({{0, 7, 4}, {7, 0, 5}, {4, 5, 0}});
  auto m = MetricSpace::explicit_matrix(d, {1.0, 10.0}, 1);
  m.insert_row(point_id(1), 1);
  m.insert_row(point_id(2), 2);
  m.insert_row(point_id(0), 0);
  EXPECT_EQ(m.distance(point_id(0), point_id(1)), 7.0);
  EXPECT_EQ(m.distance(point_id(1), point_id(0)), 7.0);
}

TEST(MetricSpace, ExplicitMatrixRejectsNonMetric) {
  auto d = DistanceMatrix::from_rows({{0, 1, 10}, {1, 0, 1}, {10, 1, 0}});
  EXPECT_THROW(MetricSpace::explicit_matrix(d, {1.0, 10.0}, 1), InvalidArgument);
}

TEST(MetricSpace, UnknownIdThrows) {
  auto m = plane();
  m.insert(point_id(1), {0.0});
  EXPECT_THROW(m.distance(point_id(1), point_id(9)), NotFound);
  EXPECT_THROW(m.record(point_id(9)), NotFound);
  EXPECT_THROW(m.erase(point_id(9)), NotFound);
}

TEST(MetricSpace, DuplicateInsertThrows) {
  auto m = plane();
  m.insert(point_id(1), {0.0});
  EXPECT_THROW(m.insert(point_id(1), {2.0}), InvalidState);
}

TEST(MetricSpace, BoundsViolationsRejected) {
  auto m = plane(1.0, 10.0);
  m.insert(point_id(1), {0.0});
  EXPECT_THROW(m.insert(point_id(2), {0.5}), BoundsViolation);
  EXPECT_THROW(m.insert(point_id(3), {11.0}), BoundsViolation);
  EXPECT_NO_THROW(m.insert(point_id(4), {0.0}));  // coincident points are legal
  EXPECT_NO_THROW(m.insert(point_id(5), {10.0}));
  EXPECT_FALSE(m.contains(point_id(2)));
}

TEST(MetricSpace, DimensionMismatchRejected) {
  auto m = plane();
  m.insert(point_id(1), {0.0, 0.0});
  EXPECT_THROW(m.insert(point_id(2), {1.0}), InvalidArgument);
}

TEST(MetricSpace, BadBoundsRejected) {
  EXPECT_THROW(MetricSpace::euclidean({0.0, 1.0}, 1), InvalidArgument);
  EXPECT_THROW(MetricSpace::euclidean({2.0, 1.0}, 1), InvalidArgument);
}

TEST(MetricSpace, SeqIncreasesAndPrioritiesAreSeeded) {
  auto a = plane(1.0, 64.0, 42);
  auto b = plane(1.0, 64.0, 42);
  add_line(a, {0, 1, 2, 3});
  add_line(b, {0, 1, 2, 3});
  a.erase(point_id(1));
  a.insert(point_id(7), {5.0});
  EXPECT_LT(a.record(point_id(3)).seq, a.record(point_id(7)).seq);
  for (std::uint64_t i : {0, 2, 3}) EXPECT_EQ(a.record(point_id(i)).priority, b.record(point_id(i)).priority);
  for (std::uint64_t i : {0, 2, 3, 7}) {
    EXPECT_GE(a.record(point_id(i)).priority, 0.0);
    EXPECT_LT(a.record(point_id(i)).priority, 1.0);
  }
}

TEST(MetricSpace, IdsAreSorted) {
  auto m = plane();
  add_line(m, {0, 1, 2}, 10);
  m.insert(point_id(3), {5.0});
  EXPECT_EQ(m.ids(), (std::vector<PointId>{point_id(3), point_id(10), point_id(11), point_id(12)}));
}

TEST(Cl, SpaceEqualsCenters) {
  auto m = plane();
  auto ids = add_line(m, {0, 1, 10, 11});
  EXPECT_EQ(cl(m, ids, ids), 0.0);
}

TEST(Cl, LineExamples) {
  auto m = plane(1.0, 16.0);
  auto ids = add_line(m, {0, 1, 10, 11});
  std::vector<PointId> two{ids[1], ids[2]}, one{ids[0]};
  EXPECT_EQ(cl(m, two, ids), 1.0);
  EXPECT_EQ(cl(m, one, ids), 11.0);
}

TEST(Cl, EmptyCentersThrow) {
  auto m = plane();
  auto ids = add_line(m, {0, 1});
  EXPECT_THROW(cl(m, {}, ids), InvalidArgument);
  EXPECT_EQ(cl(m, {}, {}), 0.0);
}

TEST(Ball, Examples) {
  auto m = plane(1.0, 16.0);
  auto ids = add_line(m, {0, 1, 10});
  EXPECT_EQ(ball(m, ids[0], 1.0, ids), (std::vector<PointId>{ids[0], ids[1]}));
  EXPECT_EQ(ball(m, ids[0], 16.0, ids), ids);
  m.insert(point_id(9), {0.0});
  std::vector<PointId> all = m.ids();
  EXPECT_EQ(ball(m, ids[0], 0.0, all), (std::vector<PointId>{ids[0], point_id(9)}));
}

TEST(MetricViolation, DetectsBrokenTriangle) {
  auto d = DistanceMatrix::from_rows({{0, 1, 1, 1}, {1, 0, 1, 10}, {1, 1, 0, 1}, {1, 10, 1, 0}});
  auto v = find_metric_violation(d);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->kind, MetricViolation::Kind::triangle);
}

TEST(MetricViolation, UniformMetricIsFine) {
  std::vector<std::vector<double>> rows(5, std::vector<double>(5, 1.0));
  for (int i = 0; i < 5; ++i) rows[i][i] = 0.0;
  EXPECT_FALSE(find_metric_violation(DistanceMatrix::from_rows(rows)));
}

// Property: triangle inequality and cl monotonicity on random Euclidean sets.
TEST(MetricProperties, TriangleAndMonotoneCl) {
  Rng rng(5);
  auto m = MetricSpace::euclidean({1.0, 100.0 * std::sqrt(3.0)}, 3);
  std::vector<PointId> ids;
  for (std::uint64_t i = 0; i < 40; ++i) {
    m.insert(point_id(i), testing::grid_point(rng, 3, 100));
    ids.push_back(point_id(i));
  }
  for (PointId x : ids)
    for (PointId y : ids)
      for (PointId z : ids)
        ASSERT_LE(m.distance(x, z), (m.distance(x, y) + m.distance(y, z)) * (1 + 1e-9));
  std::vector<PointId> centers{ids[0]};
  double prev = cl(m, centers, ids);
  for (std::size_t i = 1; i < 10; ++i) {
    centers.push_back(ids[i]);
    const double now = cl(m, centers, ids);
    EXPECT_LE(now, prev);
    prev = now;
  }
  std::vector<PointId> smaller(ids.begin(), ids.end() - 5);
  EXPECT_LE(cl(m, centers, smaller), cl(m, centers, ids));
}

}  // namespace
}  // namespace dkc
