#include <gtest/gtest.h>

#include <vector>

#include "helpers.hpp"
#include "isg/errors.hpp"
#include "isg/grid.hpp"

using namespace isg;

TEST(Grid, OneDimensionalCounts) {
    const ProblemSpec spec = isg::test::make_spec();
    const std::size_t nx[] = {8};
    const Grid g = build_grid(spec.domain, 10, nx);
    EXPECT_DOUBLE_EQ(g.dt(), 0.1);
    EXPECT_DOUBLE_EQ(g.step(0), 0.5);
    EXPECT_EQ(g.node_count(), 9u);
    EXPECT_EQ(g.slices(), 11u);
}

TEST(Grid, MinimalMesh) {
    const ProblemSpec spec = isg::test::make_spec();
    const std::size_t nx[] = {4};
    const Grid g = build_grid(spec.domain, 1, nx);
    EXPECT_EQ(g.slices(), 2u);
    EXPECT_EQ(g.time(0), 0.0);
    EXPECT_EQ(g.time(1), 1.0);
}

TEST(Grid, TensorCountsAndIndexing) {
    DomainSpec d{Point{0.0, 0.0}, Point{1.0, 2.0}, 1.0};
    const std::size_t nx[] = {2, 4};
    const Grid g = build_grid(d, 5, nx);
    EXPECT_EQ(g.points(0), 3u);
    EXPECT_EQ(g.points(1), 5u);
    EXPECT_EQ(g.node_count(), 15u);
    for (std::size_t n = 0; n < g.node_count(); ++n) {
        const auto c = g.coords(n);
        EXPECT_EQ(g.index(std::span<const std::size_t>(c.data(), 2)), n);
    }
    EXPECT_TRUE(g.is_boundary(0));
    EXPECT_FALSE(g.is_boundary(g.index(std::vector<std::size_t>{1, 2})));
}

TEST(Grid, BroadcastSingleCount) {
    DomainSpec d{Point{0.0, 0.0}, Point{1.0, 2.0}, 1.0};
    const std::size_t nx[] = {4};
    EXPECT_EQ(build_grid(d, 2, nx).node_count(), 25u);
}

TEST(Grid, ZeroCountsRejected) {
    const ProblemSpec spec = isg::test::make_spec();
    const std::size_t nx[] = {8};
    const std::size_t bad[] = {0};
    EXPECT_THROW(build_grid(spec.domain, 0, nx), ArityError);
    EXPECT_THROW(build_grid(spec.domain, 4, bad), ArityError);
}

TEST(Grid, InterpolationAndNearest) {
    const ProblemSpec spec = isg::test::make_spec();
    const std::size_t nx[] = {4};
    const Grid g = build_grid(spec.domain, 4, nx);
    const std::vector<double> slice = {-2, -1, 0, 1, 2};
    EXPECT_DOUBLE_EQ(g.interpolate(slice, Point{0.25}), 0.25);
    EXPECT_DOUBLE_EQ(g.interpolate(slice, Point{5.0}), 2.0);
    EXPECT_EQ(g.nearest_node(Point{0.6}), 3u);
    EXPECT_EQ(g.nearest_slice(0.6), 2u);
}
