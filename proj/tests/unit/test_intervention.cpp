#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "helpers.hpp"
#include "isg/qvi.hpp"

using namespace isg;
using isg::test::coef;
using isg::test::make_spec;

TEST(InterventionOperator, AbsoluteValueSlice) {
    const ProblemSpec spec = make_spec({{"impulse_set", {-1.0, 1.0}},
                                        {"intervention_cost", coef("scaled-power", {0.1, 0.5, 1.0})}});
    const std::size_t nx[] = {400};
    const Grid g = build_grid(spec.domain, 4, nx);
    std::vector<double> phi(g.node_count());
    for (std::size_t n = 0; n < phi.size(); ++n) phi[n] = std::abs(g.node(n)[0]);
    const ImpulseEval m = intervention_operator(spec, g, phi, 0.0);
    const std::size_t node = g.nearest_node(Point{1.0});
    EXPECT_NEAR(m.values[node], 0.6, 1e-12);
    EXPECT_EQ(m.argmin[node], 0);  // z = -1 in canonical order
}

TEST(InterventionOperator, ConstantSliceShiftsByCheapestCost) {
    const ProblemSpec spec = make_spec({{"intervention_cost", coef("scaled-power", {0.1, 1.0, 1.0})}});
    const std::size_t nx[] = {16};
    const Grid g = build_grid(spec.domain, 4, nx);
    const std::vector<double> phi(g.node_count(), 3.0);
    const ImpulseEval m = intervention_operator(spec, g, phi, 0.5);
    // Nodes whose impulses stay in the closed box; the others exit and pay G.
    for (std::size_t n = 0; n < phi.size(); ++n) {
        if (std::abs(g.node(n)[0]) > 1.5) continue;
        EXPECT_DOUBLE_EQ(m.values[n], 3.6);
        EXPECT_GE(m.values[n], 3.0 + spec.cost_floor);
    }
}

TEST(InterventionOperator, TiesPickFirstImpulse) {
    const ProblemSpec spec = make_spec();
    const std::size_t nx[] = {16};
    const Grid g = build_grid(spec.domain, 4, nx);
    const std::vector<double> phi(g.node_count(), 0.0);
    const ImpulseEval m = intervention_operator(spec, g, phi, 0.0);
    EXPECT_EQ(m.argmin[8], 0);
}

TEST(InterventionOperator, EmptySetIsInfinite) {
    const ProblemSpec spec = make_spec({{"impulse_set", nlohmann::json::array()}});
    const std::size_t nx[] = {8};
    const Grid g = build_grid(spec.domain, 4, nx);
    const std::vector<double> phi(g.node_count(), 1.0);
    const ImpulseEval m = intervention_operator(spec, g, phi, 0.0);
    for (std::size_t n = 0; n < phi.size(); ++n) {
        EXPECT_EQ(m.values[n], std::numeric_limits<double>::infinity());
        EXPECT_EQ(m.argmin[n], -1);
    }
}

TEST(InterventionOperator, ExitPaysBequestAtCrossing) {
    const ProblemSpec spec = make_spec({{"bequest", coef("affine", {0.0, 1.0})}});
    const std::size_t nx[] = {40};
    const Grid g = build_grid(spec.domain, 4, nx);
    const std::vector<double> phi(g.node_count(), 10.0);
    const ImpulseEval m = intervention_operator(spec, g, phi, 0.0);
    // From x = 1.9, z = +0.5 leaves S through x = 2 where G = 2.
    EXPECT_NEAR(m.values[g.nearest_node(Point{1.9})], 2.1, 1e-12);
}
