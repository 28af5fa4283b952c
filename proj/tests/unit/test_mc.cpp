#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "isg/mc.hpp"
#include "isg/spec_io.hpp"

using namespace isg;

namespace {

ProblemSpec spec_file(const char* name) {
    return load_spec_file(std::string(ISG_SPEC_DIR) + "/" + name + ".json");
}

ValueField solve1(const ProblemSpec& spec, std::size_t nt, std::size_t nx) {
    const std::size_t n[] = {nx};
    return solve_qvi(spec, build_grid(spec.domain, nt, n));
}

}  // namespace

TEST(EstimateValue, ConstantGameIsExact) {
    const ProblemSpec spec = spec_file("constant_game");
    const ValueField f = solve1(spec, 20, 20);
    const PolicyPair p = extract_policy(spec, f, default_act_tol(f));
    const ValueEstimate e = estimate_value(spec, p.controller, p.stopper, 0.0, Point{0.0}, 200, 1e-2, 5);
    EXPECT_DOUBLE_EQ(e.mean, 1.5);
    EXPECT_DOUBLE_EQ(e.std_error, 0.0);
    EXPECT_DOUBLE_EQ(e.stop_fraction, 1.0);
}

TEST(EstimateValue, SeededReproducible) {
    const ProblemSpec spec = spec_file("canonical_game");
    const ValueEstimate a = estimate_value(spec, {}, never_stop(), 0.0, Point{0.0}, 300, 1e-2, 77);
    const ValueEstimate b = estimate_value(spec, {}, never_stop(), 0.0, Point{0.0}, 300, 1e-2, 77);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std_error, b.std_error);
    EXPECT_EQ(a.to_json(), b.to_json());
}

TEST(EstimateValue, CanonicalGameCloses) {
    const ProblemSpec spec = spec_file("canonical_game");
    const ValueField f = solve1(spec, 200, 200);
    const PolicyPair p = extract_policy(spec, f, default_act_tol(f));
    const double v = f.value(0, f.grid.nearest_node(Point{0.0}));
    const ValueEstimate e = estimate_value(spec, p.controller, p.stopper, 0.0, Point{0.0}, 4000, 1e-3, 2024);
    EXPECT_LE(std::abs(e.mean - v), 3 * e.std_error + kDefaultBiasSlack);
    const ValueEstimate dev = estimate_value(spec, p.controller.as_controller(), never_stop(), 0.0,
                                             Point{0.0}, 4000, 1e-3, 2024);
    EXPECT_LE(dev.mean, v + 3 * dev.std_error + kDefaultBiasSlack);
}

TEST(Stoppers, Basics) {
    EXPECT_FALSE(never_stop()(0.3, Point{0.0}));
    EXPECT_TRUE(stop_immediately()(0.3, Point{0.0}));
    const StopRule r = random_stopper(0.5, 9);
    EXPECT_EQ(r(0.25, Point{0.1}), r(0.25, Point{0.1}));
    std::size_t hits = 0;
    for (int i = 0; i < 2000; ++i) hits += r(0.001 * i, Point{0.1});
    EXPECT_NEAR(static_cast<double>(hits) / 2000.0, 0.5, 0.05);
}

TEST(RegularityProbe, ConstantFieldIsFlat) {
    const ProblemSpec spec = spec_file("constant_game");
    ValueField f = solve1(spec, 10, 10);
    std::fill(f.values.begin(), f.values.end(), 1.5);
    const RegularityReport r = regularity_probe(f);
    EXPECT_EQ(r.lipschitz_x, 0.0);
    EXPECT_EQ(r.holder_t, 0.0);
}

TEST(RegularityProbe, InheritsObstacleConstant) {
    const ProblemSpec spec = spec_file("pure_stopping");
    ValueField f = solve1(spec, 20, 40);
    f.values = f.bequest;
    const RegularityReport r = regularity_probe(f);
    EXPECT_LE(r.lipschitz_x, 1.0 + f.grid.step(0));
    EXPECT_NEAR(r.lipschitz_x, 1.0, 1e-12);
    EXPECT_EQ(r.holder_t, 0.0);
}
