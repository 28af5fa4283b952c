#include "isg/payoff.hpp"

#include <cmath>
#include <vector>

#include "isg/errors.hpp"
#include "parallel.hpp"

namespace isg {

PayoffBreakdown evaluate_payoff(const ProblemSpec& spec, const PathOutcome& outcome) {
    const auto& tr = outcome.trajectory;
    if (tr.empty()) throw ArityError("evaluate_payoff: empty trajectory");
    if (outcome.end_state.size() != spec.dim() || tr.front().state.size() != spec.dim())
        throw DimensionError("evaluate_payoff: outcome dimension does not match the problem");

    PayoffBreakdown out;
    for (std::size_t k = 1; k < tr.size(); ++k) {
        const auto& a = tr[k - 1];
        const auto& b = tr[k];
        if (a.time >= outcome.effective_end) break;
        // the left end uses the post-action state, the right end the arrival state
        out.running += 0.5 * (b.time - a.time) *
                       (spec.running_cost.scalar(a.time, a.state) +
                        spec.running_cost.scalar(b.time, b.pre));
    }
    for (const auto& e : outcome.schedule.events)
        if (e.time <= outcome.effective_end) out.intervention += e.cost;
    out.bequest = spec.bequest.scalar(outcome.effective_end, outcome.end_state);
    out.total = out.running + out.intervention + out.bequest;
    return out;
}

BatchPayoff batch_payoff(std::span<const PayoffBreakdown> payoffs) {
    const std::size_t n = payoffs.size();
    if (n < 2) throw ArityError("batch_payoff needs at least two outcomes");
    std::vector<double> col(n);
    auto mean_of = [&](auto field) {
        for (std::size_t i = 0; i < n; ++i) col[i] = payoffs[i].*field;
        return detail::pairwise_sum(col.data(), n) / static_cast<double>(n);
    };
    BatchPayoff out;
    out.n = n;
    out.mean = mean_of(&PayoffBreakdown::total);
    out.breakdown_means.running = mean_of(&PayoffBreakdown::running);
    out.breakdown_means.intervention = mean_of(&PayoffBreakdown::intervention);
    out.breakdown_means.bequest = mean_of(&PayoffBreakdown::bequest);
    out.breakdown_means.total = out.mean;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = payoffs[i].total - out.mean;
        col[i] = d * d;
    }
    const double var = detail::pairwise_sum(col.data(), n) / static_cast<double>(n - 1);
    out.std_error = std::sqrt(var / static_cast<double>(n));
    return out;
}

BatchPayoff batch_payoff(const ProblemSpec& spec, std::span<const PathOutcome> outcomes) {
    if (outcomes.size() < 2) throw ArityError("batch_payoff needs at least two outcomes");
    std::vector<PayoffBreakdown> payoffs;
    payoffs.reserve(outcomes.size());
    for (const auto& o : outcomes) payoffs.push_back(evaluate_payoff(spec, o));
    return batch_payoff(payoffs);
}

nlohmann::json BatchPayoff::to_json() const {
    return {{"mean", mean},
            {"std_error", std_error},
            {"n", n},
            {"running_mean", breakdown_means.running},
            {"intervention_mean", breakdown_means.intervention},
            {"bequest_mean", breakdown_means.bequest}};
}

}  // namespace isg
