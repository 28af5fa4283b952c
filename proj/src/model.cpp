#include "isg/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <json.hpp>

#include "isg/errors.hpp"

namespace isg {

bool DomainSpec::contains(const Point& x) const {
    for (std::size_t i = 0; i < dim(); ++i)
        if (!(x[i] > lower[i] && x[i] < upper[i])) return false;
    return true;
}

bool DomainSpec::contains_closed(const Point& x) const {
    for (std::size_t i = 0; i < dim(); ++i)
        if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
    return true;
}

Point DomainSpec::boundary_crossing(const Point& inside, const Point& target) const {
    if (contains_closed(target)) return target;
    double s = 1.0;
    for (std::size_t i = 0; i < dim(); ++i) {
        const double d = target[i] - inside[i];
        if (target[i] > upper[i] && d > 0.0) s = std::min(s, (upper[i] - inside[i]) / d);
        if (target[i] < lower[i] && d < 0.0) s = std::min(s, (lower[i] - inside[i]) / d);
    }
    s = std::clamp(s, 0.0, 1.0);
    Point out = inside + s * (target - inside);
    // pin to the face against rounding
    for (std::size_t i = 0; i < dim(); ++i) out[i] = std::clamp(out[i], lower[i], upper[i]);
    return out;
}

ImpulseSet::ImpulseSet(std::vector<Point> impulses) : impulses_(std::move(impulses)) {
    std::sort(impulses_.begin(), impulses_.end());
    for (std::size_t i = 0; i < impulses_.size(); ++i) {
        if (impulses_[i].size() != impulses_.front().size())
            throw ValidationError("impulse set mixes dimensions");
        if (i > 0 && impulses_[i] == impulses_[i - 1])
            throw ValidationError("impulse set contains duplicate entries");
    }
}

std::optional<std::size_t> ImpulseSet::index_of(const Point& z) const {
    for (std::size_t i = 0; i < impulses_.size(); ++i) {
        const Point& w = impulses_[i];
        if (w.size() != z.size()) continue;
        bool same = true;
        for (std::size_t j = 0; j < z.size() && same; ++j)
            same = std::abs(w[j] - z[j]) <= 1e-12 * (1.0 + std::abs(w[j]));
        if (same) return i;
    }
    return std::nullopt;
}

Point ImpulseResponse::apply(const Point& x, const Point& z) const {
    if (kind == ImpulseResponseKind::translation) return x + z;
    return state_map.apply(x) + impulse_map.apply(z);
}

Point impulse_response(const ProblemSpec& spec, const Point& x, const Point& z) {
    if (x.size() != spec.dim() || z.size() != spec.dim())
        throw DimensionError("impulse_response: dimension mismatch");
    if (!spec.impulses.contains(z)) throw DomainError("impulse is not a member of the impulse set");
    return spec.response.apply(x, z);
}

const CheckEntry* ValidationReport::find(std::string_view name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

bool ValidationReport::all_pass() const {
    return std::none_of(checks.begin(), checks.end(),
                        [](const CheckEntry& c) { return c.status == CheckStatus::fail; });
}

nlohmann::json ValidationReport::to_json() const {
    auto status_name = [](CheckStatus s) {
        switch (s) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::fail: return "fail";
        case CheckStatus::skipped: return "skipped";
        }
        return "pass";
    };
    nlohmann::json out = nlohmann::json::object();
    out["all_pass"] = all_pass();
    auto& list = out["checks"] = nlohmann::json::array();
    for (const auto& c : checks)
        list.push_back({{"name", c.name},
                        {"status", status_name(c.status)},
                        {"value", c.value},
                        {"detail", c.detail}});
    return out;
}

namespace {

std::vector<Point> probe_points(const DomainSpec& domain, std::size_t n, std::uint64_t seed) {
    std::vector<Point> pts;
    pts.reserve(n);
    if (domain.dim() == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            const double s = static_cast<double>(i) / static_cast<double>(n - 1);
            pts.push_back(Point{domain.lower[0] + s * (domain.upper[0] - domain.lower[0])});
        }
        return pts;
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        Point x(domain.dim());
        for (std::size_t j = 0; j < domain.dim(); ++j)
            x[j] = domain.lower[j] + unit(rng) * (domain.upper[j] - domain.lower[j]);
        pts.push_back(x);
    }
    return pts;
}

double distance(const Point& a, const Point& b) { return (a - b).norm(); }

double value_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

struct Estimate {
    double lipschitz = 0.0;
    double growth = 0.0;
};

Estimate estimate(const CoefficientFn& fn, const std::vector<Point>& pts,
                  const std::vector<double>& times) {
    const std::size_t k = fn.shape().size();
    Estimate est;
    std::vector<double> values(pts.size() * k);
    for (double t : times) {
        for (std::size_t i = 0; i < pts.size(); ++i)
            fn.evaluate(t, pts[i], {values.data() + i * k, k});
        for (std::size_t i = 0; i < pts.size(); ++i) {
            std::span<const double> vi{values.data() + i * k, k};
            double mag = 0.0;
            for (double v : vi) mag += v * v;
            est.growth = std::max(est.growth, std::sqrt(mag) / (1.0 + pts[i].norm()));
            for (std::size_t j = i + 1; j < pts.size(); ++j) {
                const double dx = distance(pts[i], pts[j]);
                if (dx <= 0.0) continue;
                std::span<const double> vj{values.data() + j * k, k};
                est.lipschitz = std::max(est.lipschitz, value_distance(vi, vj) / dx);
            }
        }
    }
    return est;
}

}  // namespace

ValidationReport validate_assumptions(const ProblemSpec& spec, std::size_t n_probe,
                                      std::uint64_t seed) {
    ValidationReport report;
    if (n_probe < 2) {
        report.checks.push_back({"probe", CheckStatus::fail, static_cast<double>(n_probe),
                                 "n_probe must be at least 2"});
        return report;
    }
    const auto pts = probe_points(spec.domain, n_probe, seed);
    std::vector<double> times(n_probe);
    for (std::size_t i = 0; i < n_probe; ++i)
        times[i] = spec.horizon() * static_cast<double>(i) / static_cast<double>(n_probe - 1);

    const struct {
        const char* name;
        const CoefficientFn* fn;
        bool growth;
    } roles[] = {{"drift", &spec.drift, true},
                 {"vol", &spec.vol, true},
                 {"running_cost", &spec.running_cost, false},
                 {"bequest", &spec.bequest, false}};
    for (const auto& role : roles) {
        const Estimate est = estimate(*role.fn, pts, times);
        const bool finite = std::isfinite(est.lipschitz);
        report.checks.push_back({std::string("lipschitz.") + role.name,
                                 finite ? CheckStatus::pass : CheckStatus::fail, est.lipschitz,
                                 "max pairwise difference quotient on the probe lattice"});
        if (role.growth)
            report.checks.push_back({std::string("growth.") + role.name,
                                     std::isfinite(est.growth) ? CheckStatus::pass
                                                               : CheckStatus::fail,
                                     est.growth, "max |F(t,x)| / (1 + |x|)"});
    }

    const ImpulseSet& z = spec.impulses;
    const CoefficientFn& c = spec.intervention_cost;

    // Subadditivity: c(t, z + z') <= c(t, z) + c(t, z') whenever z + z' is in Z.
    {
        std::size_t tested = 0;
        double worst = -std::numeric_limits<double>::infinity();
        for (double t : times)
            for (std::size_t i = 0; i < z.size(); ++i)
                for (std::size_t j = 0; j < z.size(); ++j) {
                    const Point sum = z[i] + z[j];
                    if (!z.contains(sum)) continue;
                    ++tested;
                    worst = std::max(worst,
                                     c.scalar(t, sum) - c.scalar(t, z[i]) - c.scalar(t, z[j]));
                }
        CheckEntry e{"subadditivity", CheckStatus::skipped, 0.0, "no pair with z + z' in Z"};
        if (tested > 0) {
            e.value = worst;
            e.status = worst <= 1e-12 ? CheckStatus::pass : CheckStatus::fail;
            e.detail = "max of c(t,z+z') - c(t,z) - c(t,z') over " + std::to_string(tested) +
                       " sampled pairs";
        }
        report.checks.push_back(e);
    }

    // c non-increasing in t.
    {
        double worst = 0.0;
        for (const Point& zi : z)
            for (std::size_t k = 1; k < times.size(); ++k)
                worst = std::max(worst, c.scalar(times[k], zi) - c.scalar(times[k - 1], zi));
        CheckEntry e{"cost_monotone_in_time", worst <= 1e-12 ? CheckStatus::pass : CheckStatus::fail,
                     worst, "max increase of c(t,z) between consecutive probe times"};
        if (z.empty()) {
            e.status = CheckStatus::skipped;
            e.detail = "impulse set is empty";
        }
        report.checks.push_back(e);
    }

    // Cost floor: min c >= lambda_c > 0.
    {
        double lowest = std::numeric_limits<double>::infinity();
        for (const Point& zi : z)
            for (double t : times) lowest = std::min(lowest, c.scalar(t, zi));
        CheckEntry e{"cost_floor", CheckStatus::pass, lowest, "min over Z x probe times of c(t,z)"};
        if (!(spec.cost_floor > 0.0) || (!z.empty() && lowest < spec.cost_floor))
            e.status = CheckStatus::fail;
        if (z.empty()) {
            e.status = CheckStatus::skipped;
            e.value = 0.0;
            e.detail = "impulse set is empty";
        }
        report.checks.push_back(e);
    }
    return report;
}

}  // namespace isg
