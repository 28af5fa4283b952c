#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "isg/coefficient.hpp"
#include "isg/types.hpp"

namespace isg {

/// Open box S = (lower, upper) and horizon T. The continuation region for
/// the exit time is S itself.
struct DomainSpec {
    Point lower;
    Point upper;
    double horizon = 1.0;

    std::size_t dim() const { return lower.size(); }
    /// x in the open box S.
    bool contains(const Point& x) const;
    /// x in the closure of S.
    bool contains_closed(const Point& x) const;
    /// Last point of the segment from `inside` towards `target` that lies in
    /// the closed box. Returns target when target is already in the closure.
    Point boundary_crossing(const Point& inside, const Point& target) const;
};

/// Finite impulse set Z, kept in lexicographic order.
class ImpulseSet {
public:
    ImpulseSet() = default;
    /// Sorts; throws ValidationError on duplicates or mixed dimensions.
    explicit ImpulseSet(std::vector<Point> impulses);

    bool empty() const { return impulses_.empty(); }
    std::size_t size() const { return impulses_.size(); }
    const Point& operator[](std::size_t i) const { return impulses_[i]; }
    auto begin() const { return impulses_.begin(); }
    auto end() const { return impulses_.end(); }

    std::optional<std::size_t> index_of(const Point& z) const;
    bool contains(const Point& z) const { return index_of(z).has_value(); }

private:
    std::vector<Point> impulses_;
};

enum class ImpulseResponseKind { translation, custom_affine };

/// Gamma(x, z): translation x + z, or custom affine A x + B z.
struct ImpulseResponse {
    ImpulseResponseKind kind = ImpulseResponseKind::translation;
    Matrix state_map;
    Matrix impulse_map;

    Point apply(const Point& x, const Point& z) const;
};

struct ProblemSpec {
    DomainSpec domain;
    CoefficientFn drift;         ///< mu(t, x), p-vector
    CoefficientFn vol;           ///< sigma(t, x), p x p
    CoefficientFn running_cost;  ///< f(t, x)
    CoefficientFn bequest;       ///< G(t, x)
    CoefficientFn intervention_cost;  ///< c(t, z)
    ImpulseResponse response;
    ImpulseSet impulses;
    double cost_floor = 0.0;  ///< lambda_c

    std::size_t dim() const { return domain.dim(); }
    double horizon() const { return domain.horizon; }
};

/// Gamma(x, z) with a membership guard on z. The result may leave S.
Point impulse_response(const ProblemSpec& spec, const Point& x, const Point& z);

enum class CheckStatus { pass, fail, skipped };

struct CheckEntry {
    std::string name;
    CheckStatus status = CheckStatus::pass;
    double value = 0.0;
    std::string detail;
};

struct ValidationReport {
    std::vector<CheckEntry> checks;

    const CheckEntry* find(std::string_view name) const;
    bool all_pass() const;
    nlohmann::json to_json() const;
};

/// Empirical check of the standing assumptions on a probe lattice of n_probe
/// points and n_probe times. Never throws for failed checks; failures are
/// report entries. Deterministic for a given seed.
ValidationReport validate_assumptions(const ProblemSpec& spec, std::size_t n_probe,
                                      std::uint64_t seed = 0);

}  // namespace isg
