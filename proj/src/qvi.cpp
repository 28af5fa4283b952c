#include "isg/qvi.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "parallel.hpp"

namespace isg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Rows of A = I/dt - L_h in CSR form. Boundary rows are the identity.
struct Stencil {
    std::vector<std::size_t> offset;
    std::vector<std::size_t> col;
    std::vector<double> weight;  ///< w_n >= 0 in L_h V = sum w_n (V_n - V)
    std::vector<double> diag;
    std::vector<char> boundary;
};

std::string node_label(const Grid& grid, std::size_t node, double t) {
    std::ostringstream os;
    os.precision(10);
    os << "(t=" << t << ", x=(";
    const Point x = grid.node(node);
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
    os << "))";
    return os.str();
}

Stencil build_stencil(const ProblemSpec& spec, const Grid& grid, double t) {
    const std::size_t n = grid.node_count();
    const std::size_t p = grid.dim();
    Stencil s;
    s.offset.assign(n + 1, 0);
    s.diag.assign(n, 1.0);
    s.boundary.assign(n, 0);
    const double inv_dt = 1.0 / grid.dt();

    std::vector<std::pair<std::size_t, double>> row;
    for (std::size_t node = 0; node < n; ++node) {
        s.offset[node] = s.col.size();
        if (grid.is_boundary(node)) {
            s.boundary[node] = 1;
            continue;
        }
        row.clear();
        const Point x = grid.node(node);
        const Point mu = spec.drift.vector(t, x);
        const Matrix a = spec.vol.matrix(t, x).outer();
        std::array<double, kMaxDim> up{}, dn{};
        for (std::size_t i = 0; i < p; ++i) {
            const double h = grid.step(i);
            up[i] = 0.5 * a(i, i) / (h * h) + std::max(mu[i], 0.0) / h;
            dn[i] = 0.5 * a(i, i) / (h * h) + std::max(-mu[i], 0.0) / h;
        }
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = i + 1; j < p; ++j) {
                const double aij = 0.5 * (a(i, j) + a(j, i));
                if (aij == 0.0) continue;
                const double c = std::abs(aij) / (2.0 * grid.step(i) * grid.step(j));
                up[i] -= c;
                dn[i] -= c;
                up[j] -= c;
                dn[j] -= c;
                const std::size_t si = grid.stride(i);
                const std::size_t sj = grid.stride(j);
                if (aij > 0.0) {
                    row.emplace_back(node + si + sj, c);
                    row.emplace_back(node - si - sj, c);
                } else {
                    row.emplace_back(node + si - sj, c);
                    row.emplace_back(node - si + sj, c);
                }
            }
        }
        for (std::size_t i = 0; i < p; ++i) {
            row.emplace_back(node + grid.stride(i), up[i]);
            row.emplace_back(node - grid.stride(i), dn[i]);
        }
        double total = 0.0;
        for (const auto& [c, w] : row) {
            if (w < -1e-12 * (1.0 + std::abs(total)))
                throw SchemeError("negative stencil weight at node " + node_label(grid, node, t) +
                                  "; refine the grid or reduce the cross-diffusion");
            if (w <= 0.0) continue;
            s.col.push_back(c);
            s.weight.push_back(w);
            total += w;
        }
        s.diag[node] = inv_dt + total;
    }
    s.offset[n] = s.col.size();
    return s;
}

/// (A V)_i for interior rows, V_i for boundary rows.
double apply_row(const Stencil& s, std::span<const double> v, std::size_t i) {
    double acc = s.diag[i] * v[i];
    for (std::size_t k = s.offset[i]; k < s.offset[i + 1]; ++k) acc -= s.weight[k] * v[s.col[k]];
    return acc;
}

enum Branch : char { kPde = 0, kLower = 1, kUpper = 2 };

/// Solves rows with policy kPde as A V = b and the others as V = obstacle.
class LinearSolver {
public:
    LinearSolver(const Stencil& s, const Grid& grid, double tol) : s_(s), grid_(grid), tol_(tol) {}

    void solve(std::span<const char> policy, std::span<const double> b,
               std::span<const double> lower, std::span<const double> upper,
               std::vector<double>& v) {
        const std::size_t n = s_.diag.size();
        if (grid_.dim() == 1) {
            thomas(policy, b, lower, upper, v);
            return;
        }
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(s_.col.size() + n);
        Eigen::VectorXd rhs(n), guess(n);
        for (std::size_t i = 0; i < n; ++i) {
            guess[static_cast<Eigen::Index>(i)] = v[i];
            const auto ii = static_cast<Eigen::Index>(i);
            if (policy[i] != kPde || s_.boundary[i]) {
                trips.emplace_back(ii, ii, 1.0);
                rhs[ii] = policy[i] == kLower ? lower[i] : policy[i] == kUpper ? upper[i] : b[i];
                continue;
            }
            trips.emplace_back(ii, ii, s_.diag[i]);
            for (std::size_t k = s_.offset[i]; k < s_.offset[i + 1]; ++k)
                trips.emplace_back(ii, static_cast<Eigen::Index>(s_.col[k]), -s_.weight[k]);
            rhs[ii] = b[i];
        }
        Eigen::SparseMatrix<double, Eigen::RowMajor> a(static_cast<Eigen::Index>(n),
                                                       static_cast<Eigen::Index>(n));
        a.setFromTriplets(trips.begin(), trips.end());
        Eigen::BiCGSTAB<Eigen::SparseMatrix<double, Eigen::RowMajor>> solver;
        solver.compute(a);
        const double scale = std::max(1.0, rhs.norm());
        solver.setTolerance(std::max(tol_ / scale, 1e-15));
        solver.setMaxIterations(10000);
        Eigen::VectorXd x = solver.solveWithGuess(rhs, guess);
        for (std::size_t i = 0; i < n; ++i) v[i] = x[static_cast<Eigen::Index>(i)];
    }

private:
    void thomas(std::span<const char> policy, std::span<const double> b,
                std::span<const double> lower, std::span<const double> upper,
                std::vector<double>& v) const {
        const std::size_t n = s_.diag.size();
        std::vector<double> sub(n, 0.0), dia(n, 1.0), sup(n, 0.0), rhs(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (policy[i] != kPde || s_.boundary[i]) {
                rhs[i] = policy[i] == kLower ? lower[i] : policy[i] == kUpper ? upper[i] : b[i];
                continue;
            }
            dia[i] = s_.diag[i];
            for (std::size_t k = s_.offset[i]; k < s_.offset[i + 1]; ++k) {
                if (s_.col[k] + 1 == i) sub[i] -= s_.weight[k];
                else sup[i] -= s_.weight[k];
            }
            rhs[i] = b[i];
        }
        for (std::size_t i = 1; i < n; ++i) {
            const double m = sub[i] / dia[i - 1];
            dia[i] -= m * sup[i - 1];
            rhs[i] -= m * rhs[i - 1];
        }
        v.assign(n, 0.0);
        v[n - 1] = rhs[n - 1] / dia[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) v[i] = (rhs[i] - sup[i] * v[i + 1]) / dia[i];
    }

    const Stencil& s_;
    const Grid& grid_;
    double tol_;
};

Branch choose(double r, double s, double o, char previous) {
    // max{min[r, s], o}
    Branch inner = r < s ? kPde : s < r ? kLower : (previous == kLower ? kLower : kPde);
    const double iv = std::min(r, s);
    if (o > iv) return kUpper;
    if (o == iv && previous == kUpper) return kUpper;
    return inner;
}

/// max{min[A V - b, V - lower], V - upper} = 0 on interior rows, V = b on
/// boundary rows. Policy iteration on diagonally scaled rows (an active-set
/// Newton step); projected Gauss-Seidel if it stalls.
bool double_obstacle_step(const Stencil& s, const Grid& grid, std::span<const double> b,
                          std::span<const double> lower_in, std::span<const double> upper,
                          double tol, std::size_t max_policy, std::vector<double>& v) {
    const std::size_t n = b.size();
    std::vector<double> lower(n);
    for (std::size_t i = 0; i < n; ++i) lower[i] = std::min(lower_in[i], upper[i]);

    LinearSolver lin(s, grid, tol);
    std::vector<char> policy(n, kPde);
    lin.solve(policy, b, lower, upper, v);
    for (std::size_t i = 0; i < n; ++i)
        if (!s.boundary[i]) v[i] = std::min(upper[i], std::max(lower[i], v[i]));

    auto refresh = [&](std::vector<char>& pol) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (s.boundary[i]) continue;
            // rows scaled by 1/diag so the residual is measured in units of V
            const double r = (apply_row(s, v, i) - b[i]) / s.diag[i];
            const Branch next = choose(r, v[i] - lower[i], v[i] - upper[i], pol[i]);
            if (next != pol[i]) {
                pol[i] = next;
                changed = true;
            }
        }
        return changed;
    };
    auto settled = [&] {
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (s.boundary[i]) continue;
            const double r = apply_row(s, v, i) - b[i];
            worst = std::max(worst, std::abs(std::max(std::min(r, v[i] - lower[i]), v[i] - upper[i])));
        }
        return worst <= tol;
    };
    refresh(policy);
    for (std::size_t it = 0; it < max_policy; ++it) {
        lin.solve(policy, b, lower, upper, v);
        if (!refresh(policy) || settled()) return false;
    }

    // Gauss-Seidel with projection onto [lower, upper]
    for (std::size_t i = 0; i < n; ++i)
        v[i] = s.boundary[i] ? b[i] : std::min(upper[i], std::max(lower[i], v[i]));
    for (std::size_t sweep = 0; sweep < 2000000; ++sweep) {
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (s.boundary[i]) continue;
            double acc = b[i];
            for (std::size_t k = s.offset[i]; k < s.offset[i + 1]; ++k)
                acc += s.weight[k] * v[s.col[k]];
            const double next = std::min(upper[i], std::max(lower[i], acc / s.diag[i]));
            change = std::max(change, std::abs(next - v[i]));
            v[i] = next;
        }
        if (change <= tol) break;
    }
    return true;
}

double sup_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v)
        if (std::isfinite(x)) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

std::string_view to_string(ActiveConstraint c) {
    switch (c) {
    case ActiveConstraint::pde: return "pde";
    case ActiveConstraint::stop: return "stop";
    case ActiveConstraint::impulse: return "impulse";
    }
    return "pde";
}

std::span<const double> ValueField::slice(std::size_t k) const {
    return std::span<const double>(values).subspan(k * grid.node_count(), grid.node_count());
}

std::span<const double> ValueField::mv_slice(std::size_t k) const {
    return std::span<const double>(impulse_obstacle).subspan(k * grid.node_count(), grid.node_count());
}

ActiveConstraint ValueField::active(std::size_t k, std::size_t node, double tol) const {
    const std::size_t i = at(k, node);
    if (values[i] >= impulse_obstacle[i] - tol) return ActiveConstraint::impulse;
    if (values[i] <= stop_obstacle[i] + tol) return ActiveConstraint::stop;
    return ActiveConstraint::pde;
}

std::vector<double> sample_bequest(const ProblemSpec& spec, const Grid& grid) {
    const std::size_t n = grid.node_count();
    std::vector<double> g(grid.slices() * n);
    for (std::size_t k = 0; k < grid.slices(); ++k)
        for (std::size_t i = 0; i < n; ++i)
            g[k * n + i] = spec.bequest.scalar(grid.time(k), grid.node(i));
    return g;
}

double running_cost_sup(const ProblemSpec& spec, const Grid& grid) {
    double m = 0.0;
    for (std::size_t k = 0; k < grid.slices(); ++k)
        for (std::size_t i = 0; i < grid.node_count(); ++i)
            m = std::max(m, std::abs(spec.running_cost.scalar(grid.time(k), grid.node(i))));
    return m;
}

ImpulseEval intervention_operator(const ProblemSpec& spec, const Grid& grid,
                                  std::span<const double> slice, double t) {
    const std::size_t n = grid.node_count();
    if (slice.size() != n) throw DimensionError("intervention_operator: slice size mismatch");
    ImpulseEval out{std::vector<double>(n, kInf), std::vector<int>(n, -1)};
    if (spec.impulses.empty()) return out;

    std::vector<double> cost;
    cost.reserve(spec.impulses.size());
    for (const Point& z : spec.impulses) cost.push_back(spec.intervention_cost.scalar(t, z));

    detail::parallel_for(n, [&](std::size_t node) {
        const Point x = grid.node(node);
        double best = kInf;
        int arg = -1;
        for (std::size_t j = 0; j < spec.impulses.size(); ++j) {
            const Point y = spec.response.apply(x, spec.impulses[j]);
            const double landed = spec.domain.contains_closed(y)
                                      ? grid.interpolate(slice, y)
                                      : spec.bequest.scalar(t, spec.domain.boundary_crossing(x, y));
            const double candidate = landed + cost[j];
            if (candidate < best) {
                best = candidate;
                arg = static_cast<int>(j);
            }
        }
        out.values[node] = best;
        out.argmin[node] = arg;
    });
    return out;
}

ValueField solve_qvi(const ProblemSpec& spec, const Grid& grid, const SolverParams& params) {
    if (grid.dim() != spec.dim()) throw DimensionError("solve_qvi: grid and problem dimensions differ");
    if (params.max_outer_iters < 1) throw ArityError("solve_qvi: max_outer_iters must be at least 1");
    const std::size_t n = grid.node_count();
    const std::size_t nt = grid.time_steps();

    ValueField field;
    field.grid = grid;
    field.bequest = sample_bequest(spec, grid);
    field.values.assign(grid.slices() * n, 0.0);
    field.impulse_obstacle.assign(grid.slices() * n, kInf);
    field.argmin.assign(grid.slices() * n, -1);
    field.stop_obstacle = field.bequest;

    auto& diag = field.diagnostics;
    diag.bequest_sup = sup_abs(field.bequest);
    diag.fixed_point_tol = params.fixed_point_tol.value_or(1e-8 * (1.0 + diag.bequest_sup));
    diag.linear_solver_tol = params.linear_solver_tol.value_or(diag.fixed_point_tol / 10.0);
    if (!(diag.fixed_point_tol > 0.0) || !(diag.linear_solver_tol > 0.0))
        throw RangeError("solve_qvi: tolerances must be positive");
    if (!params.stopping) {
        diag.stop_penalty =
            10.0 * (running_cost_sup(spec, grid) * grid.horizon() + diag.bequest_sup);
        for (std::size_t k = 0; k < nt; ++k)
            for (std::size_t i = 0; i < n; ++i)
                if (!grid.is_boundary(i)) field.stop_obstacle[k * n + i] = -diag.stop_penalty;
    }
    diag.outer_iterations.assign(grid.slices(), 0);
    diag.final_gap.assign(grid.slices(), 0.0);
    diag.gap_history.assign(grid.slices(), {});
    diag.residual_norm.assign(grid.slices(), 0.0);

    auto store_mv = [&](std::size_t k) {
        ImpulseEval ev = intervention_operator(spec, grid, field.slice(k), grid.time(k));
        std::copy(ev.values.begin(), ev.values.end(), field.impulse_obstacle.begin() + k * n);
        std::copy(ev.argmin.begin(), ev.argmin.end(), field.argmin.begin() + k * n);
    };

    std::copy_n(field.bequest.begin() + nt * n, n, field.values.begin() + nt * n);
    store_mv(nt);

    std::vector<double> b(n), cand(n), next(n);
    for (std::size_t k = nt; k-- > 0;) {
        const double t = grid.time(k);
        const Stencil st = build_stencil(spec, grid, t);
        const auto prev = field.slice(k + 1);
        const auto g = std::span<const double>(field.bequest).subspan(k * n, n);
        const auto lower = std::span<const double>(field.stop_obstacle).subspan(k * n, n);
        for (std::size_t i = 0; i < n; ++i) {
            b[i] = st.boundary[i] ? g[i]
                                  : prev[i] / grid.dt() + spec.running_cost.scalar(t, grid.node(i));
            cand[i] = st.boundary[i] ? g[i] : prev[i];
        }

        bool converged = false;
        auto& hist = diag.gap_history[k];
        for (std::size_t m = 0; m < params.max_outer_iters; ++m) {
            const ImpulseEval ev = intervention_operator(spec, grid, cand, t);
            next = cand;
            if (double_obstacle_step(st, grid, b, lower, ev.values, diag.linear_solver_tol,
                                     params.max_policy_iterations, next))
                ++diag.gauss_seidel_fallbacks;
            double gap = 0.0;
            for (std::size_t i = 0; i < n; ++i) gap = std::max(gap, std::abs(next[i] - cand[i]));
            cand.swap(next);
            diag.outer_iterations[k] = m + 1;
            if (spec.impulses.empty()) gap = 0.0;
            hist.push_back(gap);
            if (gap <= diag.fixed_point_tol) {
                converged = true;
                break;
            }
        }
        diag.final_gap[k] = hist.back();
        if (!converged) diag.converged = false;
        std::copy(cand.begin(), cand.end(), field.values.begin() + k * n);
        store_mv(k);
    }

    const auto residual = pde_residual(spec, field);
    for (std::size_t k = 0; k < grid.slices(); ++k)
        diag.residual_norm[k] =
            sup_abs(std::span<const double>(residual).subspan(k * n, n));

    if (!diag.converged) {
        std::size_t worst = 0;
        for (std::size_t k = 0; k < grid.slices(); ++k)
            if (diag.final_gap[k] > diag.final_gap[worst]) worst = k;
        std::ostringstream os;
        os << "solve_qvi: outer fixed point did not reach " << diag.fixed_point_tol << " within "
           << params.max_outer_iters << " iterations (worst gap " << diag.final_gap[worst]
           << " at t=" << grid.time(worst) << ")";
        throw ConvergenceError(os.str(), std::move(field));
    }
    return field;
}

std::vector<double> pde_residual(const ProblemSpec& spec, const ValueField& field) {
    const Grid& grid = field.grid;
    const std::size_t n = grid.node_count();
    std::vector<double> out(grid.slices() * n, 0.0);
    for (std::size_t k = 0; k < grid.time_steps(); ++k) {
        const double t = grid.time(k);
        const Stencil st = build_stencil(spec, grid, t);
        const auto v = field.slice(k);
        const auto prev = field.slice(k + 1);
        for (std::size_t i = 0; i < n; ++i) {
            if (st.boundary[i]) continue;
            const std::size_t idx = k * n + i;
            const double r = apply_row(st, v, i) - prev[i] / grid.dt() -
                             spec.running_cost.scalar(t, grid.node(i));
            const double s = v[i] - field.stop_obstacle[idx];
            const double o = v[i] - field.impulse_obstacle[idx];
            out[idx] = std::max(std::min(r, s), o);
        }
    }
    return out;
}

}  // namespace isg
