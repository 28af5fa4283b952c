#include "isg/coefficient.hpp"

#include <cmath>

#include "isg/errors.hpp"

namespace isg {

std::string_view to_string(CoefficientKind kind) {
    switch (kind) {
    case CoefficientKind::constant: return "constant";
    case CoefficientKind::affine: return "affine";
    case CoefficientKind::scaled_power: return "scaled-power";
    case CoefficientKind::tabulated_grid: return "tabulated-grid";
    }
    return "constant";
}

CoefficientKind coefficient_kind_from(std::string_view name) {
    if (name == "constant") return CoefficientKind::constant;
    if (name == "affine") return CoefficientKind::affine;
    if (name == "scaled-power") return CoefficientKind::scaled_power;
    if (name == "tabulated-grid") return CoefficientKind::tabulated_grid;
    throw ParseError("unknown coefficient kind '" + std::string(name) + "'");
}

namespace {

std::string arity_message(CoefficientKind kind, std::size_t expected, std::size_t got) {
    return std::string(to_string(kind)) + " coefficient expects " + std::to_string(expected) +
           " params, got " + std::to_string(got);
}

}  // namespace

CoefficientFn::CoefficientFn(CoefficientKind kind, std::vector<double> params,
                             CoefficientShape shape, std::size_t input_dim)
    : kind_(kind), params_(std::move(params)), shape_(shape), input_dim_(input_dim) {
    const std::size_t k = shape_.size();
    const std::size_t n = params_.size();
    for (double v : params_)
        if (!std::isfinite(v)) throw ValidationError("coefficient params must be finite");

    switch (kind_) {
    case CoefficientKind::constant:
        if (n != k) throw ValidationError(arity_message(kind_, k, n));
        break;
    case CoefficientKind::affine: {
        const std::size_t base = k + k * input_dim_;
        if (n != base && n != base + 1) throw ValidationError(arity_message(kind_, base, n));
        break;
    }
    case CoefficientKind::scaled_power:
        if (k != 1) throw ValidationError("scaled-power coefficients are scalar-valued only");
        if (n < 3 || n > 6) throw ValidationError(arity_message(kind_, 3, n));
        if (params_[2] <= 0.0) throw ValidationError("scaled-power exponent must be positive");
        break;
    case CoefficientKind::tabulated_grid: {
        if (n < 1) throw ValidationError("tabulated-grid requires a knot count");
        const double count = params_[0];
        if (count < 2.0 || count != std::floor(count))
            throw ValidationError("tabulated-grid requires an integer knot count >= 2");
        const auto m = static_cast<std::size_t>(count);
        if (n != 1 + m + m * k) throw ValidationError(arity_message(kind_, 1 + m + m * k, n));
        for (std::size_t i = 1; i < m; ++i)
            if (!(params_[1 + i] > params_[i]))
                throw ValidationError("tabulated-grid knots not strictly increasing");
        break;
    }
    }
}

void CoefficientFn::evaluate(double t, const Point& x, std::span<double> out) const {
    const std::size_t k = shape_.size();
    switch (kind_) {
    case CoefficientKind::constant:
        std::copy_n(params_.begin(), k, out.begin());
        return;
    case CoefficientKind::affine: {
        const std::size_t p = input_dim_;
        const double scale =
            params_.size() == k + k * p + 1 ? std::exp(-params_.back() * t) : 1.0;
        for (std::size_t r = 0; r < k; ++r) {
            double s = params_[r];
            for (std::size_t j = 0; j < p; ++j) s += params_[k + r * p + j] * x[j];
            out[r] = scale * s;
        }
        return;
    }
    case CoefficientKind::scaled_power: {
        const double decay = params_.size() > 3 ? params_[3] : 0.0;
        const bool one_sided = params_.size() > 4 && params_[4] != 0.0;
        double base = 0.0;
        if (one_sided) {
            for (std::size_t j = 0; j < x.size(); ++j) base += x[j];
            base = std::max(base, 0.0);
        } else {
            base = x.norm();
        }
        const double e = params_[2];
        const double powered = e == 1.0 ? base : (e == 2.0 ? base * base : std::pow(base, e));
        const double shift = params_.size() > 5 ? params_[5] : 0.0;
        out[0] = std::exp(-decay * t) * (params_[0] + params_[1] * powered) + shift;
        return;
    }
    case CoefficientKind::tabulated_grid: {
        const auto m = static_cast<std::size_t>(params_[0]);
        const double* knots = params_.data() + 1;
        const double* values = knots + m;
        const double s = x[0];
        std::size_t lo = 0;
        double w = 0.0;
        if (s <= knots[0]) {
            lo = 0;
            w = 0.0;
        } else if (s >= knots[m - 1]) {
            lo = m - 2;
            w = 1.0;
        } else {
            lo = static_cast<std::size_t>(std::upper_bound(knots, knots + m, s) - knots) - 1;
            w = (s - knots[lo]) / (knots[lo + 1] - knots[lo]);
        }
        for (std::size_t r = 0; r < k; ++r) {
            const double* v = values + r * m;
            out[r] = (1.0 - w) * v[lo] + w * v[lo + 1];
        }
        return;
    }
    }
}

double CoefficientFn::scalar(double t, const Point& x) const {
    double out = 0.0;
    evaluate(t, x, {&out, 1});
    return out;
}

Point CoefficientFn::vector(double t, const Point& x) const {
    Point out(shape_.rows);
    evaluate(t, x, out.view());
    return out;
}

Matrix CoefficientFn::matrix(double t, const Point& x) const {
    Matrix m;
    m.rows = shape_.rows;
    m.cols = shape_.cols;
    evaluate(t, x, {m.a.data(), shape_.size()});
    return m;
}

}  // namespace isg
