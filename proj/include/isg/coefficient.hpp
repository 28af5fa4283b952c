#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "isg/types.hpp"

namespace isg {

enum class CoefficientKind { constant, affine, scaled_power, tabulated_grid };

std::string_view to_string(CoefficientKind kind);
/// Throws ParseError for unknown names.
CoefficientKind coefficient_kind_from(std::string_view name);

/// Shape of the value a coefficient produces: scalar (f, G, c), vector
/// (drift) or matrix (volatility).
struct CoefficientShape {
    std::size_t rows = 1;
    std::size_t cols = 1;
    std::size_t size() const { return rows * cols; }
};

/// A parametric coefficient from a closed catalog, evaluated at (t, x).
///
/// Parameter layouts (K = rows * cols outputs, p = input dimension):
///   constant        K values, row-major.
///   affine          K offsets a, then a K x p row-major slope B, then an
///                   optional decay d:  out = exp(-d t) (a + B x).
///   scaled-power    scalar shapes only: [offset, scale, exponent, decay = 0,
///                   one_sided = 0, shift = 0];
///                   out = exp(-decay t)(offset + scale b^exponent) + shift
///                   with b = |x| or, when one_sided != 0, b = max(sum_i x_i, 0).
///   tabulated-grid  [n, k_1..k_n, then n values per output]; piecewise linear
///                   in x_1 through strictly increasing knots, flat outside.
class CoefficientFn {
public:
    CoefficientFn() = default;

    /// Validates the parameter layout; throws ValidationError.
    CoefficientFn(CoefficientKind kind, std::vector<double> params, CoefficientShape shape,
                  std::size_t input_dim);

    CoefficientKind kind() const { return kind_; }
    const std::vector<double>& params() const { return params_; }
    CoefficientShape shape() const { return shape_; }
    std::size_t input_dim() const { return input_dim_; }

    /// Writes shape().size() values into out.
    void evaluate(double t, const Point& x, std::span<double> out) const;

    double scalar(double t, const Point& x) const;
    Point vector(double t, const Point& x) const;
    Matrix matrix(double t, const Point& x) const;

private:
    CoefficientKind kind_ = CoefficientKind::constant;
    std::vector<double> params_{0.0};
    CoefficientShape shape_{};
    std::size_t input_dim_ = 1;
};

}  // namespace isg
