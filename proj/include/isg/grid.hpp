#pragma once

#include <array>
#include <span>
#include <vector>

#include "isg/model.hpp"
#include "isg/types.hpp"

namespace isg {

/// Uniform time x tensor-space lattice over [0, T] x closure(S). Node
/// indices run with axis 0 fastest.
class Grid {
public:
    Grid() = default;
    Grid(const DomainSpec& domain, std::size_t nt, std::span<const std::size_t> nx);

    std::size_t dim() const { return dim_; }
    std::size_t time_steps() const { return nt_; }  ///< Nt; Nt + 1 slices
    std::size_t slices() const { return nt_ + 1; }
    double dt() const { return dt_; }
    double horizon() const { return horizon_; }
    double time(std::size_t k) const { return k == nt_ ? horizon_ : dt_ * static_cast<double>(k); }

    std::size_t cells(std::size_t axis) const { return nx_[axis]; }  ///< Nx_i
    std::size_t points(std::size_t axis) const { return nx_[axis] + 1; }
    double step(std::size_t axis) const { return dx_[axis]; }
    double lower(std::size_t axis) const { return lower_[axis]; }
    double upper(std::size_t axis) const { return upper_[axis]; }
    std::size_t stride(std::size_t axis) const { return stride_[axis]; }

    std::size_t node_count() const { return nodes_; }
    std::array<std::size_t, kMaxDim> coords(std::size_t node) const;
    std::size_t index(std::span<const std::size_t> coords) const;
    Point node(std::size_t node) const;
    bool is_boundary(std::size_t node) const;

    /// Multilinear interpolation of a slice at y; y is clamped to the box.
    double interpolate(std::span<const double> slice, const Point& y) const;
    std::size_t nearest_node(const Point& x) const;
    std::size_t nearest_slice(double t) const;

private:
    std::size_t dim_ = 0;
    std::size_t nt_ = 0;
    double dt_ = 0.0;
    double horizon_ = 0.0;
    std::array<std::size_t, kMaxDim> nx_{};
    std::array<std::size_t, kMaxDim> stride_{};
    std::array<double, kMaxDim> dx_{};
    std::array<double, kMaxDim> lower_{};
    std::array<double, kMaxDim> upper_{};
    std::size_t nodes_ = 0;
};

/// Throws ArityError for Nt < 1, Nx_i < 2, or an Nx list of the wrong length
/// (a single Nx is broadcast to every axis).
Grid build_grid(const DomainSpec& domain, std::size_t nt, std::span<const std::size_t> nx);

}  // namespace isg
