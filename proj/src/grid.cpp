#include "isg/grid.hpp"

#include <cmath>

#include "isg/errors.hpp"

namespace isg {

Grid::Grid(const DomainSpec& domain, std::size_t nt, std::span<const std::size_t> nx)
    : dim_(domain.dim()), nt_(nt), horizon_(domain.horizon) {
    if (nt < 1) throw ArityError("grid needs at least one time step");
    if (nx.size() != dim_) throw ArityError("grid needs one space count per axis");
    if (dim_ == 0 || dim_ > kMaxDim) throw DimensionError("unsupported grid dimension");
    dt_ = horizon_ / static_cast<double>(nt_);
    nodes_ = 1;
    for (std::size_t i = 0; i < dim_; ++i) {
        if (nx[i] < 2) throw ArityError("grid needs at least two cells per axis");
        nx_[i] = nx[i];
        lower_[i] = domain.lower[i];
        upper_[i] = domain.upper[i];
        dx_[i] = (upper_[i] - lower_[i]) / static_cast<double>(nx_[i]);
        stride_[i] = nodes_;
        nodes_ *= nx_[i] + 1;
    }
}

std::array<std::size_t, kMaxDim> Grid::coords(std::size_t node) const {
    std::array<std::size_t, kMaxDim> c{};
    for (std::size_t i = 0; i < dim_; ++i) {
        c[i] = node % (nx_[i] + 1);
        node /= nx_[i] + 1;
    }
    return c;
}

std::size_t Grid::index(std::span<const std::size_t> c) const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < dim_; ++i) n += c[i] * stride_[i];
    return n;
}

Point Grid::node(std::size_t node) const {
    const auto c = coords(node);
    Point x(dim_);
    for (std::size_t i = 0; i < dim_; ++i)
        x[i] = c[i] == nx_[i] ? upper_[i] : lower_[i] + dx_[i] * static_cast<double>(c[i]);
    return x;
}

bool Grid::is_boundary(std::size_t node) const {
    const auto c = coords(node);
    for (std::size_t i = 0; i < dim_; ++i)
        if (c[i] == 0 || c[i] == nx_[i]) return true;
    return false;
}

double Grid::interpolate(std::span<const double> slice, const Point& y) const {
    std::array<std::size_t, kMaxDim> base{};
    std::array<double, kMaxDim> w{};
    for (std::size_t i = 0; i < dim_; ++i) {
        const double s = std::clamp((y[i] - lower_[i]) / dx_[i], 0.0, static_cast<double>(nx_[i]));
        auto cell = static_cast<std::size_t>(s);
        if (cell >= nx_[i]) cell = nx_[i] - 1;
        base[i] = cell;
        w[i] = s - static_cast<double>(cell);
    }
    double out = 0.0;
    const std::size_t corners = std::size_t{1} << dim_;
    for (std::size_t mask = 0; mask < corners; ++mask) {
        double weight = 1.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < dim_; ++i) {
            const bool up = (mask >> i) & 1U;
            weight *= up ? w[i] : 1.0 - w[i];
            n += (base[i] + (up ? 1 : 0)) * stride_[i];
        }
        if (weight != 0.0) out += weight * slice[n];
    }
    return out;
}

std::size_t Grid::nearest_node(const Point& x) const {
    std::array<std::size_t, kMaxDim> c{};
    for (std::size_t i = 0; i < dim_; ++i) {
        const double s = std::round((x[i] - lower_[i]) / dx_[i]);
        c[i] = static_cast<std::size_t>(std::clamp(s, 0.0, static_cast<double>(nx_[i])));
    }
    return index({c.data(), dim_});
}

std::size_t Grid::nearest_slice(double t) const {
    const double s = std::round(t / dt_);
    return static_cast<std::size_t>(std::clamp(s, 0.0, static_cast<double>(nt_)));
}

Grid build_grid(const DomainSpec& domain, std::size_t nt, std::span<const std::size_t> nx) {
    if (nx.size() == 1 && domain.dim() > 1) {
        std::vector<std::size_t> all(domain.dim(), nx[0]);
        return Grid(domain, nt, all);
    }
    return Grid(domain, nt, nx);
}

}  // namespace isg
