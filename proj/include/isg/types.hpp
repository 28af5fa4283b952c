#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>

namespace isg {

/// Largest state dimension supported by the tensor-grid solver.
inline constexpr std::size_t kMaxDim = 3;

/// Small fixed-capacity state vector. Value type; no heap traffic on the
/// simulation hot path.
class Point {
public:
    Point() = default;
    explicit Point(std::size_t dim, double fill = 0.0) : size_(dim) {
        assert(dim <= kMaxDim);
        v_.fill(0.0);
        std::fill_n(v_.begin(), dim, fill);
    }
    Point(std::initializer_list<double> values) : size_(values.size()) {
        assert(values.size() <= kMaxDim);
        std::copy(values.begin(), values.end(), v_.begin());
    }
    static Point from(std::span<const double> values) {
        Point p(values.size());
        std::copy(values.begin(), values.end(), p.v_.begin());
        return p;
    }

    std::size_t size() const { return size_; }
    double& operator[](std::size_t i) { return v_[i]; }
    double operator[](std::size_t i) const { return v_[i]; }
    std::span<const double> view() const { return {v_.data(), size_}; }
    std::span<double> view() { return {v_.data(), size_}; }

    double norm() const {
        double s = 0.0;
        for (std::size_t i = 0; i < size_; ++i) s += v_[i] * v_[i];
        return std::sqrt(s);
    }

    Point& operator+=(const Point& o) {
        for (std::size_t i = 0; i < size_; ++i) v_[i] += o.v_[i];
        return *this;
    }
    Point& operator-=(const Point& o) {
        for (std::size_t i = 0; i < size_; ++i) v_[i] -= o.v_[i];
        return *this;
    }
    Point& operator*=(double a) {
        for (std::size_t i = 0; i < size_; ++i) v_[i] *= a;
        return *this;
    }
    friend Point operator+(Point a, const Point& b) { return a += b; }
    friend Point operator-(Point a, const Point& b) { return a -= b; }
    friend Point operator*(double s, Point a) { return a *= s; }

    friend bool operator==(const Point& a, const Point& b) {
        if (a.size_ != b.size_) return false;
        return std::equal(a.v_.begin(), a.v_.begin() + a.size_, b.v_.begin());
    }
    /// Lexicographic order; the canonical order of impulse sets.
    friend bool operator<(const Point& a, const Point& b) {
        return std::lexicographical_compare(a.v_.begin(), a.v_.begin() + a.size_,
                                            b.v_.begin(), b.v_.begin() + b.size_);
    }

private:
    std::array<double, kMaxDim> v_{};
    std::size_t size_ = 0;
};

/// Dense rows x cols matrix with rows, cols <= kMaxDim (row-major).
struct Matrix {
    std::array<double, kMaxDim * kMaxDim> a{};
    std::size_t rows = 0;
    std::size_t cols = 0;

    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }

    Point apply(const Point& x) const {
        Point y(rows);
        for (std::size_t i = 0; i < rows; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

    /// Diffusion matrix a = M M^T.
    Matrix outer() const {
        Matrix out;
        out.rows = rows;
        out.cols = rows;
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < rows; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < cols; ++k) s += (*this)(i, k) * (*this)(j, k);
                out(i, j) = s;
            }
        return out;
    }
};

}  // namespace isg
