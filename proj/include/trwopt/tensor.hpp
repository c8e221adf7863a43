#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace trwopt {

namespace detail {

inline std::size_t checked_volume(std::span<const std::size_t> dims, const char* what) {
    if (dims.empty())
        throw std::invalid_argument(std::string(what) + ": tensor must have at least one mode");
    std::size_t vol = 1;
    for (std::size_t d : dims) {
        if (d == 0)
            throw std::invalid_argument(std::string(what) + ": every dimension must be >= 1");
        if (d != 0 && vol > (std::size_t(1) << 48) / d)
            throw std::invalid_argument(std::string(what) + ": tensor size is unreasonably large");
        vol *= d;
    }
    return vol;
}

inline void check_finite(std::span<const double> values, const char* what) {
    for (double v : values)
        if (!std::isfinite(v))
            throw std::invalid_argument(std::string(what) + ": non-finite value");
}

}  // namespace detail

/// Dense N-dimensional tensor of doubles.
///
/// Storage is flat with the first index varying fastest: the zero-based
/// multi-index (i1,...,iN) lives at offset i1 + I1*(i2 + I2*(i3 + ...)).
/// Modes are numbered 1..N in every operation that takes a mode; element
/// indices are zero-based throughout the API.
///
/// The validating constructors reject NaN/Inf, empty shapes and zero
/// dimensions. Kernels that build tensors from already-trusted values use
/// make_unchecked and leave finiteness policing to their callers.
class DenseTensor {
public:
    DenseTensor() = default;

    explicit DenseTensor(std::vector<std::size_t> dims)
        : dims_(std::move(dims)), data_(detail::checked_volume(dims_, "DenseTensor"), 0.0) {}

    DenseTensor(std::vector<std::size_t> dims, std::vector<double> data)
        : dims_(std::move(dims)), data_(std::move(data)) {
        if (data_.size() != detail::checked_volume(dims_, "DenseTensor"))
            throw std::invalid_argument("DenseTensor: data length does not match dims");
        detail::check_finite(data_, "DenseTensor");
    }

    static DenseTensor filled(std::vector<std::size_t> dims, double value) {
        DenseTensor t(std::move(dims));
        for (double& v : t.data_) v = value;
        detail::check_finite(t.data_, "DenseTensor::filled");
        return t;
    }

    static DenseTensor make_unchecked(std::vector<std::size_t> dims, std::vector<double> data) {
        DenseTensor t;
        t.dims_ = std::move(dims);
        t.data_ = std::move(data);
        assert(t.data_.size() == [&] {
            std::size_t v = 1;
            for (std::size_t d : t.dims_) v *= d;
            return v;
        }());
        return t;
    }

    std::size_t order() const { return dims_.size(); }
    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double operator[](std::size_t offset) const { return data_[offset]; }
    double& operator[](std::size_t offset) { return data_[offset]; }

    std::size_t linear_index(std::span<const std::size_t> index) const {
        if (index.size() != dims_.size())
            throw std::out_of_range("DenseTensor: index arity does not match order");
        std::size_t off = 0, stride = 1;
        for (std::size_t k = 0; k < dims_.size(); ++k) {
            if (index[k] >= dims_[k])
                throw std::out_of_range("DenseTensor: index out of range");
            off += index[k] * stride;
            stride *= dims_[k];
        }
        return off;
    }

    double at(std::span<const std::size_t> index) const { return data_[linear_index(index)]; }
    double at(std::initializer_list<std::size_t> index) const {
        return at(std::span<const std::size_t>(index.begin(), index.size()));
    }
    double& at(std::span<const std::size_t> index) { return data_[linear_index(index)]; }
    double& at(std::initializer_list<std::size_t> index) {
        return at(std::span<const std::size_t>(index.begin(), index.size()));
    }

    const std::vector<double>& values() const { return data_; }
    std::vector<double>& values() { return data_; }

private:
    std::vector<std::size_t> dims_;
    std::vector<double> data_;
};

/// Column-major matrix: entry (i,j) lives at offset i + rows*j, matching the
/// first-index-fastest tensor layout.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(checked_size(rows, cols), 0.0) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != checked_size(rows_, cols_))
            throw std::invalid_argument("Matrix: data length does not match rows*cols");
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double operator()(std::size_t i, std::size_t j) const {
        assert(i < rows_ && j < cols_);
        return data_[i + rows_ * j];
    }
    double& operator()(std::size_t i, std::size_t j) {
        assert(i < rows_ && j < cols_);
        return data_[i + rows_ * j];
    }

    double at(std::size_t i, std::size_t j) const {
        if (i >= rows_ || j >= cols_) throw std::out_of_range("Matrix: index out of range");
        return data_[i + rows_ * j];
    }

    const std::vector<double>& values() const { return data_; }
    std::vector<double>& values() { return data_; }

private:
    static std::size_t checked_size(std::size_t rows, std::size_t cols) {
        if (rows == 0 || cols == 0)
            throw std::invalid_argument("Matrix: rows and cols must be >= 1");
        return rows * cols;
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

namespace detail {

// Column weight per axis for an unfolding that keeps `axes_order` with the
// first listed axis fastest. Axis `skip` (the row axis) gets weight 0.
inline std::vector<std::size_t> column_weights(std::span<const std::size_t> dims,
                                               std::span<const std::size_t> axes_order) {
    std::vector<std::size_t> w(dims.size(), 0);
    std::size_t acc = 1;
    for (std::size_t ax : axes_order) {
        w[ax] = acc;
        acc *= dims[ax];
    }
    return w;
}

// Axes in natural order with `row_axis` removed.
inline std::vector<std::size_t> natural_axes(std::size_t n, std::size_t row_axis) {
    std::vector<std::size_t> axes;
    axes.reserve(n - 1);
    for (std::size_t k = 0; k < n; ++k)
        if (k != row_axis) axes.push_back(k);
    return axes;
}

// Axes in circular order starting after `row_axis`: row_axis+1, ..., N-1, 0,
// ..., row_axis-1.
inline std::vector<std::size_t> circular_axes(std::size_t n, std::size_t row_axis) {
    std::vector<std::size_t> axes;
    axes.reserve(n - 1);
    for (std::size_t s = 1; s < n; ++s) axes.push_back((row_axis + s) % n);
    return axes;
}

inline std::size_t mode_to_axis(std::size_t mode, std::size_t order, const char* what) {
    if (mode < 1 || mode > order)
        throw std::out_of_range(std::string(what) + ": mode out of range");
    return mode - 1;
}

inline Matrix unfold_with_axes(const DenseTensor& x, std::size_t row_axis,
                               std::span<const std::size_t> col_axes) {
    const auto& dims = x.dims();
    const std::size_t n = dims.size();
    const std::size_t rows = dims[row_axis];
    const std::size_t cols = x.size() / rows;
    const auto w = column_weights(dims, col_axes);

    std::vector<double> out(x.size());
    std::vector<std::size_t> idx(n, 0);
    std::size_t col = 0;
    for (std::size_t off = 0; off < x.size(); ++off) {
        out[idx[row_axis] + rows * col] = x[off];
        for (std::size_t k = 0; k < n; ++k) {
            if (++idx[k] < dims[k]) {
                col += w[k];
                break;
            }
            idx[k] = 0;
            col -= w[k] * (dims[k] - 1);
        }
    }
    return Matrix(rows, cols, std::move(out));
}

inline std::vector<double> fold_with_axes(const Matrix& m, std::size_t row_axis,
                                          std::span<const std::size_t> col_axes,
                                          std::span<const std::size_t> dims) {
    const std::size_t n = dims.size();
    std::size_t vol = 1;
    for (std::size_t d : dims) vol *= d;
    if (m.rows() != dims[row_axis] || m.size() != vol)
        throw std::invalid_argument("fold: matrix shape does not match target dims");
    const auto w = column_weights(dims, col_axes);

    std::vector<double> out(vol);
    std::vector<std::size_t> idx(n, 0);
    std::size_t col = 0;
    const std::size_t rows = m.rows();
    const auto& src = m.values();
    for (std::size_t off = 0; off < vol; ++off) {
        out[off] = src[idx[row_axis] + rows * col];
        for (std::size_t k = 0; k < n; ++k) {
            if (++idx[k] < dims[k]) {
                col += w[k];
                break;
            }
            idx[k] = 0;
            col -= w[k] * (dims[k] - 1);
        }
    }
    return out;
}

}  // namespace detail

/// Classic mode-n unfolding: rows are mode n, the remaining indices run in
/// natural order with the lowest-numbered mode fastest.
inline Matrix unfold_classic(const DenseTensor& x, std::size_t mode) {
    const std::size_t ax = detail::mode_to_axis(mode, x.order(), "unfold_classic");
    return detail::unfold_with_axes(x, ax, detail::natural_axes(x.order(), ax));
}

/// Circular-shift mode-n unfolding: rows are mode n, the remaining indices
/// run in the order n+1, ..., N, 1, ..., n-1 with mode n+1 fastest.
inline Matrix unfold_shift(const DenseTensor& x, std::size_t mode) {
    const std::size_t ax = detail::mode_to_axis(mode, x.order(), "unfold_shift");
    return detail::unfold_with_axes(x, ax, detail::circular_axes(x.order(), ax));
}

/// Inverse of unfold_shift: fold_shift(unfold_shift(x, n), n, x.dims()) == x
/// bit-exactly.
inline DenseTensor fold_shift(const Matrix& m, std::size_t mode, std::vector<std::size_t> dims) {
    detail::checked_volume(dims, "fold_shift");
    const std::size_t ax = detail::mode_to_axis(mode, dims.size(), "fold_shift");
    auto data = detail::fold_with_axes(m, ax, detail::circular_axes(dims.size(), ax), dims);
    detail::check_finite(data, "fold_shift");
    return DenseTensor::make_unchecked(std::move(dims), std::move(data));
}

namespace detail {

// fold_shift without the finiteness scan, for optimizer-internal values.
inline DenseTensor fold_shift_unchecked(const Matrix& m, std::size_t mode,
                                        std::vector<std::size_t> dims) {
    const std::size_t ax = mode - 1;
    auto data = fold_with_axes(m, ax, circular_axes(dims.size(), ax), dims);
    return DenseTensor::make_unchecked(std::move(dims), std::move(data));
}

inline void require_same_dims(const DenseTensor& x, const DenseTensor& y, const char* what) {
    if (x.dims() != y.dims())
        throw std::invalid_argument(std::string(what) + ": dims mismatch");
}

}  // namespace detail

inline DenseTensor hadamard(const DenseTensor& x, const DenseTensor& y) {
    detail::require_same_dims(x, y, "hadamard");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
    return DenseTensor::make_unchecked(x.dims(), std::move(out));
}

inline DenseTensor subtract(const DenseTensor& x, const DenseTensor& y) {
    detail::require_same_dims(x, y, "subtract");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
    return DenseTensor::make_unchecked(x.dims(), std::move(out));
}

/// Sum of elementwise products, accumulated sequentially in flat storage
/// order so results are reproducible run to run.
inline double inner(const DenseTensor& x, const DenseTensor& y) {
    detail::require_same_dims(x, y, "inner");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    return acc;
}

inline double frobenius_norm(const DenseTensor& x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * x[i];
    return std::sqrt(acc);
}

inline Matrix transpose(const Matrix& m) {
    Matrix out(m.cols(), m.rows());
    for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < m.rows(); ++i) out(j, i) = m(i, j);
    return out;
}

/// C = A * B.
inline Matrix mat_mul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("mat_mul: inner dims mismatch");
    Matrix c(a.rows(), b.cols());
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    const double* pa = a.values().data();
    const double* pb = b.values().data();
    double* pc = c.values().data();
    for (std::size_t j = 0; j < n; ++j) {
        double* cj = pc + m * j;
        for (std::size_t l = 0; l < k; ++l) {
            const double blj = pb[l + k * j];
            if (blj == 0.0) continue;
            const double* al = pa + m * l;
            for (std::size_t i = 0; i < m; ++i) cj[i] += al[i] * blj;
        }
    }
    return c;
}

/// C = A * B^T, with A m-by-k and B n-by-k.
inline Matrix mat_mul_bt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw std::invalid_argument("mat_mul_bt: inner dims mismatch");
    Matrix c(a.rows(), b.rows());
    const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    const double* pa = a.values().data();
    const double* pb = b.values().data();
    double* pc = c.values().data();
    for (std::size_t l = 0; l < k; ++l) {
        const double* al = pa + m * l;
        const double* bl = pb + n * l;
        for (std::size_t j = 0; j < n; ++j) {
            const double bjl = bl[j];
            if (bjl == 0.0) continue;
            double* cj = pc + m * j;
            for (std::size_t i = 0; i < m; ++i) cj[i] += al[i] * bjl;
        }
    }
    return c;
}

}  // namespace trwopt
