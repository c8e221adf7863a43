#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "trwopt/tensor.hpp"

namespace trwopt {

namespace detail {

// Accepts ranks of length N (closure appended) or N+1 (closure checked) and
// returns the full list (R_1, ..., R_N, R_{N+1}) with R_{N+1} == R_1.
inline std::vector<std::size_t> normalize_ranks(std::span<const std::size_t> ranks,
                                                std::size_t order, const char* what) {
    if (ranks.size() != order && ranks.size() != order + 1)
        throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(order) +
                                    " ranks (or " + std::to_string(order + 1) +
                                    " with explicit closure)");
    for (std::size_t r : ranks)
        if (r == 0) throw std::invalid_argument(std::string(what) + ": ranks must be >= 1");
    std::vector<std::size_t> full(ranks.begin(), ranks.end());
    if (full.size() == order) {
        full.push_back(full.front());
    } else if (full.back() != full.front()) {
        throw std::invalid_argument(std::string(what) +
                                    ": ring closure requires the last rank to equal the first");
    }
    return full;
}

}  // namespace detail

/// Ring of N third-order cores. Core n (numbered 1..N like modes) has dims
/// (R_n, I_n, R_{n+1}); the bond ranks close circularly, R_{N+1} = R_1.
/// A single core cannot close a ring, so N >= 2 is required.
class TRCores {
public:
    explicit TRCores(std::vector<DenseTensor> cores) : cores_(std::move(cores)) {
        const std::size_t n = cores_.size();
        if (n < 2) throw std::invalid_argument("TRCores: a ring needs at least two cores");
        for (std::size_t k = 0; k < n; ++k) {
            if (cores_[k].order() != 3)
                throw std::invalid_argument("TRCores: every core must be third-order");
            const std::size_t next = (k + 1) % n;
            if (cores_[k].dims()[2] != cores_[next].dims()[0])
                throw std::invalid_argument(
                    "TRCores: right rank of core " + std::to_string(k + 1) +
                    " does not match left rank of core " + std::to_string(next + 1));
        }
    }

    std::size_t order() const { return cores_.size(); }

    /// Mode sizes (I_1, ..., I_N).
    std::vector<std::size_t> dims() const {
        std::vector<std::size_t> d(cores_.size());
        for (std::size_t k = 0; k < cores_.size(); ++k) d[k] = cores_[k].dims()[1];
        return d;
    }

    /// Bond ranks (R_1, ..., R_N, R_{N+1}) with R_{N+1} == R_1.
    std::vector<std::size_t> ranks() const {
        std::vector<std::size_t> r(cores_.size() + 1);
        for (std::size_t k = 0; k < cores_.size(); ++k) r[k] = cores_[k].dims()[0];
        r[cores_.size()] = r[0];
        return r;
    }

    const DenseTensor& core(std::size_t n) const {
        if (n < 1 || n > cores_.size()) throw std::out_of_range("TRCores: core index out of range");
        return cores_[n - 1];
    }

    const std::vector<DenseTensor>& cores() const { return cores_; }

    std::size_t parameter_count() const {
        std::size_t total = 0;
        for (const auto& c : cores_) total += c.size();
        return total;
    }

    /// Mode-2 slice of core n at zero-based index i: the R_n-by-R_{n+1}
    /// matrix G(n)(:, i, :).
    Matrix slice(std::size_t n, std::size_t i) const {
        const DenseTensor& g = core(n);
        const std::size_t rl = g.dims()[0], len = g.dims()[1], rr = g.dims()[2];
        if (i >= len) throw std::out_of_range("TRCores::slice: index out of range");
        Matrix m(rl, rr);
        for (std::size_t s = 0; s < rr; ++s)
            for (std::size_t r = 0; r < rl; ++r) m(r, s) = g[r + rl * (i + len * s)];
        return m;
    }

private:
    std::vector<DenseTensor> cores_;
};

/// Single entry of the represented tensor: the trace of the product of the
/// per-index core slices, taken in core order 1..N.
inline double reconstruct_elem(const TRCores& cores, std::span<const std::size_t> index) {
    const std::size_t n = cores.order();
    if (index.size() != n)
        throw std::out_of_range("reconstruct_elem: index arity does not match order");
    Matrix acc = cores.slice(1, index[0]);
    for (std::size_t k = 2; k <= n; ++k) acc = mat_mul(acc, cores.slice(k, index[k - 1]));
    double trace = 0.0;
    for (std::size_t r = 0; r < acc.rows(); ++r) trace += acc(r, r);
    return trace;
}

inline double reconstruct_elem(const TRCores& cores, std::initializer_list<std::size_t> index) {
    return reconstruct_elem(cores, std::span<const std::size_t>(index.begin(), index.size()));
}

/// Merge of all cores except `mode` into a tensor of dims
/// (R_{n+1}, prod of remaining mode sizes, R_n). Entry (a, j, b) is element
/// (a, b) of the slice product G(n+1)(i_{n+1}) ... G(N)(i_N) G(1)(i_1) ...
/// G(n-1)(i_{n-1}), where j enumerates the remaining indices circularly with
/// i_{n+1} fastest -- the same column order unfold_shift uses.
inline DenseTensor subchain(const TRCores& cores, std::size_t mode) {
    const std::size_t n = cores.order();
    detail::mode_to_axis(mode, n, "subchain");

    std::size_t m = mode % n + 1;  // first core after `mode`, circularly
    const DenseTensor& first = cores.core(m);
    const std::size_t top = first.dims()[0];  // R_{n+1}
    std::vector<double> acc = first.values(); // (top, J, bot) == core layout
    std::size_t span_len = first.dims()[1];
    std::size_t bot = first.dims()[2];

    for (std::size_t step = 2; step + 1 <= n; ++step) {
        m = m % n + 1;
        const DenseTensor& g = cores.core(m);
        const std::size_t rl = g.dims()[0], len = g.dims()[1], rr = g.dims()[2];
        std::vector<double> next(top * span_len * len * rr, 0.0);
        for (std::size_t s = 0; s < rr; ++s)
            for (std::size_t i = 0; i < len; ++i)
                for (std::size_t b = 0; b < rl; ++b) {
                    const double coef = g[b + rl * (i + len * s)];
                    if (coef == 0.0) continue;
                    const double* src = acc.data() + top * span_len * b;
                    double* dst = next.data() + top * (span_len * i + span_len * len * s);
                    for (std::size_t t = 0; t < top * span_len; ++t) dst[t] += src[t] * coef;
                }
        acc = std::move(next);
        span_len *= len;
        bot = rr;
    }
    return DenseTensor::make_unchecked({top, span_len, bot}, std::move(acc));
}

/// The mode-n circular unfolding of the represented tensor, computed from the
/// cores alone: G(n) unfolded along its middle mode times the transposed
/// mode-2 circular unfolding of the subchain. Both factors order their rank
/// column pairs (r_n, r_{n+1}) with r_n fastest.
inline Matrix matricized_product(const TRCores& cores, std::size_t mode) {
    detail::mode_to_axis(mode, cores.order(), "matricized_product");
    Matrix g2 = unfold_classic(cores.core(mode), 2);
    Matrix chain2 = unfold_shift(subchain(cores, mode), 2);
    return mat_mul_bt(g2, chain2);
}

/// Full dense tensor represented by the ring. Uses the mode-1 matricized
/// product; its row-fastest layout is already the tensor layout, so folding
/// is a reshape.
inline DenseTensor reconstruct_full(const TRCores& cores) {
    Matrix x1 = matricized_product(cores, 1);
    return DenseTensor::make_unchecked(cores.dims(), std::move(x1.values()));
}

/// Cores filled with i.i.d. Gaussian entries of mean 0 and standard
/// deviation 1/sqrt(mean rank), so reconstructed entries stay O(1) across
/// rank settings. Deterministic for a fixed seed.
inline TRCores init_random(const std::vector<std::size_t>& dims,
                           const std::vector<std::size_t>& ranks, std::uint64_t seed) {
    if (dims.size() < 2) throw std::invalid_argument("init_random: need at least two modes");
    const auto full = detail::normalize_ranks(ranks, dims.size(), "init_random");
    double mean_rank = 0.0;
    for (std::size_t k = 0; k < dims.size(); ++k) mean_rank += double(full[k]);
    mean_rank /= double(dims.size());

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(mean_rank));
    std::vector<DenseTensor> cores;
    cores.reserve(dims.size());
    for (std::size_t k = 0; k < dims.size(); ++k) {
        std::vector<double> data(full[k] * dims[k] * full[k + 1]);
        for (double& v : data) v = gauss(rng);
        cores.push_back(DenseTensor::make_unchecked({full[k], dims[k], full[k + 1]},
                                                    std::move(data)));
    }
    return TRCores(std::move(cores));
}

}  // namespace trwopt
