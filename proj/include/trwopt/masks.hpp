#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "trwopt/tensor.hpp"

namespace trwopt {

inline bool is_binary(const DenseTensor& w) {
    for (std::size_t i = 0; i < w.size(); ++i)
        if (w[i] != 0.0 && w[i] != 1.0) return false;
    return true;
}

inline void require_mask(const DenseTensor& w, const char* what) {
    if (!is_binary(w))
        throw std::invalid_argument(std::string(what) + ": mask entries must be exactly 0 or 1");
}

inline std::size_t observed_count(const DenseTensor& w) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < w.size(); ++i) n += w[i] == 1.0;
    return n;
}

/// Uniform random mask: exactly round((1 - missing_rate) * volume) entries
/// are kept, chosen without replacement. Deterministic per seed.
inline DenseTensor gen_mask_random(std::vector<std::size_t> dims, double missing_rate,
                                   std::uint64_t seed) {
    if (!(missing_rate >= 0.0 && missing_rate <= 1.0))
        throw std::invalid_argument("gen_mask_random: missing_rate must lie in [0, 1]");
    const std::size_t vol = detail::checked_volume(dims, "gen_mask_random");
    const auto keep = std::size_t(std::llround((1.0 - missing_rate) * double(vol)));

    std::vector<std::size_t> idx(vol);
    for (std::size_t i = 0; i < vol; ++i) idx[i] = i;
    std::mt19937_64 rng(seed);
    std::vector<double> w(vol, 0.0);
    for (std::size_t i = 0; i < keep; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, vol - 1);
        std::swap(idx[i], idx[pick(rng)]);
        w[idx[i]] = 1.0;
    }
    return DenseTensor::make_unchecked(std::move(dims), std::move(w));
}

/// Zeros on an axis-aligned box (zero-based origin, per-axis extents), ones
/// elsewhere.
inline DenseTensor gen_mask_block(std::vector<std::size_t> dims,
                                  std::span<const std::size_t> origin,
                                  std::span<const std::size_t> extent) {
    detail::checked_volume(dims, "gen_mask_block");
    const std::size_t n = dims.size();
    if (origin.size() != n || extent.size() != n)
        throw std::invalid_argument("gen_mask_block: origin/extent arity must match dims");
    for (std::size_t k = 0; k < n; ++k)
        if (origin[k] > dims[k] || extent[k] > dims[k] - origin[k])
            throw std::out_of_range("gen_mask_block: block exceeds tensor bounds");

    DenseTensor w = DenseTensor::filled(dims, 1.0);
    std::size_t box = 1;
    for (std::size_t e : extent) box *= e;
    if (box == 0) return w;

    std::vector<std::size_t> strides(n);
    std::size_t acc = 1;
    for (std::size_t k = 0; k < n; ++k) {
        strides[k] = acc;
        acc *= dims[k];
    }
    std::vector<std::size_t> rel(n, 0);
    while (true) {
        std::size_t off = 0;
        for (std::size_t k = 0; k < n; ++k) off += (origin[k] + rel[k]) * strides[k];
        w[off] = 0.0;
        std::size_t k = 0;
        while (k < n && ++rel[k] == extent[k]) rel[k++] = 0;
        if (k == n) break;
    }
    return w;
}

/// Zeros on whole slices: every entry whose zero-based coordinate along
/// `mode` (numbered 1..N) is listed in `indices`.
inline DenseTensor gen_mask_lines(std::vector<std::size_t> dims, std::size_t mode,
                                  std::span<const std::size_t> indices) {
    detail::checked_volume(dims, "gen_mask_lines");
    const std::size_t ax = detail::mode_to_axis(mode, dims.size(), "gen_mask_lines");
    std::vector<bool> hit(dims[ax], false);
    for (std::size_t i : indices) {
        if (i >= dims[ax]) throw std::out_of_range("gen_mask_lines: line index out of range");
        hit[i] = true;
    }

    DenseTensor w = DenseTensor::filled(dims, 1.0);
    std::vector<std::size_t> idx(dims.size(), 0);
    for (std::size_t off = 0; off < w.size(); ++off) {
        if (hit[idx[ax]]) w[off] = 0.0;
        std::size_t k = 0;
        while (k < dims.size() && ++idx[k] == dims[k]) idx[k++] = 0;
    }
    return w;
}

}  // namespace trwopt
