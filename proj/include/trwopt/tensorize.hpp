#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "trwopt/tensor.hpp"

namespace trwopt {

/// Block-nesting plan for turning a U x V x C image into an (l+1)-mode
/// tensor. Row factors (u_1,...,u_l) multiply to U, column factors to V;
/// output mode k has size u_k * v_k and the channel axis is carried along
/// unchanged. The leading modes represent nested pixel blocks: mode 1 the
/// finest block, later modes coarser arrangements.
struct TensorizationPlan {
    std::vector<std::size_t> row_factors;
    std::vector<std::size_t> col_factors;
    std::size_t channels = 1;

    void validate() const {
        if (row_factors.empty() || row_factors.size() != col_factors.size())
            throw std::invalid_argument(
                "TensorizationPlan: need equal, non-empty row/col factor lists");
        for (std::size_t f : row_factors)
            if (f == 0) throw std::invalid_argument("TensorizationPlan: zero row factor");
        for (std::size_t f : col_factors)
            if (f == 0) throw std::invalid_argument("TensorizationPlan: zero col factor");
        if (channels == 0) throw std::invalid_argument("TensorizationPlan: zero channel count");
    }

    std::size_t levels() const { return row_factors.size(); }

    std::size_t rows() const {
        std::size_t r = 1;
        for (std::size_t f : row_factors) r *= f;
        return r;
    }

    std::size_t cols() const {
        std::size_t c = 1;
        for (std::size_t f : col_factors) c *= f;
        return c;
    }

    std::vector<std::size_t> output_dims() const {
        std::vector<std::size_t> d(levels() + 1);
        for (std::size_t k = 0; k < levels(); ++k) d[k] = row_factors[k] * col_factors[k];
        d[levels()] = channels;
        return d;
    }
};

namespace detail {

inline void require_plan_matches(const TensorizationPlan& plan,
                                 const std::vector<std::size_t>& image_dims, const char* what) {
    plan.validate();
    if (image_dims.size() != 3)
        throw std::invalid_argument(std::string(what) + ": image tensor must be U x V x C");
    if (image_dims[0] != plan.rows() || image_dims[1] != plan.cols() ||
        image_dims[2] != plan.channels)
        throw std::invalid_argument(std::string(what) +
                                    ": plan factor products do not match the image dims");
}

// Zero-based index map shared by both directions: write the row index in
// mixed radix over the row factors (first factor fastest) as digits a_k, the
// column index over the col factors as digits b_k; output mode k holds
// a_k + u_k * b_k.
template <typename Fn>
void for_each_pixel_map(const TensorizationPlan& plan, Fn&& fn) {
    const std::size_t levels = plan.levels();
    const std::size_t rows = plan.rows(), cols = plan.cols(), chans = plan.channels;
    const auto out_dims = plan.output_dims();
    std::vector<std::size_t> out_strides(out_dims.size());
    std::size_t acc = 1;
    for (std::size_t k = 0; k < out_dims.size(); ++k) {
        out_strides[k] = acc;
        acc *= out_dims[k];
    }
    std::vector<std::size_t> a(levels), b(levels);
    for (std::size_t ch = 0; ch < chans; ++ch)
        for (std::size_t c = 0; c < cols; ++c) {
            std::size_t rem = c;
            for (std::size_t k = 0; k < levels; ++k) {
                b[k] = rem % plan.col_factors[k];
                rem /= plan.col_factors[k];
            }
            for (std::size_t r = 0; r < rows; ++r) {
                rem = r;
                std::size_t out_off = ch * out_strides[levels];
                for (std::size_t k = 0; k < levels; ++k) {
                    a[k] = rem % plan.row_factors[k];
                    rem /= plan.row_factors[k];
                    out_off += (a[k] + plan.row_factors[k] * b[k]) * out_strides[k];
                }
                const std::size_t img_off = r + rows * (c + cols * ch);
                fn(img_off, out_off);
            }
        }
}

}  // namespace detail

inline DenseTensor tensorize_visual(const DenseTensor& image, const TensorizationPlan& plan) {
    detail::require_plan_matches(plan, image.dims(), "tensorize_visual");
    std::vector<double> out(image.size());
    detail::for_each_pixel_map(plan, [&](std::size_t img_off, std::size_t out_off) {
        out[out_off] = image[img_off];
    });
    return DenseTensor::make_unchecked(plan.output_dims(), std::move(out));
}

/// Exact inverse of tensorize_visual: detensorize(tensorize(img)) == img
/// bit for bit.
inline DenseTensor detensorize_visual(const DenseTensor& tensor, const TensorizationPlan& plan) {
    plan.validate();
    if (tensor.dims() != plan.output_dims())
        throw std::invalid_argument("detensorize_visual: tensor dims do not match the plan");
    std::vector<double> out(tensor.size());
    detail::for_each_pixel_map(plan, [&](std::size_t img_off, std::size_t out_off) {
        out[img_off] = tensor[out_off];
    });
    return DenseTensor::make_unchecked({plan.rows(), plan.cols(), plan.channels}, std::move(out));
}

}  // namespace trwopt
