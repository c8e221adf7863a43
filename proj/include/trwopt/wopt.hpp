#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "trwopt/error.hpp"
#include "trwopt/line_search.hpp"
#include "trwopt/tensor.hpp"
#include "trwopt/tr_cores.hpp"

namespace trwopt {

struct OptimizerConfig {
    int max_iters = 500;
    double rel_tol = 1e-6;
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;
    int max_line_search_evals = 25;
    int cg_restart_period = 100;  ///< steepest-descent restart cadence; 0 disables
    std::uint64_t seed = 0;

    void validate() const {
        if (max_iters < 1) throw std::invalid_argument("OptimizerConfig: max_iters must be >= 1");
        if (!(rel_tol >= 0.0)) throw std::invalid_argument("OptimizerConfig: rel_tol must be >= 0");
        if (!(0.0 < wolfe_c1 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0))
            throw std::invalid_argument("OptimizerConfig: need 0 < c1 < c2 < 1");
        if (max_line_search_evals < 1)
            throw std::invalid_argument("OptimizerConfig: max_line_search_evals must be >= 1");
        if (cg_restart_period < 0)
            throw std::invalid_argument("OptimizerConfig: cg_restart_period must be >= 0");
    }
};

enum class StopReason { max_iters, tolerance, line_search };

inline const char* stop_reason_name(StopReason reason) {
    switch (reason) {
        case StopReason::max_iters: return "max_iters";
        case StopReason::tolerance: return "tolerance";
        case StopReason::line_search: return "line_search_failure";
    }
    return "unknown";
}

struct IterationRecord {
    int iter;
    double objective;
    double rel_change;  ///< ||X_k - X_{k-1}||_F / ||X_k||_F of the full reconstruction
};

struct CompletionReport {
    std::vector<IterationRecord> iterations;
    double final_rse = 0.0;  ///< ||W*(T - X)||_F / ||W*T||_F, the fit on observed entries
    StopReason stop_reason = StopReason::max_iters;
};

namespace detail {

inline void require_weight_shapes(const TRCores& cores, const DenseTensor& data,
                                  const DenseTensor& weight, const char* what) {
    if (data.dims() != weight.dims())
        throw std::invalid_argument(std::string(what) + ": data/weight dims mismatch");
    if (cores.dims() != data.dims())
        throw std::invalid_argument(std::string(what) + ": cores do not match data dims");
}

inline void require_binary(const DenseTensor& weight, const char* what) {
    for (std::size_t i = 0; i < weight.size(); ++i)
        if (weight[i] != 0.0 && weight[i] != 1.0)
            throw std::invalid_argument(std::string(what) + ": weight tensor must be 0/1 valued");
}

// Masked residual W * (X - T) together with the objective value
// f = 0.5 * ||W * (T - X)||_F^2.
inline DenseTensor masked_residual(const DenseTensor& recon, const DenseTensor& data,
                                   const DenseTensor& weight, double& objective_out) {
    std::vector<double> e(recon.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        e[i] = weight[i] * (recon[i] - data[i]);
        acc += e[i] * e[i];
    }
    objective_out = 0.5 * acc;
    return DenseTensor::make_unchecked(recon.dims(), std::move(e));
}

}  // namespace detail

/// Weighted least-squares objective: half the squared Frobenius norm of the
/// residual on observed entries. Missing entries contribute nothing.
inline double objective(const TRCores& cores, const DenseTensor& data, const DenseTensor& weight) {
    detail::require_weight_shapes(cores, data, weight, "objective");
    DenseTensor recon = reconstruct_full(cores);
    double f = 0.0;
    detail::masked_residual(recon, data, weight, f);
    return f;
}

/// Partial derivative of the objective with respect to the mode-2 unfolding
/// of core n, all other cores fixed: the masked residual unfolded at n times
/// the circular unfolding of the subchain. Shape I_n by R_n*R_{n+1}, columns
/// ordered like the core's own mode-2 unfolding (r_n fastest).
inline Matrix gradient(const TRCores& cores, const DenseTensor& data, const DenseTensor& weight,
                       std::size_t mode) {
    detail::require_weight_shapes(cores, data, weight, "gradient");
    detail::mode_to_axis(mode, cores.order(), "gradient");
    DenseTensor recon = reconstruct_full(cores);
    double f = 0.0;
    DenseTensor residual = detail::masked_residual(recon, data, weight, f);
    Matrix chain2 = unfold_shift(subchain(cores, mode), 2);
    return mat_mul(unfold_shift(residual, mode), chain2);
}

/// Gradients for every mode, sharing one reconstruction of the residual.
inline std::vector<Matrix> gradient_all(const TRCores& cores, const DenseTensor& data,
                                        const DenseTensor& weight) {
    detail::require_weight_shapes(cores, data, weight, "gradient_all");
    DenseTensor recon = reconstruct_full(cores);
    double f = 0.0;
    DenseTensor residual = detail::masked_residual(recon, data, weight, f);
    std::vector<Matrix> grads;
    grads.reserve(cores.order());
    for (std::size_t mode = 1; mode <= cores.order(); ++mode) {
        Matrix chain2 = unfold_shift(subchain(cores, mode), 2);
        grads.push_back(mat_mul(unfold_shift(residual, mode), chain2));
    }
    return grads;
}

/// Concatenates per-mode gradient matrices, n = 1..N, each in its own layout
/// order.
inline std::vector<double> pack(std::span<const Matrix> gradients) {
    std::size_t total = 0;
    for (const Matrix& m : gradients) total += m.size();
    std::vector<double> out;
    out.reserve(total);
    for (const Matrix& m : gradients) out.insert(out.end(), m.values().begin(), m.values().end());
    return out;
}

/// Splits a packed vector back into per-mode matrices shaped like the
/// gradients of `like`.
inline std::vector<Matrix> unpack(const TRCores& like, std::span<const double> packed) {
    const auto ranks = like.ranks();
    std::vector<Matrix> out;
    out.reserve(like.order());
    std::size_t off = 0;
    for (std::size_t k = 0; k < like.order(); ++k) {
        const std::size_t rows = like.cores()[k].dims()[1];
        const std::size_t cols = ranks[k] * ranks[k + 1];
        if (off + rows * cols > packed.size())
            throw std::invalid_argument("unpack: packed vector is too short");
        out.emplace_back(rows, cols,
                         std::vector<double>(packed.begin() + off, packed.begin() + off + rows * cols));
        off += rows * cols;
    }
    if (off != packed.size()) throw std::invalid_argument("unpack: packed vector is too long");
    return out;
}

/// Core variables in the same linear order as pack(gradient_all(...)): the
/// mode-2 unfolding of each core, n = 1..N.
inline std::vector<double> pack_cores(const TRCores& cores) {
    std::vector<double> out;
    out.reserve(cores.parameter_count());
    for (std::size_t n = 1; n <= cores.order(); ++n) {
        Matrix g2 = unfold_classic(cores.core(n), 2);
        out.insert(out.end(), g2.values().begin(), g2.values().end());
    }
    return out;
}

namespace detail {

// Rebuilds a ring from packed mode-2 unfoldings without value validation;
// finiteness is policed at the objective level.
inline TRCores cores_from_packed_unchecked(std::span<const std::size_t> dims,
                                           std::span<const std::size_t> full_ranks,
                                           std::span<const double> packed) {
    std::vector<DenseTensor> cores;
    cores.reserve(dims.size());
    std::size_t off = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        const std::size_t rl = full_ranks[k], len = dims[k], rr = full_ranks[k + 1];
        std::vector<double> data(rl * len * rr);
        // packed block: i fastest, then r, then s; core layout: r fastest.
        for (std::size_t s = 0; s < rr; ++s)
            for (std::size_t r = 0; r < rl; ++r)
                for (std::size_t i = 0; i < len; ++i)
                    data[r + rl * (i + len * s)] = packed[off + i + len * (r + rl * s)];
        off += rl * len * rr;
        cores.push_back(DenseTensor::make_unchecked({rl, len, rr}, std::move(data)));
    }
    return TRCores(std::move(cores));
}

}  // namespace detail

/// Inverse of pack_cores for a ring shaped like `like`.
inline TRCores cores_from_packed(const TRCores& like, std::span<const double> packed) {
    if (packed.size() != like.parameter_count())
        throw std::invalid_argument("cores_from_packed: packed length mismatch");
    const auto dims = like.dims();
    const auto ranks = like.ranks();
    return detail::cores_from_packed_unchecked(dims, ranks, packed);
}

/// Observed entries copied from the data tensor, missing entries filled from
/// the ring reconstruction.
inline DenseTensor complete(const DenseTensor& data, const DenseTensor& weight,
                            const TRCores& cores) {
    detail::require_weight_shapes(cores, data, weight, "complete");
    DenseTensor recon = reconstruct_full(cores);
    std::vector<double> out(data.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = weight[i] == 1.0 ? data[i] : recon[i];
    return DenseTensor::make_unchecked(data.dims(), std::move(out));
}

namespace detail {

struct WoptProblem {
    const DenseTensor& data;
    const DenseTensor& weight;
    std::vector<std::size_t> dims;
    std::vector<std::size_t> full_ranks;

    DenseTensor reconstruct(std::span<const double> x) const {
        return reconstruct_full(cores_from_packed_unchecked(dims, full_ranks, x));
    }

    double eval(std::span<const double> x, std::span<double> grad,
                DenseTensor* recon_out = nullptr) const {
        TRCores cores = cores_from_packed_unchecked(dims, full_ranks, x);
        DenseTensor recon = reconstruct_full(cores);
        double f = 0.0;
        DenseTensor residual = masked_residual(recon, data, weight, f);
        std::size_t off = 0;
        for (std::size_t mode = 1; mode <= cores.order(); ++mode) {
            Matrix chain2 = unfold_shift(subchain(cores, mode), 2);
            Matrix g = mat_mul(unfold_shift(residual, mode), chain2);
            std::copy(g.values().begin(), g.values().end(), grad.begin() + off);
            off += g.size();
        }
        if (recon_out) *recon_out = std::move(recon);
        return f;
    }
};

}  // namespace detail

/// Fits a ring of the given ranks to the observed entries of `data` by
/// nonlinear conjugate gradient (Polak-Ribiere+ with automatic restarts,
/// strong-Wolfe line search) over all core variables jointly. Stops at the
/// iteration cap or when the relative change of the full reconstruction
/// between consecutive iterations drops below rel_tol; a failed line search
/// terminates the run with the best iterate rather than throwing. Throws
/// numerical_error only if the objective is non-finite at the initial point.
inline std::pair<TRCores, CompletionReport> optimize(const DenseTensor& data,
                                                     const DenseTensor& weight,
                                                     std::span<const std::size_t> ranks,
                                                     const OptimizerConfig& cfg) {
    cfg.validate();
    if (data.dims() != weight.dims())
        throw std::invalid_argument("optimize: data/weight dims mismatch");
    detail::require_binary(weight, "optimize");
    const auto full_ranks = detail::normalize_ranks(ranks, data.order(), "optimize");

    TRCores start = init_random(data.dims(), full_ranks, cfg.seed);
    detail::WoptProblem prob{data, weight, data.dims(), full_ranks};

    std::vector<double> x = pack_cores(start);
    const std::size_t nv = x.size();
    std::vector<double> g(nv), g_old(nv), p(nv, 0.0), x_new(nv), g_new(nv);

    DenseTensor recon_prev;
    double f = prob.eval(x, g, &recon_prev);
    if (!std::isfinite(f)) throw numerical_error("optimize: objective is not finite at the start");

    CompletionReport report;
    report.stop_reason = StopReason::max_iters;

    LineSearchControl ls_ctl{cfg.wolfe_c1, cfg.wolfe_c2, cfg.max_line_search_evals};
    auto fg = [&prob](std::span<const double> xs, std::span<double> gs) {
        return prob.eval(xs, gs);
    };

    double gg = vec_dot(g, g);
    double alpha_prev = 0.0, dphi0_prev = 0.0;
    int since_restart = 0;

    if (gg == 0.0) {
        report.stop_reason = StopReason::tolerance;  // stationary from the start
    } else {
        for (int iter = 1; iter <= cfg.max_iters; ++iter) {
            bool restart = (iter == 1) || (cfg.cg_restart_period > 0 &&
                                           since_restart >= cfg.cg_restart_period);
            double beta = 0.0;
            if (!restart) {
                const double gg_old = vec_dot(g_old, g_old);
                beta = std::max(0.0, (gg - vec_dot(g, g_old)) / gg_old);
            }
            for (std::size_t i = 0; i < nv; ++i) p[i] = -g[i] + beta * p[i];
            double dphi0 = vec_dot(g, p);
            if (dphi0 >= 0.0) {  // not a descent direction: fall back to steepest descent
                for (std::size_t i = 0; i < nv; ++i) p[i] = -g[i];
                dphi0 = -gg;
                restart = true;
            }
            since_restart = restart ? 1 : since_restart + 1;

            double alpha0;
            if (iter == 1)
                alpha0 = std::min(1.0, 2.0 * std::max(f, 1e-12) / -dphi0);
            else
                alpha0 = alpha_prev * dphi0_prev / dphi0;
            if (!(alpha0 > 0.0 && std::isfinite(alpha0))) alpha0 = 1.0;
            alpha0 = std::clamp(alpha0, 1e-12, 1e12);

            LineSearchResult ls =
                strong_wolfe(fg, x, p, f, dphi0, alpha0, ls_ctl, x_new, g_new);
            if (ls.status == LineSearchStatus::failed) {
                report.stop_reason = StopReason::line_search;
                break;
            }
            x.swap(x_new);
            g_old.swap(g);
            g.swap(g_new);
            f = ls.f;
            gg = vec_dot(g, g);
            alpha_prev = ls.alpha;
            dphi0_prev = dphi0;

            DenseTensor recon = prob.reconstruct(x);
            const double change = frobenius_norm(subtract(recon, recon_prev));
            const double scale = frobenius_norm(recon);
            double rel_change;
            if (scale > 0.0)
                rel_change = change / scale;
            else
                rel_change = change > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
            report.iterations.push_back({iter, f, rel_change});
            recon_prev = std::move(recon);

            if (ls.status == LineSearchStatus::decrease_only) {
                report.stop_reason = StopReason::line_search;
                break;
            }
            if (rel_change < cfg.rel_tol) {
                report.stop_reason = StopReason::tolerance;
                break;
            }
            if (gg == 0.0) {
                report.stop_reason = StopReason::tolerance;
                break;
            }
        }
    }

    for (double v : x)
        if (!std::isfinite(v)) throw numerical_error("optimize: non-finite core variables");

    // Fit on observed entries: ||W*(T-X)||_F / ||W*T||_F.
    double obs_err = 0.0, obs_ref = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double r = weight[i] * (data[i] - recon_prev[i]);
        obs_err += r * r;
        const double tv = weight[i] * data[i];
        obs_ref += tv * tv;
    }
    report.final_rse = obs_ref > 0.0 ? std::sqrt(obs_err) / std::sqrt(obs_ref) : 0.0;

    TRCores final_cores =
        detail::cores_from_packed_unchecked(prob.dims, prob.full_ranks, x);
    return {std::move(final_cores), std::move(report)};
}

inline std::pair<TRCores, CompletionReport> optimize(const DenseTensor& data,
                                                     const DenseTensor& weight,
                                                     std::initializer_list<std::size_t> ranks,
                                                     const OptimizerConfig& cfg) {
    return optimize(data, weight, std::span<const std::size_t>(ranks.begin(), ranks.size()), cfg);
}

}  // namespace trwopt
