#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace trwopt {

inline double vec_dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double vec_norm(std::span<const double> a) { return std::sqrt(vec_dot(a, a)); }

struct LineSearchControl {
    double c1 = 1e-4;   ///< sufficient-decrease constant
    double c2 = 0.9;    ///< curvature constant
    int max_evals = 25; ///< total objective evaluations allowed per search
};

enum class LineSearchStatus {
    wolfe,          ///< both strong-Wolfe conditions hold at the returned step
    decrease_only,  ///< evaluation budget ran out; returning the best sufficient-decrease point
    failed,         ///< no step with sufficient decrease was found
};

struct LineSearchResult {
    LineSearchStatus status = LineSearchStatus::failed;
    double alpha = 0.0;
    double f = 0.0;
    int evals = 0;
};

/// Strong-Wolfe line search: bracketing stage plus zoom with safeguarded
/// quadratic interpolation. `fg(x, g)` returns the objective at x and fills
/// g; a NaN objective is treated as +inf so runaway trial steps shrink the
/// bracket instead of poisoning comparisons. Requires dphi0 < 0. On a
/// `wolfe` or `decrease_only` result, `x_out` and `g_out` hold the accepted
/// point and its gradient.
template <class F>
LineSearchResult strong_wolfe(F&& fg, std::span<const double> x0, std::span<const double> dir,
                              double f0, double dphi0, double alpha_init,
                              const LineSearchControl& ctl, std::vector<double>& x_out,
                              std::vector<double>& g_out) {
    const std::size_t n = x0.size();
    x_out.resize(n);
    g_out.resize(n);

    LineSearchResult res;
    if (!(dphi0 < 0.0)) return res;

    const double inf = std::numeric_limits<double>::infinity();
    double best_alpha = 0.0, best_f = f0;
    std::vector<double> best_x, best_g;

    auto evaluate = [&](double alpha, double& f, double& dphi) {
        for (std::size_t i = 0; i < n; ++i) x_out[i] = x0[i] + alpha * dir[i];
        f = fg(std::span<const double>(x_out), std::span<double>(g_out));
        if (std::isnan(f)) f = inf;
        dphi = vec_dot(g_out, dir);
        ++res.evals;
        if (f < best_f && f <= f0 + ctl.c1 * alpha * dphi0) {
            best_alpha = alpha;
            best_f = f;
            best_x.assign(x_out.begin(), x_out.end());
            best_g.assign(g_out.begin(), g_out.end());
        }
    };

    auto finish_wolfe = [&](double alpha, double f) {
        res.status = LineSearchStatus::wolfe;
        res.alpha = alpha;
        res.f = f;
        return res;
    };
    auto finish_best = [&]() {
        if (best_alpha > 0.0) {
            x_out = best_x;
            g_out = best_g;
            res.status = LineSearchStatus::decrease_only;
            res.alpha = best_alpha;
            res.f = best_f;
        }
        return res;
    };

    // Zoom keeps an interval [lo, hi] (not necessarily ordered) whose lo end
    // satisfies sufficient decrease and whose slope points across the
    // interval toward a Wolfe point.
    auto zoom = [&](double lo, double f_lo, double dphi_lo, double hi, double f_hi) {
        while (res.evals < ctl.max_evals) {
            const double d = hi - lo;
            if (std::abs(d) <= 1e-14 * std::max(1.0, std::abs(lo))) break;
            // Quadratic through (lo, f_lo, dphi_lo) and (hi, f_hi), clamped
            // to the interior of the bracket.
            double alpha;
            const double curv = (f_hi - f_lo - dphi_lo * d) / (d * d);
            if (std::isfinite(curv) && curv > 0.0)
                alpha = lo - dphi_lo / (2.0 * curv);
            else
                alpha = lo + 0.5 * d;
            const double a = std::min(lo, hi), b = std::max(lo, hi);
            const double pad = 0.1 * (b - a);
            if (!std::isfinite(alpha) || alpha < a + pad || alpha > b - pad)
                alpha = lo + 0.5 * d;

            double f_a, dphi_a;
            evaluate(alpha, f_a, dphi_a);
            if (f_a > f0 + ctl.c1 * alpha * dphi0 || f_a >= f_lo) {
                hi = alpha;
                f_hi = f_a;
            } else {
                if (std::abs(dphi_a) <= -ctl.c2 * dphi0) return finish_wolfe(alpha, f_a);
                if (dphi_a * (hi - lo) >= 0.0) {
                    hi = lo;
                    f_hi = f_lo;
                }
                lo = alpha;
                f_lo = f_a;
                dphi_lo = dphi_a;
            }
        }
        return finish_best();
    };

    double alpha_prev = 0.0, f_prev = f0, dphi_prev = dphi0;
    double alpha = (std::isfinite(alpha_init) && alpha_init > 0.0) ? alpha_init : 1.0;
    for (int i = 1; res.evals < ctl.max_evals; ++i) {
        double f_a, dphi_a;
        evaluate(alpha, f_a, dphi_a);
        if (f_a > f0 + ctl.c1 * alpha * dphi0 || (i > 1 && f_a >= f_prev))
            return zoom(alpha_prev, f_prev, dphi_prev, alpha, f_a);
        if (std::abs(dphi_a) <= -ctl.c2 * dphi0) return finish_wolfe(alpha, f_a);
        if (dphi_a >= 0.0) return zoom(alpha, f_a, dphi_a, alpha_prev, f_prev);
        alpha_prev = alpha;
        f_prev = f_a;
        dphi_prev = dphi_a;
        alpha *= 2.0;
        if (alpha > 1e12) break;
    }
    return finish_best();
}

}  // namespace trwopt
