#pragma once

// Ridge estimation on y = Sigma^{1/2} c + v and automatic selection of the
// ridge parameter gamma: COPRA and BPR (roots of secular equations, Newton with
// a bracketing safeguard) and GCV (grid minimization).
//
// Every trace in the selection criteria is diagonal in the eigenbasis of Sigma,
// so all criteria are evaluated as O(p) sums over (d2_k, d_k) with d = U^T y.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "r2lda/errors.hpp"
#include "r2lda/linalg.hpp"

namespace r2lda {

/// Observation y of the linear model expressed in the eigenbasis: d = U^T y.
struct LinearModelView {
    std::shared_ptr<const EigenDecomposition> eig;
    Vector d;

    [[nodiscard]] static LinearModelView from_observation(std::shared_ptr<const EigenDecomposition> eig,
                                                          const Vector& y) {
        if (!eig || eig->dim() != y.size()) throw InputError("LinearModelView: dimension mismatch");
        LinearModelView v;
        v.d = eig->U.transpose() * y;
        v.eig = std::move(eig);
        return v;
    }

    [[nodiscard]] Eigen::Index dim() const { return d.size(); }
};

struct NewtonConfig {
    double initial_gamma_scale = 1e-6;  ///< gamma_0 = scale * mean(significant eigenvalues)
    double tol = 1e-9;                  ///< relative step |dg|/g
    int max_iter = 100;

    void validate() const {
        if (!(initial_gamma_scale > 0.0) || !(tol > 0.0) || max_iter < 1) {
            throw InputError("NewtonConfig: all fields must be strictly positive");
        }
    }
};

struct GcvGrid {
    int num_points = 200;
    double floor_ratio = 1e-12;

    void validate() const {
        if (num_points < 2 || !(floor_ratio > 0.0) || !(floor_ratio < 1.0)) {
            throw InputError("GcvGrid: need num_points >= 2 and 0 < floor_ratio < 1");
        }
    }
};

enum class SelectorKind { copra, bpr, gcv };

[[nodiscard]] inline std::string_view to_string(SelectorKind k) {
    switch (k) {
        case SelectorKind::copra: return "COPRA";
        case SelectorKind::bpr: return "BPR";
        case SelectorKind::gcv: return "GCV";
    }
    return "?";
}

[[nodiscard]] inline SelectorKind selector_kind_from_string(std::string_view s) {
    if (s == "COPRA" || s == "copra") return SelectorKind::copra;
    if (s == "BPR" || s == "bpr") return SelectorKind::bpr;
    if (s == "GCV" || s == "gcv") return SelectorKind::gcv;
    throw InputError("unknown selector '" + std::string(s) + "'");
}

struct RegSelector {
    SelectorKind kind = SelectorKind::copra;
    NewtonConfig newton;
    GcvGrid grid;
    double fallback_gamma_scale = 1e-3;

    void validate() const {
        newton.validate();
        grid.validate();
        if (!(fallback_gamma_scale > 0.0)) throw InputError("RegSelector: fallback scale must be > 0");
    }
};

enum class SelectionMethod { newton, bisection, grid, fallback };

/// Outcome of a gamma selection. `flagged` marks fallback values.
struct Selection {
    double gamma = 0.0;
    bool flagged = false;
    SelectionMethod method = SelectionMethod::fallback;
    int iterations = 0;
    /// Sign changes seen by the bracketing scan (0 when the scan did not run).
    int sign_changes = 0;
};

// ---------------------------------------------------------------------------
// Ridge estimate

/// c_hat = (Sigma + gamma I)^{-1} Sigma^{1/2} y = U diag(sqrt(d2)/(d2 + gamma)) d.
[[nodiscard]] inline Vector ridge_estimate(const LinearModelView& view, double gamma) {
    if (!(gamma > 0.0)) throw InputError("ridge_estimate: gamma must be > 0");
    const Vector& d2 = view.eig->d2;
    const Vector coeff = (d2.array().sqrt() / (d2.array() + gamma) * view.d.array()).matrix();
    Vector c = view.eig->U * coeff;
    if (!c.allFinite()) throw NumericError("ridge_estimate: non-finite result");
    return c;
}

// ---------------------------------------------------------------------------
// Secular functions

/// Value and analytic derivative of a secular function at one gamma.
/// `scale` is the sum of magnitudes of the terms whose difference is `value`;
/// |value| / scale measures how far the terms are from cancelling.
struct SecularValue {
    double value = 0.0;
    double derivative = 0.0;
    double scale = 0.0;
};

/// COPRA:
///   F(g) = T1 * A + ((p - p1) / g) * T1 - T2 * B
/// with u_k = d2_k + g, c = p / p1 and
///   T1 = sum_k d2_k d_k^2 / u_k^2          (all p)
///   T2 = sum_k d_k^2 / u_k^2               (all p)
///   A  = sum_{k<p1} (c d2_k + g) / u_k^2
///   B  = sum_{k<p1} d2_k (c d2_k + g) / u_k^2
[[nodiscard]] inline SecularValue copra_secular_eval(double gamma, const PartitionedEig& pe,
                                                     const Vector& d) {
    const Vector& d2 = pe.d2();
    const Eigen::Index p = d2.size();
    const Eigen::Index p1 = pe.p1;
    const double c = static_cast<double>(p) / static_cast<double>(p1);

    double t1 = 0.0, dt1 = 0.0, t2 = 0.0, dt2 = 0.0;
    double a = 0.0, da = 0.0, b = 0.0, db = 0.0;
    for (Eigen::Index k = 0; k < p; ++k) {
        const double lam = d2(k);
        const double u = lam + gamma;
        const double inv_u2 = 1.0 / (u * u);
        const double inv_u3 = inv_u2 / u;
        const double dk2 = d(k) * d(k);
        t1 += lam * dk2 * inv_u2;
        dt1 -= 2.0 * lam * dk2 * inv_u3;
        t2 += dk2 * inv_u2;
        dt2 -= 2.0 * dk2 * inv_u3;
        if (k < p1) {
            const double w = c * lam + gamma;
            const double dw = (1.0 - 2.0 * c) * lam - gamma;
            a += w * inv_u2;
            da += dw * inv_u3;
            b += lam * w * inv_u2;
            db += lam * dw * inv_u3;
        }
    }
    const double tail = static_cast<double>(p - p1) / gamma;
    const double dtail = -static_cast<double>(p - p1) / (gamma * gamma);

    SecularValue out;
    out.value = t1 * a + tail * t1 - t2 * b;
    out.derivative = dt1 * a + t1 * da + dtail * t1 + tail * dt1 - dt2 * b - t2 * db;
    out.scale = std::abs(t1 * a) + std::abs(tail * t1) + std::abs(t2 * b);
    if (!std::isfinite(out.value) || !std::isfinite(out.derivative)) {
        throw NumericError("copra_secular: non-finite value at gamma=" + std::to_string(gamma));
    }
    return out;
}

[[nodiscard]] inline double copra_secular(double gamma, const PartitionedEig& pe, const Vector& d) {
    if (!(gamma > 0.0)) throw InputError("copra_secular: gamma must be > 0");
    if (pe.p1 < 1) throw InputError("copra_secular: p1 must be >= 1");
    return copra_secular_eval(gamma, pe, d).value;
}

/// BPR:
///   F(g) = (sum_k 1/u_k) (sum_k d_k^2/u_k) - p sum_k d_k^2/u_k^2
[[nodiscard]] inline SecularValue bpr_secular_eval(double gamma, const Vector& d2, const Vector& d) {
    const Eigen::Index p = d2.size();
    double r = 0.0, dr = 0.0, s = 0.0, t2 = 0.0, dt2 = 0.0;
    for (Eigen::Index k = 0; k < p; ++k) {
        const double inv_u = 1.0 / (d2(k) + gamma);
        const double inv_u2 = inv_u * inv_u;
        const double dk2 = d(k) * d(k);
        r += inv_u;
        dr -= inv_u2;
        s += dk2 * inv_u;
        t2 += dk2 * inv_u2;
        dt2 -= 2.0 * dk2 * inv_u2 * inv_u;
    }
    const double pd = static_cast<double>(p);
    SecularValue out;
    out.value = r * s - pd * t2;
    // ds/dg = -t2
    out.derivative = dr * s - r * t2 - pd * dt2;
    out.scale = std::abs(r * s) + std::abs(pd * t2);
    if (!std::isfinite(out.value) || !std::isfinite(out.derivative)) {
        throw NumericError("bpr_secular: non-finite value at gamma=" + std::to_string(gamma));
    }
    return out;
}

[[nodiscard]] inline double bpr_secular(double gamma, const Vector& d2, const Vector& d) {
    if (!(gamma > 0.0)) throw InputError("bpr_secular: gamma must be > 0");
    return bpr_secular_eval(gamma, d2, d).value;
}

// ---------------------------------------------------------------------------
// Root finding

namespace detail {

/// mean of the eigenvalues that set the scale of gamma; 1 for an all-zero spectrum.
[[nodiscard]] inline double reference_scale(const Vector& d2_sig) {
    const double m = d2_sig.size() > 0 ? d2_sig.mean() : 0.0;
    return m > 0.0 ? m : 1.0;
}

inline constexpr double kScanLow = 1e-8;
inline constexpr double kScanHigh = 1e8;
inline constexpr int kScanPoints = 60;
inline constexpr double kFlatRatio = 1e-10;
inline constexpr double kResidualRatio = 1e-14;
inline constexpr double kCertifyWidth = 1e-6;

[[nodiscard]] inline Selection fallback_selection(double ref, double fallback_scale, int sign_changes) {
    Selection s;
    s.gamma = fallback_scale * ref;
    s.flagged = true;
    s.method = SelectionMethod::fallback;
    s.sign_changes = sign_changes;
    return s;
}

[[nodiscard]] inline double relative(const SecularValue& v) {
    return v.scale > 0.0 ? std::abs(v.value) / v.scale : 0.0;
}

/// Smallest positive root of a secular function.
///
/// Newton from gamma_0 = initial_gamma_scale * ref. If Newton leaves the positive
/// axis, leaves the scan window or runs out of iterations, the window
/// [1e-8 ref, 1e8 ref] is scanned on a log grid and the first sign change is
/// bisected. Identically-flat functions and functions without a sign change get
/// the flagged fallback gamma.
template <class Eval>
[[nodiscard]] Selection find_secular_root(const Eval& eval, double ref, const NewtonConfig& cfg,
                                          double fallback_scale) {
    cfg.validate();
    const double lo = kScanLow * ref;
    const double hi = kScanHigh * ref;

    // F == 0 for every gamma (isotropic spectrum, zero spectrum).
    {
        bool flat = true;
        for (double probe : {1e-4, 1.0, 1e4}) {
            if (relative(eval(probe * ref)) > kFlatRatio) {
                flat = false;
                break;
            }
        }
        if (flat) return fallback_selection(ref, fallback_scale, 0);
    }

    // A Newton candidate is accepted only if F changes sign across it; a
    // function that merely decays towards zero for large gamma is not a root.
    const auto certified = [&](double g) {
        const double a = eval(g * (1.0 - kCertifyWidth)).value;
        const double b = eval(g * (1.0 + kCertifyWidth)).value;
        return a == 0.0 || b == 0.0 || (a < 0.0) != (b < 0.0);
    };

    Selection out;
    double gamma = cfg.initial_gamma_scale * ref;
    for (int it = 1; it <= cfg.max_iter; ++it) {
        const SecularValue v = eval(gamma);
        std::optional<double> candidate;
        if (v.value == 0.0 || std::abs(v.value) <= kResidualRatio * v.scale) {
            candidate = gamma;
        } else {
            if (v.derivative == 0.0) break;
            const double next = gamma - v.value / v.derivative;
            if (!std::isfinite(next) || next <= 0.0 || next > hi) break;
            if (std::abs(next - gamma) < cfg.tol * gamma) candidate = next;
            gamma = next;
        }
        if (candidate) {
            if (!certified(*candidate)) break;
            out.gamma = *candidate;
            out.method = SelectionMethod::newton;
            out.iterations = it;
            return out;
        }
    }

    // Bracketing safeguard.
    const double step = std::log(hi / lo) / (kScanPoints - 1);
    int sign_changes = 0;
    double bracket_lo = 0.0, bracket_hi = 0.0, f_lo = 0.0;
    double prev_g = 0.0, prev_f = 0.0;  // last scan point with f != 0
    bool have_prev = false;
    for (int i = 0; i < kScanPoints; ++i) {
        const double g = (i == kScanPoints - 1) ? hi : lo * std::exp(step * i);
        const double f = eval(g).value;
        if (f == 0.0) {
            if (sign_changes++ == 0) bracket_lo = bracket_hi = g;
            have_prev = false;
            continue;
        }
        if (have_prev && (prev_f < 0.0) != (f < 0.0)) {
            if (sign_changes++ == 0) {
                bracket_lo = prev_g;
                bracket_hi = g;
                f_lo = prev_f;
            }
        }
        prev_g = g;
        prev_f = f;
        have_prev = true;
    }
    if (sign_changes == 0) return fallback_selection(ref, fallback_scale, 0);

    out.method = SelectionMethod::bisection;
    out.sign_changes = sign_changes;
    if (bracket_lo == bracket_hi) {
        out.gamma = bracket_lo;
        return out;
    }
    int it = 0;
    while (it < 200 && (bracket_hi - bracket_lo) > 1e-15 * bracket_hi) {
        ++it;
        const double mid = 0.5 * (bracket_lo + bracket_hi);
        const double fm = eval(mid).value;
        if (fm == 0.0) {
            bracket_lo = bracket_hi = mid;
            break;
        }
        if ((fm < 0.0) == (f_lo < 0.0)) {
            bracket_lo = mid;
            f_lo = fm;
        } else {
            bracket_hi = mid;
        }
    }
    out.gamma = 0.5 * (bracket_lo + bracket_hi);
    out.iterations = it;
    return out;
}

inline void require_nonzero_observation(const Vector& d, std::string_view who) {
    if (!(d.squaredNorm() > 0.0)) {
        throw DegenerateObservation(std::string(who) + ": observation vector is zero");
    }
}

}  // namespace detail

/// gamma for the COPRA secular equation.
[[nodiscard]] inline Selection copra_select(const PartitionedEig& pe, const Vector& d,
                                            const NewtonConfig& newton = {},
                                            double fallback_scale = 1e-3) {
    if (d.size() != pe.dim()) throw InputError("copra_select: dimension mismatch");
    if (pe.p1 < 1) throw InputError("copra_select: p1 must be >= 1");
    detail::require_nonzero_observation(d, "copra_select");
    const double ref = detail::reference_scale(pe.d2_sig);
    return detail::find_secular_root([&](double g) { return copra_secular_eval(g, pe, d); }, ref,
                                     newton, fallback_scale);
}

/// gamma for the BPR secular equation.
[[nodiscard]] inline Selection bpr_select(const EigenDecomposition& eig, const Vector& d,
                                          const NewtonConfig& newton = {},
                                          double fallback_scale = 1e-3) {
    if (d.size() != eig.dim()) throw InputError("bpr_select: dimension mismatch");
    detail::require_nonzero_observation(d, "bpr_select");
    const double ref = detail::reference_scale(eig.d2);
    return detail::find_secular_root([&](double g) { return bpr_secular_eval(g, eig.d2, d); }, ref,
                                     newton, fallback_scale);
}

// ---------------------------------------------------------------------------
// GCV

/// G(g) = sum_k (g/u_k)^2 d_k^2 / (sum_k g/u_k)^2. Returns +inf when the
/// denominator vanishes.
[[nodiscard]] inline double gcv_function(double gamma, const Vector& d2, const Vector& d) {
    if (gamma < 0.0) throw InputError("gcv_function: gamma must be >= 0");
    double num = 0.0, den = 0.0;
    for (Eigen::Index k = 0; k < d2.size(); ++k) {
        // Residual filter factor g/(d2_k + g); equals 1 on the null space at g = 0.
        const double f = (gamma == 0.0) ? (d2(k) == 0.0 ? 1.0 : 0.0) : gamma / (d2(k) + gamma);
        num += f * f * d(k) * d(k);
        den += f;
    }
    if (den == 0.0) return std::numeric_limits<double>::infinity();
    return num / (den * den);
}

/// num_points log-spaced values on [max(min positive d2, floor_ratio * max d2), max d2],
/// ascending, with duplicates removed.
[[nodiscard]] inline std::vector<double> gcv_grid_bounds(const Vector& d2, const GcvGrid& grid = {}) {
    grid.validate();
    if (d2.size() == 0) throw InputError("gcv_grid_bounds: empty spectrum");
    const double hi = d2.maxCoeff();
    if (!(hi > 0.0)) throw InputError("gcv_grid_bounds: spectrum is identically zero");
    double min_pos = hi;
    for (Eigen::Index k = 0; k < d2.size(); ++k) {
        if (d2(k) > 0.0) min_pos = std::min(min_pos, d2(k));
    }
    const double lo = std::max(min_pos, grid.floor_ratio * hi);

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(grid.num_points));
    const double ratio = std::log(hi / lo);
    for (int i = 0; i < grid.num_points; ++i) {
        double g;
        if (i == 0) {
            g = lo;
        } else if (i == grid.num_points - 1) {
            g = hi;
        } else {
            g = lo * std::exp(ratio * i / (grid.num_points - 1));
        }
        if (out.empty() || g > out.back()) out.push_back(g);
    }
    return out;
}

inline constexpr double kGcvFlatRatio = 1e-12;

/// Grid minimizer of G. Ties go to the smaller gamma; a G flat to within
/// 1e-12 relative returns the geometric midpoint of the grid, flagged.
[[nodiscard]] inline Selection gcv_select(const EigenDecomposition& eig, const Vector& d,
                                          const GcvGrid& grid = {}) {
    if (d.size() != eig.dim()) throw InputError("gcv_select: dimension mismatch");
    detail::require_nonzero_observation(d, "gcv_select");
    const std::vector<double> gammas = gcv_grid_bounds(eig.d2, grid);

    double best = std::numeric_limits<double>::infinity();
    double worst = -std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        const double g = gcv_function(gammas[i], eig.d2, d);
        if (g < best) {
            best = g;
            best_i = i;
        }
        worst = std::max(worst, g);
    }
    Selection out;
    out.iterations = static_cast<int>(gammas.size());
    if (worst - best <= kGcvFlatRatio * std::abs(worst)) {
        out.gamma = std::sqrt(gammas.front() * gammas.back());
        out.flagged = true;
        out.method = SelectionMethod::fallback;
        return out;
    }
    out.gamma = gammas[best_i];
    out.method = SelectionMethod::grid;
    return out;
}

// ---------------------------------------------------------------------------

/// MSE-minimizing ridge parameter p * sigma_v^2 / tr(Sigma_cc) for white noise
/// and white c. Only useful when both statistics are known, i.e. in simulation.
[[nodiscard]] inline double mse_optimal_gamma(double sigma_v2, double trace_scc, Eigen::Index p) {
    if (!(sigma_v2 > 0.0) || !(trace_scc > 0.0) || p < 1) {
        throw InputError("mse_optimal_gamma: arguments must be positive");
    }
    return static_cast<double>(p) * sigma_v2 / trace_scc;
}

/// Runs the configured selector on a model view.
[[nodiscard]] inline Selection select_gamma(const RegSelector& selector, const PartitionedEig& pe,
                                            const Vector& d) {
    switch (selector.kind) {
        case SelectorKind::copra:
            return copra_select(pe, d, selector.newton, selector.fallback_gamma_scale);
        case SelectorKind::bpr:
            return bpr_select(*pe.parent, d, selector.newton, selector.fallback_gamma_scale);
        case SelectorKind::gcv:
            return gcv_select(*pe.parent, d, selector.grid);
    }
    throw InputError("select_gamma: unknown selector");
}

}  // namespace r2lda
