#pragma once

// LDA, single-parameter RLDA and the doubly regularized R2LDA score functions,
// plus the class assignment rule shared by all three.

#include <cmath>
#include <memory>
#include <string>

#include "r2lda/class_stats.hpp"
#include "r2lda/errors.hpp"
#include "r2lda/linalg.hpp"
#include "r2lda/reg_select.hpp"

namespace r2lda {

inline constexpr int kClass0 = 0;
inline constexpr int kClass1 = 1;

/// Class 0 iff W > log(pi1 / pi0); the boundary goes to class 1.
[[nodiscard]] inline int assign(double score, double log_prior_ratio) {
    return score > log_prior_ratio ? kClass0 : kClass1;
}

namespace detail {

inline void require_dim(const Vector& x, Eigen::Index p, const char* who) {
    if (x.size() != p) {
        throw InputError(std::string(who) + ": expected dimension " + std::to_string(p) + ", got " +
                         std::to_string(x.size()));
    }
}

/// U^T (x - m_plus / 2)
[[nodiscard]] inline Vector rotated_centered(const EigenDecomposition& eig, const Vector& m_plus,
                                             const Vector& x) {
    return eig.U.transpose() * (x - 0.5 * m_plus);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// LDA

struct LdaModel {
    ClassStats stats;
    std::shared_ptr<const EigenDecomposition> eig;
    Vector mminus_rot;  ///< U^T m_minus
};

[[nodiscard]] inline LdaModel make_lda(ClassStats stats) {
    LdaModel m;
    m.eig = std::make_shared<const EigenDecomposition>(sym_eig(stats.sigma_pooled));
    m.mminus_rot = m.eig->U.transpose() * stats.m_minus;
    m.stats = std::move(stats);
    return m;
}

[[nodiscard]] inline LdaModel train_lda(const LabeledSet& train, const StatsOptions& options = {}) {
    return make_lda(estimate_class_stats(train, options));
}

/// (x - m_plus/2)^T Sigma^+ m_minus with the spectral pseudo-inverse.
[[nodiscard]] inline double score_lda(const LdaModel& model, const Vector& x) {
    detail::require_dim(x, model.stats.dim(), "score_lda");
    const Vector xr = detail::rotated_centered(*model.eig, model.stats.m_plus, x);
    const Vector& d2 = model.eig->d2;
    double w = 0.0;
    for (Eigen::Index k = 0; k < d2.size(); ++k) {
        if (d2(k) > 0.0) w += xr(k) * model.mminus_rot(k) / d2(k);
    }
    return w;
}

// ---------------------------------------------------------------------------
// RLDA, H = (I + gamma Sigma)^{-1}

struct RldaModel {
    ClassStats stats;
    std::shared_ptr<const EigenDecomposition> eig;
    double gamma = 0.0;
    Vector mminus_rot;
};

[[nodiscard]] inline RldaModel make_rlda(ClassStats stats, std::shared_ptr<const EigenDecomposition> eig,
                                         double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InputError("make_rlda: gamma must be > 0");
    if (!eig || eig->dim() != stats.dim()) throw InputError("make_rlda: dimension mismatch");
    RldaModel m;
    m.mminus_rot = eig->U.transpose() * stats.m_minus;
    m.eig = std::move(eig);
    m.gamma = gamma;
    m.stats = std::move(stats);
    return m;
}

[[nodiscard]] inline double score_rlda(const RldaModel& model, const Vector& x) {
    detail::require_dim(x, model.stats.dim(), "score_rlda");
    const Vector xr = detail::rotated_centered(*model.eig, model.stats.m_plus, x);
    const Vector& d2 = model.eig->d2;
    double w = 0.0;
    for (Eigen::Index k = 0; k < d2.size(); ++k) {
        w += xr(k) * model.mminus_rot(k) / (1.0 + model.gamma * d2(k));
    }
    return w;
}

// ---------------------------------------------------------------------------
// R2LDA

struct R2ldaModel {
    ClassStats stats;
    std::shared_ptr<const EigenDecomposition> eig;
    PartitionedEig pe;
    RegSelector selector;
    double gamma_b = 0.0;
    bool gamma_b_flagged = false;
    Vector b_hat;       ///< ridge estimate of b = Sigma^{-1/2} m_minus at gamma_b
    Vector mminus_rot;  ///< U^T m_minus
    double log_prior_ratio = 0.0;

    [[nodiscard]] Eigen::Index dim() const { return stats.dim(); }
};

struct R2ldaScore {
    double score = 0.0;
    double gamma_z = 0.0;
    bool gamma_z_flagged = false;
    /// x - m_plus/2 was exactly zero; score is 0 and gamma_z the fallback.
    bool degenerate = false;
};

/// sum_k d2_k xr_k mr_k / ((d2_k + gz)(d2_k + gb)), where xr = U^T x', mr = U^T m_minus.
/// Zero gammas are allowed as long as the spectrum is positive where used.
[[nodiscard]] inline double r2lda_score_rotated(const Vector& d2, const Vector& xr, const Vector& mr,
                                                double gamma_z, double gamma_b) {
    double w = 0.0;
    for (Eigen::Index k = 0; k < d2.size(); ++k) {
        if (d2(k) == 0.0) continue;
        w += d2(k) * xr(k) * mr(k) / ((d2(k) + gamma_z) * (d2(k) + gamma_b));
    }
    return w;
}

/// Steps 1-3 on precomputed statistics: EVD, partition at min(n, p), gamma_b on y = m_minus.
[[nodiscard]] inline R2ldaModel make_r2lda(ClassStats stats, const RegSelector& selector) {
    selector.validate();
    R2ldaModel m;
    m.eig = std::make_shared<const EigenDecomposition>(sym_eig(stats.sigma_pooled));
    m.pe = partition_eig(m.eig, stats.n(), stats.dim());
    m.selector = selector;
    const LinearModelView view = LinearModelView::from_observation(m.eig, stats.m_minus);
    Selection sel;
    try {
        sel = select_gamma(selector, m.pe, view.d);
    } catch (const DegenerateObservation&) {
        throw DegenerateObservation("train_r2lda: class means are identical (m0 - m1 == 0)");
    }
    m.gamma_b = sel.gamma;
    m.gamma_b_flagged = sel.flagged;
    m.b_hat = ridge_estimate(view, m.gamma_b);
    m.mminus_rot = view.d;
    m.log_prior_ratio = stats.log_prior_ratio();
    m.stats = std::move(stats);
    return m;
}

[[nodiscard]] inline R2ldaModel train_r2lda(const LabeledSet& train, const RegSelector& selector,
                                            const StatsOptions& options = {}) {
    return make_r2lda(estimate_class_stats(train, options), selector);
}

/// Steps 4-6 for one test sample: gamma_z from y = x', then the score.
[[nodiscard]] inline R2ldaScore score_r2lda(const R2ldaModel& model, const Vector& x) {
    detail::require_dim(x, model.dim(), "score_r2lda");
    const Vector xr = detail::rotated_centered(*model.eig, model.stats.m_plus, x);
    R2ldaScore out;
    if (!(xr.squaredNorm() > 0.0)) {
        out.degenerate = true;
        out.gamma_z_flagged = true;
        out.gamma_z = model.selector.fallback_gamma_scale * detail::reference_scale(model.pe.d2_sig);
        out.score = 0.0;
        return out;
    }
    const Selection sel = select_gamma(model.selector, model.pe, xr);
    out.gamma_z = sel.gamma;
    out.gamma_z_flagged = sel.flagged;
    out.score = r2lda_score_rotated(model.eig->d2, xr, model.mminus_rot, sel.gamma, model.gamma_b);
    return out;
}

}  // namespace r2lda
