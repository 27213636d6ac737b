#pragma once

// Per-class means and covariances, the pooled covariance and class priors.

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "r2lda/errors.hpp"
#include "r2lda/linalg.hpp"

namespace r2lda {

/// Two-class sample collection. Rows are samples, columns are features.
struct LabeledSet {
    Matrix class0;
    Matrix class1;

    [[nodiscard]] Eigen::Index dim() const {
        return class0.rows() > 0 ? class0.cols() : class1.cols();
    }
    [[nodiscard]] Eigen::Index n0() const { return class0.rows(); }
    [[nodiscard]] Eigen::Index n1() const { return class1.rows(); }
    [[nodiscard]] Eigen::Index size() const { return n0() + n1(); }
};

/// Throws InputError unless the set can be used to estimate class statistics:
/// at least two samples per class, one common dimension, finite entries.
inline void require_trainable(const LabeledSet& train) {
    if (train.n0() < 2 || train.n1() < 2) {
        throw InputError("training set needs >= 2 samples per class, got n0=" +
                         std::to_string(train.n0()) + " n1=" + std::to_string(train.n1()));
    }
    if (train.class0.cols() != train.class1.cols() || train.class0.cols() < 1) {
        throw InputError("training classes disagree on dimension");
    }
    if (!train.class0.allFinite() || !train.class1.allFinite()) {
        throw InputError("training set has non-finite entries");
    }
}

/// Denominator used for the pooled covariance.
///   n_plus_one:   ((n0-1) S0 + (n1-1) S1) / (n0 + n1 + 1)
///   conventional: ((n0-1) S0 + (n1-1) S1) / (n0 + n1 - 2)
enum class PooledDenominator { n_plus_one, conventional };

struct ClassStats {
    Vector m0, m1;
    Vector m_plus, m_minus;
    SymMatrix sigma0, sigma1, sigma_pooled;
    Eigen::Index n0 = 0, n1 = 0;
    double prior0 = 0.5, prior1 = 0.5;

    [[nodiscard]] Eigen::Index dim() const { return m0.size(); }
    [[nodiscard]] Eigen::Index n() const { return n0 + n1; }
    [[nodiscard]] double log_prior_ratio() const { return std::log(prior1 / prior0); }
};

struct StatsOptions {
    PooledDenominator pooled_denominator = PooledDenominator::n_plus_one;
    std::optional<std::pair<double, double>> prior_override;
};

[[nodiscard]] inline Vector sample_mean(const Matrix& samples) {
    if (samples.rows() < 1) throw InputError("sample_mean: empty class");
    return samples.colwise().mean().transpose();
}

/// Returns (m0, m1).
[[nodiscard]] inline std::pair<Vector, Vector> estimate_means(const LabeledSet& train) {
    return {sample_mean(train.class0), sample_mean(train.class1)};
}

/// Unbiased sample covariance, 1/(n-1) normalization.
[[nodiscard]] inline SymMatrix class_covariance(const Matrix& samples, const Vector& mean) {
    if (samples.rows() < 2) {
        throw InputError("class_covariance: need >= 2 samples, got " +
                         std::to_string(samples.rows()));
    }
    if (mean.size() != samples.cols()) throw InputError("class_covariance: mean dimension mismatch");
    const Matrix centered = samples.rowwise() - mean.transpose();
    Matrix scatter = Matrix::Zero(samples.cols(), samples.cols());
    scatter.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
    const Matrix full = scatter.selfadjointView<Eigen::Lower>();
    return SymMatrix(full / static_cast<double>(samples.rows() - 1));
}

[[nodiscard]] inline double pooled_denominator_value(Eigen::Index n0, Eigen::Index n1,
                                                     PooledDenominator kind) {
    return kind == PooledDenominator::n_plus_one ? static_cast<double>(n0 + n1 + 1)
                                            : static_cast<double>(n0 + n1 - 2);
}

[[nodiscard]] inline SymMatrix pooled_covariance(const SymMatrix& sigma0, Eigen::Index n0,
                                                 const SymMatrix& sigma1, Eigen::Index n1,
                                                 PooledDenominator kind = PooledDenominator::n_plus_one) {
    if (sigma0.dim() != sigma1.dim()) throw InputError("pooled_covariance: dimension mismatch");
    if (n0 < 1 || n1 < 1) throw InputError("pooled_covariance: class counts must be positive");
    const double denom = pooled_denominator_value(n0, n1, kind);
    if (!(denom > 0.0)) throw InputError("pooled_covariance: nonpositive denominator");
    return SymMatrix((static_cast<double>(n0 - 1) * sigma0.matrix() +
                      static_cast<double>(n1 - 1) * sigma1.matrix()) / denom);
}

/// Empirical class frequencies unless an override is given.
[[nodiscard]] inline std::pair<double, double> estimate_priors(
    Eigen::Index n0, Eigen::Index n1,
    const std::optional<std::pair<double, double>>& override_priors = std::nullopt) {
    if (n0 < 1 || n1 < 1) throw InputError("estimate_priors: class counts must be >= 1");
    if (override_priors) {
        const auto [a, b] = *override_priors;
        if (!(a > 0.0) || !(b > 0.0) || std::abs(a + b - 1.0) > 1e-12) {
            throw InputError("estimate_priors: override must be positive and sum to 1");
        }
        return {a, 1.0 - a};
    }
    const double n = static_cast<double>(n0 + n1);
    return {static_cast<double>(n0) / n, static_cast<double>(n1) / n};
}

[[nodiscard]] inline ClassStats estimate_class_stats(const LabeledSet& train,
                                                     const StatsOptions& options = {}) {
    require_trainable(train);
    ClassStats s;
    std::tie(s.m0, s.m1) = estimate_means(train);
    s.m_plus = s.m0 + s.m1;
    s.m_minus = s.m0 - s.m1;
    s.n0 = train.n0();
    s.n1 = train.n1();
    s.sigma0 = class_covariance(train.class0, s.m0);
    s.sigma1 = class_covariance(train.class1, s.m1);
    s.sigma_pooled = pooled_covariance(s.sigma0, s.n0, s.sigma1, s.n1, options.pooled_denominator);
    std::tie(s.prior0, s.prior1) = estimate_priors(s.n0, s.n1, options.prior_override);
    return s;
}

}  // namespace r2lda
