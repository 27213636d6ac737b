#pragma once

// Shared fixtures and brute-force oracles for the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "r2lda/r2lda.hpp"

namespace r2lda::test {

inline std::string tmp_path(const std::string& name) {
    return (std::filesystem::path(R2LDA_TEST_TMP) / name).string();
}

/// Random symmetric PSD matrix of rank `rank` (full rank when rank >= p).
inline Matrix random_psd(Eigen::Index p, Eigen::Index rank, Rng& rng) {
    const Matrix g = rng.normal_matrix(p, std::min(p, rank));
    return g * g.transpose() / static_cast<double>(std::max<Eigen::Index>(rank, 1));
}

/// Descending positive spectrum spanning roughly `decades` orders of magnitude.
inline Vector random_spectrum(Eigen::Index p, double decades, Rng& rng) {
    Vector d2(p);
    for (Eigen::Index k = 0; k < p; ++k) d2(k) = std::pow(10.0, decades * (rng.uniform() - 0.5));
    std::sort(d2.data(), d2.data() + p, std::greater<>());
    return d2;
}

/// Eigendecomposition with identity eigenvectors and the given spectrum.
inline std::shared_ptr<const EigenDecomposition> diagonal_eig(const Vector& d2) {
    auto e = std::make_shared<EigenDecomposition>();
    e->U = Matrix::Identity(d2.size(), d2.size());
    e->d2 = d2;
    return e;
}

// Secular functions written straight from their trace forms with dense matrices.

inline double copra_trace_oracle(double g, const Vector& d2, Eigen::Index p1, const Vector& d) {
    const Eigen::Index p = d2.size();
    const Matrix D2 = d2.asDiagonal();
    const Matrix ddT = d * d.transpose();
    const Matrix inv2 = (D2 + g * Matrix::Identity(p, p)).inverse() * (D2 + g * Matrix::Identity(p, p)).inverse();
    const Matrix D21 = D2.topLeftCorner(p1, p1);
    const Matrix inv21 = inv2.topLeftCorner(p1, p1);
    const Matrix w1 = (static_cast<double>(p) / p1) * D21 + g * Matrix::Identity(p1, p1);
    const double t1 = (D2 * inv2 * ddT).trace();
    return t1 * (inv21 * w1).trace() + (static_cast<double>(p - p1) / g) * t1 -
           (inv2 * ddT).trace() * (D21 * inv21 * w1).trace();
}

inline double bpr_trace_oracle(double g, const Vector& d2, const Vector& d) {
    const Eigen::Index p = d2.size();
    const Matrix inv = (Matrix(d2.asDiagonal()) + g * Matrix::Identity(p, p)).inverse();
    const Matrix ddT = d * d.transpose();
    return inv.trace() * (inv * ddT).trace() - static_cast<double>(p) * (inv * inv * ddT).trace();
}

// The same trace forms with every matrix diagonal except dd^T, so
// tr(M dd^T) = sum_k M_kk d_k^2. O(p) per evaluation, for fine grid scans.

inline double copra_trace_oracle_diag(double g, const Vector& d2, Eigen::Index p1, const Vector& d) {
    const Eigen::Index p = d2.size();
    const Vector inv2 = (d2.array() + g).square().inverse().matrix();
    const Vector dd = d.cwiseAbs2();
    const Vector w1 = ((static_cast<double>(p) / p1) * d2.head(p1).array() + g).matrix();
    const double t1 = d2.cwiseProduct(inv2).dot(dd);
    return t1 * inv2.head(p1).dot(w1) + (static_cast<double>(p - p1) / g) * t1 -
           inv2.dot(dd) * d2.head(p1).cwiseProduct(inv2.head(p1)).dot(w1);
}

inline double bpr_trace_oracle_diag(double g, const Vector& d2, const Vector& d) {
    const Vector inv = (d2.array() + g).inverse().matrix();
    const Vector dd = d.cwiseAbs2();
    return inv.sum() * inv.dot(dd) - static_cast<double>(d2.size()) * inv.cwiseAbs2().dot(dd);
}

/// Smallest positive root of f by a fine log-grid sign-change scan plus bisection.
template <class F>
std::optional<double> grid_bisection_root(F f, double lo, double hi, int points) {
    double prev_g = lo, prev_f = f(lo);
    for (int i = 1; i < points; ++i) {
        const double g = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
        const double fg = f(g);
        if (fg == 0.0) return g;
        if ((prev_f < 0.0) != (fg < 0.0)) {
            double a = prev_g, b = g, fa = prev_f;
            for (int it = 0; it < 200 && (b - a) > 1e-15 * b; ++it) {
                const double m = 0.5 * (a + b);
                const double fm = f(m);
                if ((fm < 0.0) == (fa < 0.0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            return 0.5 * (a + b);
        }
        prev_g = g;
        prev_f = fg;
    }
    return std::nullopt;
}

/// An observation drawn from the model d_k^2 ~ lambda_k s + s_v, for which the
/// secular equations have a root.
inline Vector model_observation(const Vector& d2, double signal, double noise, Rng& rng) {
    Vector d(d2.size());
    for (Eigen::Index k = 0; k < d2.size(); ++k) d(k) = std::sqrt(d2(k) * signal + noise) * rng.normal();
    return d;
}

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Exact error of the rule "class 0 iff w^T (x - mid) > t" for two Gaussian classes with equal priors.
inline double gaussian_linear_error(const Vector& w, const Vector& mid, double t, const Vector& m0, const Matrix& s0,
                                    const Vector& m1, const Matrix& s1) {
    const double mu0 = w.dot(m0 - mid) - t, sd0 = std::sqrt(w.dot(s0 * w));
    const double mu1 = w.dot(m1 - mid) - t, sd1 = std::sqrt(w.dot(s1 * w));
    return 0.5 * std_normal_cdf(-mu0 / sd0) + 0.5 * (1.0 - std_normal_cdf(-mu1 / sd1));
}

}  // namespace r2lda::test
