#pragma once

// Dense symmetric eigendecomposition and the spectrum views built on it.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "r2lda/errors.hpp"

namespace r2lda {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative threshold below which eigenvalues are treated as exact zeros.
inline constexpr double kSpectrumClampRatio = 1e-12;

/// Square symmetric matrix. Construction symmetrizes the input as (A + A^T) / 2.
class SymMatrix {
public:
    SymMatrix() = default;

    explicit SymMatrix(const Matrix& a) {
        if (a.rows() < 1 || a.rows() != a.cols()) {
            throw InputError("SymMatrix: expected a non-empty square matrix, got " +
                             std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
        }
        entries_ = 0.5 * (a + a.transpose());
    }

    static SymMatrix zero(Eigen::Index dim) { return SymMatrix(Matrix::Zero(dim, dim)); }
    static SymMatrix identity(Eigen::Index dim) { return SymMatrix(Matrix::Identity(dim, dim)); }

    [[nodiscard]] Eigen::Index dim() const { return entries_.rows(); }
    [[nodiscard]] const Matrix& matrix() const { return entries_; }
    [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

private:
    Matrix entries_;
};

/// Sigma = U diag(d2) U^T with d2 sorted descending and clamped to be nonnegative.
struct EigenDecomposition {
    Matrix U;
    Vector d2;

    [[nodiscard]] Eigen::Index dim() const { return d2.size(); }
    [[nodiscard]] Matrix reconstruct() const { return U * d2.asDiagonal() * U.transpose(); }
};

/// Leading p1 eigenvalues of a decomposition, the rest being treated as negligible.
struct PartitionedEig {
    std::shared_ptr<const EigenDecomposition> parent;
    Eigen::Index p1 = 0;
    Vector d2_sig;

    [[nodiscard]] Eigen::Index dim() const { return parent->dim(); }
    [[nodiscard]] Eigen::Index p2() const { return dim() - p1; }
    [[nodiscard]] const Vector& d2() const { return parent->d2; }
};

/// Zeroes every entry below kSpectrumClampRatio * max(d2). Negative round-off
/// is clamped the same way. Order is preserved.
[[nodiscard]] inline Vector clamp_spectrum(const Vector& d2) {
    if (d2.size() == 0) throw InputError("clamp_spectrum: empty spectrum");
    const double top = d2.maxCoeff();
    const double threshold = kSpectrumClampRatio * std::max(top, 0.0);
    Vector out = d2;
    for (Eigen::Index k = 0; k < out.size(); ++k) {
        if (out(k) < threshold) out(k) = 0.0;
    }
    return out;
}

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
/// Ties keep the solver's original index order.
[[nodiscard]] inline EigenDecomposition sym_eig(const SymMatrix& a) {
    const Matrix& m = a.matrix();
    if (!m.allFinite()) throw InputError("sym_eig: matrix has non-finite entries");

    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
        throw NumericError("sym_eig: eigensolver did not converge (dim " +
                           std::to_string(m.rows()) + ")");
    }
    const Vector& values = solver.eigenvalues();
    const Eigen::Index p = values.size();

    std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return values(i) > values(j); });

    EigenDecomposition out;
    out.U.resize(p, p);
    out.d2.resize(p);
    for (Eigen::Index k = 0; k < p; ++k) {
        const auto src = order[static_cast<std::size_t>(k)];
        out.U.col(k) = solver.eigenvectors().col(src);
        out.d2(k) = values(src);
    }
    out.d2 = clamp_spectrum(out.d2);
    return out;
}

/// Splits the spectrum at p1 = min(n, p).
[[nodiscard]] inline PartitionedEig partition_eig(std::shared_ptr<const EigenDecomposition> eig,
                                                  Eigen::Index n, Eigen::Index p) {
    if (n < 1) throw InputError("partition_eig: sample count must be >= 1");
    if (!eig || eig->dim() != p) throw InputError("partition_eig: dimension mismatch");
    PartitionedEig out;
    out.p1 = std::min(n, p);
    out.d2_sig = eig->d2.head(out.p1);
    out.parent = std::move(eig);
    return out;
}

}  // namespace r2lda
