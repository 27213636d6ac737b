#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace r2lda;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("SymMatrix symmetrizes and rejects bad shapes", "[linalg]") {
    Matrix a(2, 2);
    a << 1, 2, 4, 3;
    const SymMatrix s(a);
    CHECK(s(0, 1) == 3.0);
    CHECK(s(1, 0) == 3.0);
    CHECK_THROWS_AS(SymMatrix(Matrix(2, 3)), InputError);
    CHECK_THROWS_AS(SymMatrix(Matrix(0, 0)), InputError);
}

TEST_CASE("sym_eig of a diagonal matrix", "[linalg]") {
    Matrix a = Matrix::Zero(3, 3);
    a.diagonal() << 1, 3, 2;
    const EigenDecomposition e = sym_eig(SymMatrix(a));
    CHECK(e.d2(0) == 3.0);
    CHECK(e.d2(1) == 2.0);
    CHECK(e.d2(2) == 1.0);
    CHECK_THAT(e.reconstruct().cwiseAbs().maxCoeff() - a.cwiseAbs().maxCoeff(), WithinAbs(0.0, 1e-14));
}

TEST_CASE("sym_eig of the 2x2 [[2,1],[1,2]]", "[linalg]") {
    Matrix a(2, 2);
    a << 2, 1, 1, 2;
    const EigenDecomposition e = sym_eig(SymMatrix(a));
    CHECK_THAT(e.d2(0), WithinAbs(3.0, 1e-14));
    CHECK_THAT(e.d2(1), WithinAbs(1.0, 1e-14));
    CHECK_THAT(std::abs(e.U(0, 0)), WithinAbs(1.0 / std::sqrt(2.0), 1e-14));
}

TEST_CASE("sym_eig properties on random PSD matrices", "[linalg]") {
    Rng rng(11);
    for (Eigen::Index p : {1, 5, 20, 60}) {
        const Matrix a = test::random_psd(p, p / 2 + 1, rng);
        const EigenDecomposition e = sym_eig(SymMatrix(a));
        for (Eigen::Index k = 1; k < p; ++k) CHECK(e.d2(k - 1) >= e.d2(k));
        CHECK((e.d2.array() >= 0.0).all());
        const double orth = (e.U.transpose() * e.U - Matrix::Identity(p, p)).norm();
        CHECK(orth < 1e-10 * std::sqrt(static_cast<double>(p)));
        const double rec = (e.reconstruct() - a).norm() / a.norm();
        CHECK(rec < 1e-10);
    }
}

TEST_CASE("rank-deficient input clamps tiny eigenvalues to zero", "[linalg]") {
    Rng rng(3);
    const Matrix a = test::random_psd(30, 5, rng);
    const EigenDecomposition e = sym_eig(SymMatrix(a));
    for (Eigen::Index k = 5; k < 30; ++k) CHECK(e.d2(k) == 0.0);
    CHECK(e.d2(4) > 0.0);
}

TEST_CASE("clamp_spectrum threshold", "[linalg]") {
    Vector d2(4);
    d2 << 1.0, 1e-11, 1e-13, -1e-15;
    const Vector c = clamp_spectrum(d2);
    CHECK(c(0) == 1.0);
    CHECK(c(1) == 1e-11);
    CHECK(c(2) == 0.0);
    CHECK(c(3) == 0.0);
    CHECK_THROWS_AS(clamp_spectrum(Vector()), InputError);
}

TEST_CASE("sym_eig rejects non-finite entries", "[linalg]") {
    Matrix a = Matrix::Identity(2, 2);
    a(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(sym_eig(SymMatrix(a)), InputError);
}

TEST_CASE("partition_eig uses min(n, p)", "[linalg]") {
    auto e = std::make_shared<const EigenDecomposition>(sym_eig(SymMatrix::identity(6)));
    const PartitionedEig small = partition_eig(e, 4, 6);
    CHECK(small.p1 == 4);
    CHECK(small.p2() == 2);
    CHECK(small.d2_sig.size() == 4);
    const PartitionedEig big = partition_eig(e, 100, 6);
    CHECK(big.p1 == 6);
    CHECK_THROWS_AS(partition_eig(e, 0, 6), InputError);
    CHECK_THROWS_AS(partition_eig(e, 3, 5), InputError);
}
