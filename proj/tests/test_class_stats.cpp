#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace r2lda;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

LabeledSet tiny_set() {
    LabeledSet s;
    s.class0.resize(2, 2);
    s.class0 << 0, 0, 2, 2;
    s.class1.resize(2, 2);
    s.class1 << 1, 3, 3, 1;
    return s;
}

// Explicit double loop over samples, no Eigen reductions.
Matrix loop_covariance(const Matrix& x) {
    const Eigen::Index n = x.rows(), p = x.cols();
    Vector mean = Vector::Zero(p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) mean(j) += x(i, j) / static_cast<double>(n);
    Matrix c = Matrix::Zero(p, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index a = 0; a < p; ++a)
            for (Eigen::Index b = 0; b < p; ++b) c(a, b) += (x(i, a) - mean(a)) * (x(i, b) - mean(b));
    return c / static_cast<double>(n - 1);
}

}  // namespace

TEST_CASE("means and per-class covariances on a tiny set", "[stats]") {
    const ClassStats s = estimate_class_stats(tiny_set());
    CHECK(s.m0 == Vector::Constant(2, 1.0));
    CHECK(s.m1 == Vector::Constant(2, 2.0));
    CHECK(s.m_minus == Vector::Constant(2, -1.0));
    Matrix expect0(2, 2);
    expect0 << 2, 2, 2, 2;
    Matrix expect1(2, 2);
    expect1 << 2, -2, -2, 2;
    CHECK((s.sigma0.matrix() - expect0).norm() < 1e-15);
    CHECK((s.sigma1.matrix() - expect1).norm() < 1e-15);
}

TEST_CASE("pooled covariance denominators", "[stats]") {
    const LabeledSet t = tiny_set();
    const ClassStats a = estimate_class_stats(t);
    // ((1) S0 + (1) S1) / 5 = diag(4/5)
    CHECK_THAT(a.sigma_pooled(0, 0), WithinAbs(0.8, 1e-15));
    CHECK_THAT(a.sigma_pooled(0, 1), WithinAbs(0.0, 1e-15));

    StatsOptions conv;
    conv.pooled_denominator = PooledDenominator::conventional;
    const ClassStats b = estimate_class_stats(t, conv);
    CHECK_THAT(b.sigma_pooled(0, 0), WithinAbs(2.0, 1e-15));
}

TEST_CASE("class covariance matches a loop oracle", "[stats]") {
    Rng rng(5);
    const Matrix x = rng.normal_matrix(17, 6);
    const Vector mean = sample_mean(x);
    const SymMatrix c = class_covariance(x, mean);
    CHECK((c.matrix() - loop_covariance(x)).norm() < 1e-12);
    CHECK((c.matrix() - c.matrix().transpose()).norm() == 0.0);
}

TEST_CASE("priors: empirical and override", "[stats]") {
    auto [a, b] = estimate_priors(30, 10);
    CHECK(a == 0.75);
    CHECK(b == 0.25);
    auto [c, d] = estimate_priors(30, 10, std::pair{0.5, 0.5});
    CHECK(c == 0.5);
    CHECK(d == 0.5);
    CHECK_THROWS_AS(estimate_priors(1, 1, std::pair{0.7, 0.7}), InputError);

    LabeledSet eq;
    eq.class0 = Matrix::Random(5, 3);
    eq.class1 = Matrix::Random(5, 3);
    CHECK(estimate_class_stats(eq).log_prior_ratio() == 0.0);
}

TEST_CASE("training set validation", "[stats]") {
    LabeledSet one;
    one.class0 = Matrix::Ones(1, 3);
    one.class1 = Matrix::Ones(4, 3);
    CHECK_THROWS_AS(estimate_class_stats(one), InputError);

    LabeledSet mismatched;
    mismatched.class0 = Matrix::Ones(3, 3);
    mismatched.class1 = Matrix::Ones(3, 4);
    CHECK_THROWS_AS(estimate_class_stats(mismatched), InputError);

    LabeledSet nan;
    nan.class0 = Matrix::Ones(3, 2);
    nan.class1 = Matrix::Ones(3, 2);
    nan.class1(1, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(estimate_class_stats(nan), InputError);
}

TEST_CASE("stats are invariant to sample order and covariances to translation", "[stats]") {
    Rng rng(9);
    LabeledSet t;
    t.class0 = rng.normal_matrix(12, 4);
    t.class1 = rng.normal_matrix(9, 4);
    const ClassStats base = estimate_class_stats(t);

    LabeledSet perm = t;
    perm.class0.row(0).swap(perm.class0.row(7));
    perm.class1.row(2).swap(perm.class1.row(8));
    const ClassStats ps = estimate_class_stats(perm);
    CHECK((ps.m0 - base.m0).norm() < 1e-14);
    CHECK((ps.sigma_pooled.matrix() - base.sigma_pooled.matrix()).norm() < 1e-13);

    LabeledSet shift = t;
    shift.class0.rowwise() += Eigen::RowVectorXd::Constant(4, 3.0);
    shift.class1.rowwise() += Eigen::RowVectorXd::Constant(4, 3.0);
    const ClassStats ss = estimate_class_stats(shift);
    CHECK((ss.sigma_pooled.matrix() - base.sigma_pooled.matrix()).norm() < 1e-12);
    CHECK((ss.m_minus - base.m_minus).norm() < 1e-12);
}

TEST_CASE("pooled covariance is PSD with rank at most n - 2", "[stats]") {
    Rng rng(21);
    LabeledSet t;
    t.class0 = rng.normal_matrix(6, 20);
    t.class1 = rng.normal_matrix(6, 20);
    const EigenDecomposition e = sym_eig(estimate_class_stats(t).sigma_pooled);
    CHECK((e.d2.array() >= 0.0).all());
    int positive = 0;
    for (Eigen::Index k = 0; k < e.d2.size(); ++k) positive += e.d2(k) > 0.0;
    CHECK(positive <= 10);
}
