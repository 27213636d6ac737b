// Train R2LDA with each selector on a synthetic problem and report test error.

#include <iostream>

#include "r2lda/r2lda.hpp"

int main() {
    r2lda::SyntheticSpec spec;
    spec.p = 100;
    spec.n0 = spec.n1 = 40;
    spec.test_n0 = spec.test_n1 = 500;
    spec.seed = 7;
    const r2lda::Dataset data = r2lda::gen_synthetic(spec);

    for (auto kind : {r2lda::SelectorKind::copra, r2lda::SelectorKind::bpr, r2lda::SelectorKind::gcv}) {
        r2lda::RegSelector sel;
        sel.kind = kind;
        const r2lda::R2ldaModel model = r2lda::train_r2lda(data.train, sel);

        long long wrong = 0, total = 0;
        for (int cls = 0; cls < 2; ++cls) {
            const r2lda::Matrix& x = cls == 0 ? data.test0 : data.test1;
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
                const auto s = r2lda::score_r2lda(model, x.row(i).transpose());
                wrong += r2lda::assign(s.score, model.log_prior_ratio) != cls;
                ++total;
            }
        }
        std::cout << r2lda::to_string(kind) << ": gamma_b = " << model.gamma_b << ", test error = "
                  << 100.0 * static_cast<double>(wrong) / static_cast<double>(total) << "%\n";
    }
}
