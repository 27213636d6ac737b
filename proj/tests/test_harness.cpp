#include <catch_amalgamated.hpp>

#include <fstream>
#include <sstream>
#include <thread>

#include "support.hpp"

using namespace r2lda;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig c;
    SyntheticSource s;
    s.spec.p = 20;
    c.dataset = s;
    c.classifiers = {parse_classifier("LDA"), parse_classifier("R2LDA/COPRA"), parse_classifier("R2LDA/GCV")};
    c.train_sizes = {15, 30};
    c.noise_sigmas = {0.0, 0.1};
    c.trials_train = 6;
    c.trials_test = 10;
    c.master_seed = 42;
    c.record_timing = false;
    return c;
}

std::string read_all(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

const TrialReport& find(const std::vector<TrialReport>& rs, const std::string& clf, const std::string& sel,
                        Eigen::Index n, double sigma) {
    for (const auto& r : rs)
        if (r.classifier == clf && r.selector == sel && r.n == n && r.sigma == sigma) return r;
    throw std::runtime_error("cell not found");
}

}  // namespace

TEST_CASE("classifier names parse", "[harness]") {
    CHECK(parse_classifier("LDA").kind == ClassifierKind::lda);
    CHECK(parse_classifier("R2LDA/BPR").selector == SelectorKind::bpr);
    CHECK(parse_classifier("RLDA-static").selector == SelectorKind::copra);
    CHECK(parse_classifier("R2LDA/GCV").label() == "R2LDA/GCV");
    CHECK(parse_classifier("ORACLE-LDA").selector_name() == "none");
    CHECK_THROWS_AS(parse_classifier("QDA"), InputError);
    CHECK_THROWS_AS(parse_classifier("LDA/COPRA"), InputError);
}

TEST_CASE("config validation", "[harness]") {
    ExperimentConfig c = small_config();
    CHECK_NOTHROW(c.validate());
    c.trials_test = 0;
    CHECK_THROWS_AS(c.validate(), InputError);
    c = small_config();
    c.noise_sigmas = {-0.1};
    CHECK_THROWS_AS(c.validate(), InputError);
    c = small_config();
    c.classifiers.clear();
    CHECK_THROWS_AS(c.validate(), InputError);
}

TEST_CASE("measure_runtime", "[harness]") {
    const RuntimeStats noop = measure_runtime([] {}, 20);
    CHECK(noop.mean_s >= 0.0);
    CHECK(noop.mean_s < 1e-3);
    CHECK(noop.min_s <= noop.mean_s);
    const RuntimeStats sleep = measure_runtime([] { std::this_thread::sleep_for(std::chrono::milliseconds(10)); }, 3);
    CHECK(sleep.mean_s >= 0.009);
    CHECK(sleep.mean_s <= 0.050);
    CHECK_THROWS_AS(measure_runtime([] {}, 0), InputError);
}

TEST_CASE("CSV emission", "[harness]") {
    const auto empty = test::tmp_path("empty.csv");
    emit_csv({}, empty);
    CHECK(read_all(empty) == std::string(kReportCsvHeader) + "\n");

    TrialReport a;
    a.classifier = "R2LDA";
    a.selector = "COPRA";
    a.n = 100;
    a.sigma = 0.2;
    a.error_pct = 12.345678901234567;
    a.stderr_pct = 0.1 / 3.0;
    a.train_s = 1.5e-4;
    a.score_s_per_sample = 3.25e-6;
    a.fallback_count = 3;
    a.mean_gamma_b = 0.7;
    a.mean_gamma_z = 1e-300;
    TrialReport b = a;
    b.classifier = "LDA";
    b.selector = "none";
    b.n = 50;

    const auto two = test::tmp_path("two.csv");
    emit_csv({a, b}, two);
    const std::string text = read_all(two);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    CHECK(text.find("\nLDA,none,50,") < text.find("\nR2LDA,"));

    const auto back = parse_report_csv(two);
    REQUIRE(back.size() == 2);
    const TrialReport& r = back[1];
    CHECK(r.classifier == "R2LDA");
    CHECK(r.n == 100);
    CHECK_THAT(r.error_pct, WithinRel(a.error_pct, 1e-12));
    CHECK_THAT(r.stderr_pct, WithinRel(a.stderr_pct, 1e-12));
    CHECK_THAT(r.score_s_per_sample, WithinRel(a.score_s_per_sample, 1e-12));
    CHECK_THAT(r.mean_gamma_z, WithinRel(a.mean_gamma_z, 1e-12));
    CHECK(r.fallback_count == 3);
}

TEST_CASE("CSV emission failure leaves no file behind", "[harness]") {
    const std::string path = test::tmp_path("no-such-dir/out.csv");
    CHECK_THROWS_AS(emit_csv({}, path), Error);
    CHECK_FALSE(std::filesystem::exists(path));
    CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
}

TEST_CASE("experiment aggregates are conserved and bounded", "[harness]") {
    const ExperimentResult res = run_experiment(small_config());
    CHECK(res.failures.empty());
    REQUIRE(res.reports.size() == 3 * 2 * 2);
    for (const auto& r : res.reports) {
        CHECK(r.scored == 6 * 10 * 2);
        CHECK(r.error_pct == 100.0 * static_cast<double>(r.misclassified) / static_cast<double>(r.scored));
        CHECK(r.error_pct >= 0.0);
        CHECK(r.error_pct <= 100.0);
        CHECK(r.stderr_pct >= 0.0);
        CHECK(r.train_s == 0.0);
        if (r.classifier == "R2LDA") {
            CHECK(r.mean_gamma_b > 0.0);
            CHECK(r.mean_gamma_z > 0.0);
        } else {
            CHECK(r.mean_gamma_b == 0.0);
        }
    }
}

TEST_CASE("cells do not depend on iteration order or thread count", "[harness]") {
    const ExperimentConfig base = small_config();
    const auto a = run_experiment(base).reports;

    ExperimentConfig shuffled = base;
    std::reverse(shuffled.train_sizes.begin(), shuffled.train_sizes.end());
    std::reverse(shuffled.noise_sigmas.begin(), shuffled.noise_sigmas.end());
    std::reverse(shuffled.classifiers.begin(), shuffled.classifiers.end());
    shuffled.threads = 3;
    const auto b = run_experiment(shuffled).reports;
    CHECK(report_csv(a) == report_csv(b));

    ExperimentConfig subset = base;
    subset.classifiers = {parse_classifier("R2LDA/GCV")};
    subset.train_sizes = {30};
    const auto c = run_experiment(subset).reports;
    REQUIRE(c.size() == 2);
    const TrialReport& full = find(a, "R2LDA", "GCV", 30, 0.1);
    const TrialReport& part = find(c, "R2LDA", "GCV", 30, 0.1);
    CHECK(part.error_pct == full.error_pct);
    CHECK(part.mean_gamma_z == full.mean_gamma_z);
}

TEST_CASE("identical class distributions give chance-level error", "[harness]") {
    ExperimentConfig c = small_config();
    std::get<SyntheticSource>(c.dataset).spec.delta2 = 1e-12;
    c.classifiers = {parse_classifier("R2LDA/BPR")};
    c.train_sizes = {20};
    c.noise_sigmas = {0.0};
    c.trials_train = 40;
    c.trials_test = 10;
    const TrialReport r = run_experiment(c).reports.at(0);
    CHECK(std::abs(r.error_pct - 50.0) <= 3.0 * r.stderr_pct);
}

TEST_CASE("oracle LDA matches its analytic error", "[harness]") {
    ExperimentConfig c = small_config();
    c.classifiers = {parse_classifier("ORACLE-LDA")};
    c.train_sizes = {10};
    c.noise_sigmas = {0.0};
    c.trials_train = 40;
    c.trials_test = 25;
    const TrialReport r = run_experiment(c).reports.at(0);

    const SyntheticModel m = make_synthetic_model(std::get<SyntheticSource>(c.dataset).spec);
    const Matrix avg = 0.5 * (m.sigma0.matrix() + m.sigma1.matrix());
    const Vector w = avg.ldlt().solve(m.m0 - m.m1);
    const double exact = 100.0 * test::gaussian_linear_error(w, Vector::Zero(m.dim()), 0.0, m.m0, m.sigma0.matrix(),
                                                             m.m1, m.sigma1.matrix());
    CHECK(std::abs(r.error_pct - exact) <= 3.0 * r.stderr_pct + 0.5);
}

TEST_CASE("cell failures are recorded without aborting the run", "[harness]") {
    const auto path = test::tmp_path("pool.csv");
    {
        std::ofstream f(path);
        f << "a,b,label\n";
        Rng rng(1);
        for (int i = 0; i < 12; ++i) f << rng.normal() + (i % 2) << ',' << rng.normal() << ',' << (i % 2) << '\n';
    }
    ExperimentConfig c = small_config();
    CsvSource src;
    src.path = path;
    src.positive_label = "0";
    c.dataset = src;
    c.classifiers = {parse_classifier("LDA"), parse_classifier("ORACLE-LDA")};
    c.train_sizes = {3, 50};
    c.noise_sigmas = {0.0};
    const ExperimentResult res = run_experiment(c);
    REQUIRE(res.reports.size() == 1);
    CHECK(res.reports[0].classifier == "LDA");
    CHECK(res.reports[0].n == 3);
    CHECK(res.failures.size() == 3);
}

TEST_CASE("trial seeds depend on every cell coordinate", "[harness]") {
    const ClassifierSpec a = parse_classifier("R2LDA/COPRA"), b = parse_classifier("R2LDA/BPR");
    const auto s = trial_seed(1, "d", a, 50, 0.0, 0);
    CHECK(s == trial_seed(1, "d", a, 50, 0.0, 0));
    CHECK(s != trial_seed(2, "d", a, 50, 0.0, 0));
    CHECK(s != trial_seed(1, "e", a, 50, 0.0, 0));
    CHECK(s != trial_seed(1, "d", b, 50, 0.0, 0));
    CHECK(s != trial_seed(1, "d", a, 51, 0.0, 0));
    CHECK(s != trial_seed(1, "d", a, 50, 0.1, 0));
    CHECK(s != trial_seed(1, "d", a, 50, 0.0, 1));
}
