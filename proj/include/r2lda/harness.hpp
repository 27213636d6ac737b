#pragma once

// Multi-trial experiment runner: classifier x selector x training size x test
// noise cells, each averaged over independent training trials that are each
// followed by a batch of test trials.
//
// Seeding: every (cell, trial) pair gets its own stream,
//   seed = H(master_seed, dataset, classifier, selector, n, sigma, trial),
// so a cell's numbers do not depend on which other cells run or in what order.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <variant>
#include <vector>

#include "r2lda/class_stats.hpp"
#include "r2lda/classifiers.hpp"
#include "r2lda/datasets.hpp"
#include "r2lda/errors.hpp"
#include "r2lda/random.hpp"
#include "r2lda/reg_select.hpp"

namespace r2lda {

inline constexpr std::string_view kHarnessVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Configuration

enum class ClassifierKind { lda, rlda_static, r2lda, oracle_lda };

struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::r2lda;
    SelectorKind selector = SelectorKind::copra;

    [[nodiscard]] bool uses_selector() const {
        return kind == ClassifierKind::r2lda || kind == ClassifierKind::rlda_static;
    }
    [[nodiscard]] std::string name() const {
        switch (kind) {
            case ClassifierKind::lda: return "LDA";
            case ClassifierKind::rlda_static: return "RLDA-static";
            case ClassifierKind::r2lda: return "R2LDA";
            case ClassifierKind::oracle_lda: return "ORACLE-LDA";
        }
        return "?";
    }
    [[nodiscard]] std::string selector_name() const {
        return uses_selector() ? std::string(to_string(selector)) : std::string("none");
    }
    [[nodiscard]] std::string label() const {
        return uses_selector() ? name() + "/" + selector_name() : name();
    }
};

/// Parses "LDA", "RLDA-static", "RLDA-static/BPR", "R2LDA/GCV", "ORACLE-LDA".
[[nodiscard]] inline ClassifierSpec parse_classifier(std::string_view s) {
    ClassifierSpec c;
    std::string_view head = s;
    std::optional<std::string_view> sel;
    if (const auto slash = s.find('/'); slash != std::string_view::npos) {
        head = s.substr(0, slash);
        sel = s.substr(slash + 1);
    }
    if (head == "LDA") {
        c.kind = ClassifierKind::lda;
    } else if (head == "RLDA-static") {
        c.kind = ClassifierKind::rlda_static;
    } else if (head == "R2LDA") {
        c.kind = ClassifierKind::r2lda;
    } else if (head == "ORACLE-LDA") {
        c.kind = ClassifierKind::oracle_lda;
    } else {
        throw InputError("unknown classifier '" + std::string(s) + "'");
    }
    if (sel) {
        if (!c.uses_selector()) throw InputError("classifier '" + std::string(head) + "' takes no selector");
        c.selector = selector_kind_from_string(*sel);
    }
    return c;
}

struct SyntheticSource {
    SyntheticSpec spec;  ///< p, delta2, offdiag, reference; counts and seed are set per trial
};
struct CsvSource {
    std::string path;
    std::string label_column = "label";
    std::string positive_label;
    std::optional<std::string> negative_label;
};
struct IdxSource {
    std::string images;
    std::string labels;
    std::pair<int, int> digits{1, 7};
};
using DatasetSource = std::variant<SyntheticSource, CsvSource, IdxSource>;

[[nodiscard]] inline std::string dataset_key(const DatasetSource& src) {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, SyntheticSource>) {
                std::ostringstream o;
                o << "synthetic:p=" << s.spec.p << ":delta2=" << s.spec.delta2
                  << ":offdiag=" << s.spec.offdiag << ":ref=" << to_string(s.spec.reference);
                return o.str();
            } else if constexpr (std::is_same_v<T, CsvSource>) {
                return "csv:" + std::filesystem::path(s.path).filename().string() + ":" + s.label_column +
                       ":" + s.positive_label + ":" + s.negative_label.value_or("*");
            } else {
                return "idx:" + std::filesystem::path(s.images).filename().string() + ":" +
                       std::to_string(s.digits.first) + "," + std::to_string(s.digits.second);
            }
        },
        src);
}

struct ExperimentConfig {
    std::string name = "experiment";
    DatasetSource dataset = SyntheticSource{};
    std::vector<ClassifierSpec> classifiers;
    std::vector<Eigen::Index> train_sizes;  ///< samples per class
    std::vector<double> noise_sigmas{0.0};
    int trials_train = 100;
    int trials_test = 50;
    /// Samples drawn from each class in one test trial.
    int test_per_class = 1;
    std::optional<Eigen::Index> feature_selection;
    bool rescale = true;
    bool record_timing = true;
    std::uint64_t master_seed = 0;
    int threads = 1;
    std::string output;
    StatsOptions stats;
    NewtonConfig newton;
    GcvGrid grid;
    double fallback_gamma_scale = 1e-3;

    void validate() const {
        if (classifiers.empty()) throw InputError("config: no classifiers");
        if (train_sizes.empty()) throw InputError("config: no training sizes");
        if (noise_sigmas.empty()) throw InputError("config: no noise levels");
        if (trials_train < 1 || trials_test < 1 || test_per_class < 1) {
            throw InputError("config: trial counts must be >= 1");
        }
        for (auto n : train_sizes)
            if (n < 2) throw InputError("config: training sizes must be >= 2 per class");
        for (double s : noise_sigmas)
            if (!(s >= 0.0)) throw InputError("config: noise sigmas must be >= 0");
        if (feature_selection && *feature_selection < 1) throw InputError("config: feature_selection must be >= 1");
        if (threads < 1) throw InputError("config: threads must be >= 1");
        newton.validate();
        grid.validate();
        if (!(fallback_gamma_scale > 0.0)) throw InputError("config: fallback_gamma_scale must be > 0");
    }

    [[nodiscard]] RegSelector selector(SelectorKind kind) const {
        RegSelector s;
        s.kind = kind;
        s.newton = newton;
        s.grid = grid;
        s.fallback_gamma_scale = fallback_gamma_scale;
        return s;
    }
};

// ---------------------------------------------------------------------------
// Reports

struct TrialReport {
    std::string classifier;
    std::string selector;
    Eigen::Index n = 0;
    double sigma = 0.0;
    double error_pct = 0.0;
    double stderr_pct = 0.0;
    double train_s = 0.0;
    double score_s_per_sample = 0.0;
    long long fallback_count = 0;
    double mean_gamma_b = 0.0;
    double mean_gamma_z = 0.0;

    // Not part of the CSV.
    long long misclassified = 0;
    long long scored = 0;
    int trials = 0;
    std::vector<double> trial_error_pct;
};

struct CellFailure {
    std::string classifier;
    std::string selector;
    Eigen::Index n = 0;
    double sigma = 0.0;
    std::string message;
};

struct ExperimentResult {
    std::vector<TrialReport> reports;
    std::vector<CellFailure> failures;
};

// ---------------------------------------------------------------------------
// Runtime measurement

struct RuntimeStats {
    double mean_s = 0.0;
    double min_s = 0.0;
    int repetitions = 0;
};

/// Wall-clock mean and min of `work` over `repetitions` runs (steady clock).
inline RuntimeStats measure_runtime(const std::function<void()>& work, int repetitions) {
    if (repetitions < 1) throw InputError("measure_runtime: repetitions must be >= 1");
    using clock = std::chrono::steady_clock;
    RuntimeStats out;
    out.repetitions = repetitions;
    double total = 0.0;
    out.min_s = std::numeric_limits<double>::infinity();
    for (int r = 0; r < repetitions; ++r) {
        const auto t0 = clock::now();
        work();
        const double dt = std::chrono::duration<double>(clock::now() - t0).count();
        total += dt;
        out.min_s = std::min(out.min_s, dt);
    }
    out.mean_s = total / repetitions;
    return out;
}

// ---------------------------------------------------------------------------
// Trial machinery

namespace detail {

/// Data source prepared once per experiment.
struct PreparedSource {
    std::optional<SyntheticModel> model;
    LabeledSet pool;  ///< real data: every available sample
    std::string key;
};

[[nodiscard]] inline PreparedSource prepare_source(const DatasetSource& src) {
    PreparedSource out;
    out.key = dataset_key(src);
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, SyntheticSource>) {
                out.model = make_synthetic_model(s.spec);
            } else if constexpr (std::is_same_v<T, CsvSource>) {
                out.pool = load_csv(s.path, s.label_column, s.positive_label, s.negative_label).train;
            } else {
                out.pool = load_idx(s.images, s.labels, s.digits).train;
            }
        },
        src);
    return out;
}

[[nodiscard]] inline Matrix take_rows(const Matrix& m, const std::vector<Eigen::Index>& rows,
                                      std::size_t begin, std::size_t end) {
    Matrix out(static_cast<Eigen::Index>(end - begin), m.cols());
    for (std::size_t i = begin; i < end; ++i) out.row(static_cast<Eigen::Index>(i - begin)) = m.row(rows[i]);
    return out;
}

/// One training set of n per class plus trials_test * test_per_class test samples per class.
[[nodiscard]] inline Dataset draw_trial_data(const PreparedSource& src, Eigen::Index n, int test_count,
                                             Rng& rng) {
    Dataset d;
    if (src.model) {
        d.train.class0 = src.model->sample(0, n, rng);
        d.train.class1 = src.model->sample(1, n, rng);
        d.test0 = src.model->sample(0, test_count, rng);
        d.test1 = src.model->sample(1, test_count, rng);
        d.meta.name = "synthetic";
        return d;
    }
    auto split = [&](const Matrix& pool, Matrix& train, Matrix& test) {
        if (pool.rows() <= n) {
            throw InputError("dataset has " + std::to_string(pool.rows()) +
                             " samples in a class; need more than the training size " + std::to_string(n));
        }
        std::vector<Eigen::Index> order(static_cast<std::size_t>(pool.rows()));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        rng.shuffle(order);
        const auto nn = static_cast<std::size_t>(n);
        train = take_rows(pool, order, 0, nn);
        // Test trials draw from the held-out rows only, with replacement across trials.
        const std::size_t holdout = order.size() - nn;
        test.resize(test_count, pool.cols());
        for (int i = 0; i < test_count; ++i) {
            const auto pick = nn + static_cast<std::size_t>(rng.below(holdout));
            test.row(i) = pool.row(order[pick]);
        }
    };
    split(src.pool.class0, d.train.class0, d.test0);
    split(src.pool.class1, d.train.class1, d.test1);
    d.meta.name = src.key;
    return d;
}

struct TrialOutcome {
    long long misclassified = 0;
    long long scored = 0;
    double train_s = 0.0;
    double score_s = 0.0;
    long long fallbacks = 0;
    double gamma_b = 0.0;
    double gamma_z_sum = 0.0;
    long long gamma_z_count = 0;
};

/// True-parameter LDA for synthetic data, mapped through the same affine
/// rescaling and feature selection as the trial data.
struct OracleLda {
    Vector mid;
    Vector direction;  ///< Sigma^{-1} (m0 - m1)
    double log_prior_ratio = 0.0;

    [[nodiscard]] double score(const Vector& x) const { return (x - mid).dot(direction); }
};

[[nodiscard]] inline OracleLda make_oracle(const SyntheticModel& model, const std::optional<ScalingRecord>& scaling,
                                           const std::optional<std::vector<Eigen::Index>>& features) {
    Vector m0 = model.m0, m1 = model.m1;
    Matrix sigma = 0.5 * (model.sigma0.matrix() + model.sigma1.matrix());
    if (scaling && !scaling->degenerate()) {
        const double alpha = 2.0 / (scaling->max - scaling->min);
        const double beta = -2.0 * scaling->min / (scaling->max - scaling->min) - 1.0;
        m0 = (alpha * m0.array() + beta).matrix();
        m1 = (alpha * m1.array() + beta).matrix();
        sigma *= alpha * alpha;
    }
    if (features) {
        const auto& idx = *features;
        const auto k = static_cast<Eigen::Index>(idx.size());
        Vector s0(k), s1(k);
        Matrix ss(k, k);
        for (Eigen::Index i = 0; i < k; ++i) {
            s0(i) = m0(idx[static_cast<std::size_t>(i)]);
            s1(i) = m1(idx[static_cast<std::size_t>(i)]);
            for (Eigen::Index j = 0; j < k; ++j)
                ss(i, j) = sigma(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        }
        m0 = s0;
        m1 = s1;
        sigma = ss;
    }
    OracleLda o;
    o.mid = 0.5 * (m0 + m1);
    o.direction = sigma.llt().solve(m0 - m1);
    return o;
}

[[nodiscard]] inline TrialOutcome run_trial(const ExperimentConfig& cfg, const PreparedSource& src,
                                            const ClassifierSpec& clf, Eigen::Index n, double sigma,
                                            std::uint64_t seed) {
    using clock = std::chrono::steady_clock;
    Rng rng(seed);
    const int test_count = cfg.trials_test * cfg.test_per_class;
    Dataset data = draw_trial_data(src, n, test_count, rng);

    std::optional<ScalingRecord> scaling;
    if (cfg.rescale) {
        auto [scaled, rec] = rescale_unit_interval(data);
        data = std::move(scaled);
        scaling = rec;
    }
    std::optional<std::vector<Eigen::Index>> features;
    if (cfg.feature_selection) {
        features = ttest_select(data.train, *cfg.feature_selection);
        data = apply_feature_selection(data, *features);
    }
    data.test0 = add_noise(data.test0, sigma, rng);
    data.test1 = add_noise(data.test1, sigma, rng);

    TrialOutcome out;
    std::function<std::pair<double, double>(const Vector&)> scorer;  // (W, threshold)
    std::function<void()> train;

    std::optional<LdaModel> lda;
    std::optional<RldaModel> rlda;
    std::optional<R2ldaModel> r2;
    std::optional<OracleLda> oracle;

    const auto t0 = clock::now();
    switch (clf.kind) {
        case ClassifierKind::lda:
            lda = train_lda(data.train, cfg.stats);
            break;
        case ClassifierKind::rlda_static: {
            // gamma_b lives on the ridge scale (Sigma + g I); H = (I + g' Sigma)^{-1}
            // with g' = 1/gamma_b applies the same shrinkage to Sigma.
            ClassStats stats = estimate_class_stats(data.train, cfg.stats);
            const R2ldaModel base = make_r2lda(stats, cfg.selector(clf.selector));
            out.gamma_b = base.gamma_b;
            out.fallbacks += base.gamma_b_flagged ? 1 : 0;
            rlda = make_rlda(std::move(stats), base.eig, 1.0 / base.gamma_b);
            break;
        }
        case ClassifierKind::r2lda:
            r2 = train_r2lda(data.train, cfg.selector(clf.selector), cfg.stats);
            out.gamma_b = r2->gamma_b;
            out.fallbacks += r2->gamma_b_flagged ? 1 : 0;
            break;
        case ClassifierKind::oracle_lda:
            if (!src.model) throw InputError("ORACLE-LDA needs a synthetic dataset");
            oracle = make_oracle(*src.model, scaling, features);
            break;
    }
    const auto t1 = clock::now();

    const double threshold = lda      ? lda->stats.log_prior_ratio()
                             : rlda   ? rlda->stats.log_prior_ratio()
                             : r2     ? r2->log_prior_ratio
                                      : 0.0;
    auto score_one = [&](const Vector& x) -> double {
        if (lda) return score_lda(*lda, x);
        if (rlda) return score_rlda(*rlda, x);
        if (oracle) return oracle->score(x);
        const R2ldaScore s = score_r2lda(*r2, x);
        out.gamma_z_sum += s.gamma_z;
        ++out.gamma_z_count;
        out.fallbacks += s.gamma_z_flagged ? 1 : 0;
        return s.score;
    };
    for (int cls = 0; cls < 2; ++cls) {
        const Matrix& test = cls == 0 ? data.test0 : data.test1;
        for (Eigen::Index i = 0; i < test.rows(); ++i) {
            const int label = assign(score_one(test.row(i).transpose()), threshold);
            out.misclassified += (label != cls) ? 1 : 0;
            ++out.scored;
        }
    }
    const auto t2 = clock::now();
    if (cfg.record_timing) {
        out.train_s = std::chrono::duration<double>(t1 - t0).count();
        out.score_s = std::chrono::duration<double>(t2 - t1).count();
    }
    return out;
}

/// Runs body(i) for i in [0, count) on `threads` workers. The first exception is rethrown.
inline void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    const int workers = std::min(threads, count);
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = count;
                }
            }
        });
    }
    pool.clear();
    if (error) std::rethrow_exception(error);
}

}  // namespace detail

[[nodiscard]] inline std::uint64_t trial_seed(std::uint64_t master, const std::string& dataset,
                                              const ClassifierSpec& clf, Eigen::Index n, double sigma,
                                              int trial) {
    return SeedHasher(master)
        .add(std::string_view(dataset))
        .add(std::string_view(clf.name()))
        .add(std::string_view(clf.selector_name()))
        .add(static_cast<std::uint64_t>(n))
        .add(sigma)
        .add(static_cast<std::uint64_t>(trial))
        .value();
}

/// Aggregates one cell. Sums run in trial order so the result is independent of threading.
[[nodiscard]] inline TrialReport run_cell(const ExperimentConfig& cfg, const detail::PreparedSource& src,
                                          const ClassifierSpec& clf, Eigen::Index n, double sigma) {
    std::vector<detail::TrialOutcome> trials(static_cast<std::size_t>(cfg.trials_train));
    detail::parallel_for(cfg.trials_train, cfg.threads, [&](int t) {
        trials[static_cast<std::size_t>(t)] =
            detail::run_trial(cfg, src, clf, n, sigma, trial_seed(cfg.master_seed, src.key, clf, n, sigma, t));
    });

    TrialReport r;
    r.classifier = clf.name();
    r.selector = clf.selector_name();
    r.n = n;
    r.sigma = sigma;
    r.trials = cfg.trials_train;
    double train_total = 0.0, score_total = 0.0, gamma_b_total = 0.0, gamma_z_total = 0.0;
    long long gamma_z_count = 0;
    for (const auto& t : trials) {
        r.misclassified += t.misclassified;
        r.scored += t.scored;
        train_total += t.train_s;
        score_total += t.score_s;
        r.fallback_count += t.fallbacks;
        gamma_b_total += t.gamma_b;
        gamma_z_total += t.gamma_z_sum;
        gamma_z_count += t.gamma_z_count;
        r.trial_error_pct.push_back(100.0 * static_cast<double>(t.misclassified) / static_cast<double>(t.scored));
    }
    r.error_pct = 100.0 * static_cast<double>(r.misclassified) / static_cast<double>(r.scored);
    if (r.trials > 1) {
        double mean = 0.0;
        for (double e : r.trial_error_pct) mean += e;
        mean /= r.trials;
        double ss = 0.0;
        for (double e : r.trial_error_pct) ss += (e - mean) * (e - mean);
        r.stderr_pct = std::sqrt(ss / (r.trials - 1)) / std::sqrt(static_cast<double>(r.trials));
    }
    r.train_s = train_total / r.trials;
    r.score_s_per_sample = score_total / static_cast<double>(r.scored);
    r.mean_gamma_b = clf.uses_selector() ? gamma_b_total / r.trials : 0.0;
    r.mean_gamma_z = gamma_z_count > 0 ? gamma_z_total / static_cast<double>(gamma_z_count) : 0.0;
    return r;
}

/// Runs every (classifier, n, sigma) cell. Cell errors are recorded, not propagated.
[[nodiscard]] inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const detail::PreparedSource src = detail::prepare_source(cfg.dataset);
    ExperimentResult out;
    for (const auto& clf : cfg.classifiers) {
        for (const auto n : cfg.train_sizes) {
            for (const double sigma : cfg.noise_sigmas) {
                try {
                    out.reports.push_back(run_cell(cfg, src, clf, n, sigma));
                } catch (const std::exception& e) {
                    out.failures.push_back({clf.name(), clf.selector_name(), n, sigma, e.what()});
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV output

inline constexpr std::string_view kReportCsvHeader =
    "classifier,selector,n,sigma,error_pct,stderr,train_s,score_s_per_sample,fallback_count,"
    "mean_gamma_b,mean_gamma_z";

/// Shortest representation that parses back to the same double; never locale-dependent.
[[nodiscard]] inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

[[nodiscard]] inline std::vector<TrialReport> sorted_reports(std::vector<TrialReport> reports) {
    std::stable_sort(reports.begin(), reports.end(), [](const TrialReport& a, const TrialReport& b) {
        return std::tie(a.classifier, a.selector, a.n, a.sigma) < std::tie(b.classifier, b.selector, b.n, b.sigma);
    });
    return reports;
}

[[nodiscard]] inline std::string report_csv(const std::vector<TrialReport>& reports) {
    std::string out(kReportCsvHeader);
    out += '\n';
    for (const auto& r : sorted_reports(reports)) {
        out += r.classifier + ',' + r.selector + ',' + std::to_string(r.n) + ',' + format_double(r.sigma) + ',' +
               format_double(r.error_pct) + ',' + format_double(r.stderr_pct) + ',' + format_double(r.train_s) +
               ',' + format_double(r.score_s_per_sample) + ',' + std::to_string(r.fallback_count) + ',' +
               format_double(r.mean_gamma_b) + ',' + format_double(r.mean_gamma_z) + '\n';
    }
    return out;
}

/// Writes the report CSV via a temporary file; nothing is left behind on failure.
inline void emit_csv(const std::vector<TrialReport>& reports, const std::string& path) {
    const std::string tmp = path + ".tmp";
    const std::string text = report_csv(reports);
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("emit_csv: cannot open '" + tmp + "' for writing");
        f.write(text.data(), static_cast<std::streamsize>(text.size()));
        f.flush();
        if (!f) {
            f.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw Error("emit_csv: write to '" + tmp + "' failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error("emit_csv: cannot move output into '" + path + "'");
    }
}

/// Reads a file written by emit_csv.
[[nodiscard]] inline std::vector<TrialReport> parse_report_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InputError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(f, line) || line != kReportCsvHeader) {
        throw FormatError("report CSV '" + path + "': unexpected header");
    }
    std::vector<TrialReport> out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != 11) throw FormatError("report CSV '" + path + "': expected 11 cells");
        auto num = [&](std::size_t i) {
            const auto v = detail::parse_double(cells[i]);
            if (!v) throw FormatError("report CSV '" + path + "': bad number '" + std::string(cells[i]) + "'");
            return *v;
        };
        TrialReport r;
        r.classifier = std::string(cells[0]);
        r.selector = std::string(cells[1]);
        r.n = static_cast<Eigen::Index>(num(2));
        r.sigma = num(3);
        r.error_pct = num(4);
        r.stderr_pct = num(5);
        r.train_s = num(6);
        r.score_s_per_sample = num(7);
        r.fallback_count = static_cast<long long>(num(8));
        r.mean_gamma_b = num(9);
        r.mean_gamma_z = num(10);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace r2lda
