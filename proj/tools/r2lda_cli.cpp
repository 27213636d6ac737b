// r2lda: experiment runner and dataset utilities.
//
//   r2lda run --config exp.json [--seed N] [--out results.csv] [--threads N]
//   r2lda gen-synthetic --p 100 --n0 50 --n1 50 --seed 1 --out data.csv
//   r2lda inspect-dataset --csv data.csv --positive 0
//   r2lda select-features --csv data.csv --positive 0 --k 50
//   r2lda train --csv data.csv --positive 0 --selector COPRA --out model.json
//   r2lda classify --model model.json --csv test.csv --positive 0

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "r2lda/r2lda.hpp"

namespace {

struct DataArgs {
    std::string csv;
    std::string label_column = "label";
    std::string positive;
    std::string negative;
    std::string images;
    std::string labels;
    std::vector<int> digits{1, 7};

    void attach(CLI::App* app) {
        app->add_option("--csv", csv, "CSV table with a header row");
        app->add_option("--label-column", label_column, "CSV label column name");
        app->add_option("--positive", positive, "CSV label mapped to class 0");
        app->add_option("--negative", negative, "CSV label mapped to class 1 (default: every other label)");
        app->add_option("--images", images, "IDX image file");
        app->add_option("--labels", labels, "IDX label file");
        app->add_option("--digits", digits, "IDX digit pair, first maps to class 0")->expected(2);
    }

    [[nodiscard]] r2lda::Dataset load() const {
        if (!csv.empty()) {
            if (positive.empty()) throw r2lda::InputError("--positive is required with --csv");
            std::optional<std::string> neg;
            if (!negative.empty()) neg = negative;
            return r2lda::load_csv(csv, label_column, positive, neg);
        }
        if (!images.empty() && !labels.empty()) {
            return r2lda::load_idx(images, labels, {digits.at(0), digits.at(1)});
        }
        throw r2lda::InputError("give --csv or both --images and --labels");
    }
};

void write_labeled_csv(const r2lda::LabeledSet& set, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw r2lda::Error("cannot open '" + path + "' for writing");
    for (Eigen::Index j = 0; j < set.dim(); ++j) f << 'f' << j << ',';
    f << "label\n";
    const auto rows = [&](const r2lda::Matrix& m, int label) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) f << r2lda::format_double(m(i, j)) << ',';
            f << label << '\n';
        }
    };
    rows(set.class0, 0);
    rows(set.class1, 1);
    if (!f) throw r2lda::Error("write to '" + path + "' failed");
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& out,
            std::optional<int> threads, bool no_timing) {
    r2lda::ExperimentConfig cfg = r2lda::load_config(config_path);
    if (seed) cfg.master_seed = *seed;
    if (!out.empty()) cfg.output = out;
    if (threads) cfg.threads = *threads;
    if (no_timing) cfg.record_timing = false;
    if (cfg.output.empty()) throw r2lda::InputError("no output path: set 'output' in the config or pass --out");
    cfg.validate();

    const r2lda::ExperimentResult result = r2lda::run_experiment(cfg);
    r2lda::emit_csv(result.reports, cfg.output);
    r2lda::detail::write_text_file(cfg.output + ".meta.json", r2lda::run_metadata(cfg, result).dump(2) + "\n");
    for (const auto& f : result.failures) {
        std::cerr << "cell failed: " << f.classifier << '/' << f.selector << " n=" << f.n << " sigma=" << f.sigma
                  << ": " << f.message << '\n';
    }
    std::cout << "wrote " << result.reports.size() << " rows to " << cfg.output << '\n';
    return result.failures.empty() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Doubly regularized LDA: experiments and dataset tools"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
    std::string config_path, run_out;
    std::optional<std::uint64_t> run_seed;
    std::optional<int> run_threads;
    bool no_timing = false;
    run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", run_seed, "Override master_seed");
    run->add_option("--out", run_out, "Override output CSV path");
    run->add_option("--threads", run_threads, "Worker threads")->check(CLI::PositiveNumber);
    run->add_flag("--no-timing", no_timing, "Write 0 for timing columns (byte-reproducible output)");

    // gen-synthetic
    auto* gen = app.add_subcommand("gen-synthetic", "Sample the two-class Gaussian model to CSV");
    r2lda::SyntheticSpec spec;
    std::string gen_out, reference = "average";
    gen->add_option("--p", spec.p, "Dimension")->capture_default_str();
    gen->add_option("--delta2", spec.delta2, "Squared Mahalanobis distance between means")->capture_default_str();
    gen->add_option("--offdiag", spec.offdiag, "Off-diagonal entry of Sigma0")->capture_default_str();
    gen->add_option("--n0", spec.n0, "Class 0 samples")->capture_default_str();
    gen->add_option("--n1", spec.n1, "Class 1 samples")->capture_default_str();
    gen->add_option("--seed", spec.seed, "RNG seed")->capture_default_str();
    gen->add_option("--reference", reference, "Covariance defining delta2: average | sigma0")->capture_default_str();
    gen->add_option("--out", gen_out, "Output CSV")->required();

    // inspect-dataset
    auto* inspect = app.add_subcommand("inspect-dataset", "Print a dataset summary as JSON");
    DataArgs inspect_data;
    inspect_data.attach(inspect);

    // select-features
    auto* select = app.add_subcommand("select-features", "Rank features by Welch t-test p-value");
    DataArgs select_data;
    select_data.attach(select);
    Eigen::Index k = 0;
    std::string select_out;
    select->add_option("--k", k, "Number of features to keep")->required();
    select->add_option("--out", select_out, "Write the selection as JSON");

    // train
    auto* train = app.add_subcommand("train", "Train an R2LDA model and save it as JSON");
    DataArgs train_data;
    train_data.attach(train);
    std::string selector_name = "COPRA", train_out;
    train->add_option("--selector", selector_name, "COPRA | BPR | GCV")->capture_default_str();
    train->add_option("--out", train_out, "Model file")->required();

    // classify
    auto* classify = app.add_subcommand("classify", "Score a labeled dataset with a saved model");
    DataArgs classify_data;
    classify_data.attach(classify);
    std::string model_path, classify_out;
    classify->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
    classify->add_option("--out", classify_out, "Per-sample predictions CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config_path, run_seed, run_out, run_threads, no_timing);

        if (*gen) {
            spec.reference = r2lda::mahalanobis_reference_from_string(reference);
            const r2lda::Dataset d = r2lda::gen_synthetic(spec);
            write_labeled_csv(d.train, gen_out);
            r2lda::detail::write_text_file(
                gen_out + ".manifest.json",
                r2lda::dataset_manifest(d.meta, {{"column", "label"}, {"class0", "0"}, {"class1", "1"}}).dump(2) +
                    "\n");
            std::cout << "wrote " << d.train.size() << " samples to " << gen_out << '\n';
            return 0;
        }

        if (*inspect) {
            const r2lda::Dataset d = inspect_data.load();
            const auto& t = d.train;
            const double lo = std::min(t.class0.minCoeff(), t.class1.minCoeff());
            const double hi = std::max(t.class0.maxCoeff(), t.class1.maxCoeff());
            r2lda::Json j = r2lda::dataset_manifest(d.meta);
            j["n0"] = t.n0();
            j["n1"] = t.n1();
            j["min"] = lo;
            j["max"] = hi;
            std::cout << j.dump(2) << '\n';
            return 0;
        }

        if (*select) {
            const r2lda::Dataset d = select_data.load();
            const auto idx = r2lda::ttest_select(d.train, k);
            r2lda::Json j{{"k", k}, {"dim", d.dim()}, {"indices", idx}};
            if (select_out.empty()) {
                std::cout << j.dump() << '\n';
            } else {
                r2lda::detail::write_text_file(select_out, j.dump(2) + "\n");
            }
            return 0;
        }

        if (*train) {
            const r2lda::Dataset d = train_data.load();
            r2lda::RegSelector sel;
            sel.kind = r2lda::selector_kind_from_string(selector_name);
            const r2lda::R2ldaModel m = r2lda::train_r2lda(d.train, sel);
            r2lda::save_model(m, train_out);
            std::cout << "gamma_b = " << r2lda::format_double(m.gamma_b) << (m.gamma_b_flagged ? " (fallback)" : "")
                      << "\nwrote " << train_out << '\n';
            return 0;
        }

        if (*classify) {
            const r2lda::R2ldaModel m = r2lda::load_model(model_path);
            const r2lda::Dataset d = classify_data.load();
            std::ofstream out;
            if (!classify_out.empty()) {
                out.open(classify_out, std::ios::binary | std::ios::trunc);
                if (!out) throw r2lda::Error("cannot open '" + classify_out + "' for writing");
                out << "true_class,predicted,score,gamma_z,flagged\n";
            }
            long long wrong = 0, total = 0;
            for (int cls = 0; cls < 2; ++cls) {
                const r2lda::Matrix& x = cls == 0 ? d.train.class0 : d.train.class1;
                for (Eigen::Index i = 0; i < x.rows(); ++i) {
                    const r2lda::R2ldaScore s = r2lda::score_r2lda(m, x.row(i).transpose());
                    const int pred = r2lda::assign(s.score, m.log_prior_ratio);
                    wrong += pred != cls;
                    ++total;
                    if (out.is_open()) {
                        out << cls << ',' << pred << ',' << r2lda::format_double(s.score) << ','
                            << r2lda::format_double(s.gamma_z) << ',' << (s.gamma_z_flagged ? 1 : 0) << '\n';
                    }
                }
            }
            std::cout << "misclassified " << wrong << " of " << total << " ("
                      << r2lda::format_double(100.0 * static_cast<double>(wrong) / static_cast<double>(total))
                      << "%)\n";
            return 0;
        }
    } catch (const r2lda::InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
