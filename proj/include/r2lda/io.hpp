#pragma once

// JSON documents: experiment configs, trained R2LDA models, dataset manifests
// and the metadata sidecar written next to report CSVs.

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "r2lda/classifiers.hpp"
#include "r2lda/datasets.hpp"
#include "r2lda/errors.hpp"
#include "r2lda/harness.hpp"

namespace r2lda {

using Json = nlohmann::json;

inline constexpr std::string_view kModelFormat = "r2lda-model";
inline constexpr int kModelVersion = 1;

namespace detail {

[[nodiscard]] inline Json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InputError("cannot open '" + path + "'");
    try {
        return Json::parse(f);
    } catch (const Json::parse_error& e) {
        throw FormatError("'" + path + "': " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw Error("write to '" + path + "' failed");
}

[[nodiscard]] inline Json to_json(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

[[nodiscard]] inline Json to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        std::vector<double> r(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
        rows.push_back(std::move(r));
    }
    return rows;
}

[[nodiscard]] inline Vector vector_from_json(const Json& j, Eigen::Index expected, const char* what) {
    const auto v = j.get<std::vector<double>>();
    if (expected >= 0 && static_cast<Eigen::Index>(v.size()) != expected) {
        throw FormatError(std::string("model: '") + what + "' has wrong length");
    }
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

[[nodiscard]] inline Matrix matrix_from_json(const Json& j, Eigen::Index rows, Eigen::Index cols, const char* what) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
        throw FormatError(std::string("model: '") + what + "' has wrong row count");
    }
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) m.row(i) = vector_from_json(j[static_cast<std::size_t>(i)], cols, what);
    return m;
}

/// Fetches an optional key with a default, rejecting the wrong JSON type.
template <class T>
[[nodiscard]] T get_or(const Json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw FormatError(std::string("config: key '") + key + "': " + e.what());
    }
}

[[nodiscard]] inline std::string resolve_path(const std::string& p, const std::filesystem::path& base) {
    const std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? p : (base / path).lexically_normal().string();
}

}  // namespace detail

[[nodiscard]] inline std::string_view to_string(PooledDenominator d) {
    return d == PooledDenominator::n_plus_one ? "n_plus_one" : "conventional";
}

[[nodiscard]] inline PooledDenominator pooled_denominator_from_string(std::string_view s) {
    if (s == "n_plus_one") return PooledDenominator::n_plus_one;
    if (s == "conventional") return PooledDenominator::conventional;
    throw InputError("unknown pooled denominator '" + std::string(s) + "'");
}

[[nodiscard]] inline MahalanobisReference mahalanobis_reference_from_string(std::string_view s) {
    if (s == "average") return MahalanobisReference::average;
    if (s == "sigma0") return MahalanobisReference::sigma0;
    throw InputError("unknown Mahalanobis reference '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Selector settings

[[nodiscard]] inline Json selector_to_json(const RegSelector& s) {
    return Json{{"kind", std::string(to_string(s.kind))},
                {"newton",
                 {{"initial_gamma_scale", s.newton.initial_gamma_scale},
                  {"tol", s.newton.tol},
                  {"max_iter", s.newton.max_iter}}},
                {"gcv_grid", {{"num_points", s.grid.num_points}, {"floor_ratio", s.grid.floor_ratio}}},
                {"fallback_gamma_scale", s.fallback_gamma_scale}};
}

inline void read_solver_settings(const Json& j, NewtonConfig& newton, GcvGrid& grid, double& fallback_scale) {
    if (j.contains("newton")) {
        const Json& n = j.at("newton");
        newton.initial_gamma_scale = detail::get_or(n, "initial_gamma_scale", newton.initial_gamma_scale);
        newton.tol = detail::get_or(n, "tol", newton.tol);
        newton.max_iter = detail::get_or(n, "max_iter", newton.max_iter);
    }
    if (j.contains("gcv_grid")) {
        const Json& g = j.at("gcv_grid");
        grid.num_points = detail::get_or(g, "num_points", grid.num_points);
        grid.floor_ratio = detail::get_or(g, "floor_ratio", grid.floor_ratio);
    }
    fallback_scale = detail::get_or(j, "fallback_gamma_scale", fallback_scale);
}

[[nodiscard]] inline RegSelector selector_from_json(const Json& j) {
    RegSelector s;
    s.kind = selector_kind_from_string(j.at("kind").get<std::string>());
    read_solver_settings(j, s.newton, s.grid, s.fallback_gamma_scale);
    s.validate();
    return s;
}

// ---------------------------------------------------------------------------
// Experiment config

[[nodiscard]] inline DatasetSource dataset_from_json(const Json& j, const std::filesystem::path& base) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "synthetic") {
        SyntheticSource s;
        s.spec.p = detail::get_or<Eigen::Index>(j, "p", s.spec.p);
        s.spec.delta2 = detail::get_or(j, "delta2", s.spec.delta2);
        s.spec.offdiag = detail::get_or(j, "offdiag", s.spec.offdiag);
        s.spec.reference =
            mahalanobis_reference_from_string(detail::get_or<std::string>(j, "mahalanobis_reference", "average"));
        s.spec.validate();
        return s;
    }
    if (type == "csv") {
        CsvSource s;
        s.path = detail::resolve_path(j.at("path").get<std::string>(), base);
        s.label_column = detail::get_or<std::string>(j, "label_column", s.label_column);
        s.positive_label = j.at("positive_label").get<std::string>();
        if (j.contains("negative_label") && !j.at("negative_label").is_null()) {
            s.negative_label = j.at("negative_label").get<std::string>();
        }
        return s;
    }
    if (type == "idx") {
        IdxSource s;
        s.images = detail::resolve_path(j.at("images").get<std::string>(), base);
        s.labels = detail::resolve_path(j.at("labels").get<std::string>(), base);
        const auto d = detail::get_or<std::vector<int>>(j, "digits", {1, 7});
        if (d.size() != 2) throw FormatError("config: 'digits' must have two entries");
        s.digits = {d[0], d[1]};
        return s;
    }
    throw FormatError("config: unknown dataset type '" + type + "'");
}

[[nodiscard]] inline Json dataset_to_json(const DatasetSource& src) {
    return std::visit(
        [](const auto& s) -> Json {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, SyntheticSource>) {
                return {{"type", "synthetic"},
                        {"p", s.spec.p},
                        {"delta2", s.spec.delta2},
                        {"offdiag", s.spec.offdiag},
                        {"mahalanobis_reference", std::string(to_string(s.spec.reference))}};
            } else if constexpr (std::is_same_v<T, CsvSource>) {
                Json j{{"type", "csv"},
                       {"path", s.path},
                       {"label_column", s.label_column},
                       {"positive_label", s.positive_label}};
                if (s.negative_label) j["negative_label"] = *s.negative_label;
                return j;
            } else {
                return {{"type", "idx"},
                        {"images", s.images},
                        {"labels", s.labels},
                        {"digits", {s.digits.first, s.digits.second}}};
            }
        },
        src);
}

/// Relative dataset paths are resolved against `base` (normally the config file's directory).
[[nodiscard]] inline ExperimentConfig config_from_json(const Json& j, const std::filesystem::path& base = {}) {
    try {
        ExperimentConfig c;
        c.name = detail::get_or<std::string>(j, "name", c.name);
        c.dataset = dataset_from_json(j.at("dataset"), base);
        for (const auto& s : j.at("classifiers")) c.classifiers.push_back(parse_classifier(s.get<std::string>()));
        c.train_sizes = j.at("train_sizes").get<std::vector<Eigen::Index>>();
        c.noise_sigmas = detail::get_or(j, "noise_sigmas", c.noise_sigmas);
        c.trials_train = detail::get_or(j, "trials_train", c.trials_train);
        c.trials_test = detail::get_or(j, "trials_test", c.trials_test);
        c.test_per_class = detail::get_or(j, "test_per_class", c.test_per_class);
        if (j.contains("feature_selection") && !j.at("feature_selection").is_null()) {
            c.feature_selection = j.at("feature_selection").get<Eigen::Index>();
        }
        c.rescale = detail::get_or(j, "rescale", c.rescale);
        c.record_timing = detail::get_or(j, "record_timing", c.record_timing);
        c.master_seed = detail::get_or<std::uint64_t>(j, "master_seed", c.master_seed);
        c.threads = detail::get_or(j, "threads", c.threads);
        c.output = detail::get_or<std::string>(j, "output", c.output);
        c.stats.pooled_denominator = pooled_denominator_from_string(
            detail::get_or<std::string>(j, "pooled_denominator", std::string(to_string(c.stats.pooled_denominator))));
        if (j.contains("priors") && !j.at("priors").is_null()) {
            const auto p = j.at("priors").get<std::vector<double>>();
            if (p.size() != 2) throw FormatError("config: 'priors' must have two entries");
            c.stats.prior_override = std::pair{p[0], p[1]};
        }
        read_solver_settings(j, c.newton, c.grid, c.fallback_gamma_scale);
        c.validate();
        return c;
    } catch (const Json::exception& e) {
        throw FormatError(std::string("config: ") + e.what());
    }
}

[[nodiscard]] inline ExperimentConfig load_config(const std::string& path) {
    return config_from_json(detail::read_json_file(path), std::filesystem::path(path).parent_path());
}

[[nodiscard]] inline Json config_to_json(const ExperimentConfig& c) {
    Json classifiers = Json::array();
    for (const auto& clf : c.classifiers) classifiers.push_back(clf.label());
    Json j{{"name", c.name},
           {"dataset", dataset_to_json(c.dataset)},
           {"classifiers", classifiers},
           {"train_sizes", c.train_sizes},
           {"noise_sigmas", c.noise_sigmas},
           {"trials_train", c.trials_train},
           {"trials_test", c.trials_test},
           {"test_per_class", c.test_per_class},
           {"feature_selection", c.feature_selection ? Json(*c.feature_selection) : Json(nullptr)},
           {"rescale", c.rescale},
           {"record_timing", c.record_timing},
           {"master_seed", c.master_seed},
           {"threads", c.threads},
           {"output", c.output},
           {"pooled_denominator", std::string(to_string(c.stats.pooled_denominator))},
           {"newton",
            {{"initial_gamma_scale", c.newton.initial_gamma_scale},
             {"tol", c.newton.tol},
             {"max_iter", c.newton.max_iter}}},
           {"gcv_grid", {{"num_points", c.grid.num_points}, {"floor_ratio", c.grid.floor_ratio}}},
           {"fallback_gamma_scale", c.fallback_gamma_scale}};
    if (c.stats.prior_override) j["priors"] = {c.stats.prior_override->first, c.stats.prior_override->second};
    return j;
}

// ---------------------------------------------------------------------------
// Run metadata sidecar

[[nodiscard]] inline Json run_metadata(const ExperimentConfig& c, const ExperimentResult& result) {
    Json failures = Json::array();
    for (const auto& f : result.failures) {
        failures.push_back(
            {{"classifier", f.classifier}, {"selector", f.selector}, {"n", f.n}, {"sigma", f.sigma}, {"error", f.message}});
    }
    return {{"harness_version", std::string(kHarnessVersion)},
            {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                  std::to_string(EIGEN_MINOR_VERSION)},
            {"master_seed", c.master_seed},
            {"dataset_key", dataset_key(c.dataset)},
            {"seeding",
             "trial seed = SeedHasher(master_seed).add(dataset_key).add(classifier).add(selector)"
             ".add(n).add(sigma).add(trial); generator mt19937_64"},
            {"switches",
             {{"pooled_denominator", std::string(to_string(c.stats.pooled_denominator))},
              {"rescale", c.rescale},
              {"record_timing", c.record_timing},
              {"rlda_static_gamma", "1 / gamma_b"},
              {"mahalanobis_reference",
               std::holds_alternative<SyntheticSource>(c.dataset)
                   ? Json(std::string(to_string(std::get<SyntheticSource>(c.dataset).spec.reference)))
                   : Json(nullptr)}}},
            {"config", config_to_json(c)},
            {"failures", failures}};
}

// ---------------------------------------------------------------------------
// Trained model
//
// The document stores everything score_r2lda reads, including the
// eigendecomposition, so a loaded model scores bit-identically to the original.

[[nodiscard]] inline Json model_to_json(const R2ldaModel& m) {
    const ClassStats& s = m.stats;
    return {{"format", std::string(kModelFormat)},
            {"version", kModelVersion},
            {"dim", s.dim()},
            {"stats",
             {{"n0", s.n0},
              {"n1", s.n1},
              {"prior0", s.prior0},
              {"prior1", s.prior1},
              {"m0", detail::to_json(s.m0)},
              {"m1", detail::to_json(s.m1)},
              {"sigma0", detail::to_json(s.sigma0.matrix())},
              {"sigma1", detail::to_json(s.sigma1.matrix())},
              {"sigma_pooled", detail::to_json(s.sigma_pooled.matrix())}}},
            {"eig", {{"U", detail::to_json(m.eig->U)}, {"d2", detail::to_json(m.eig->d2)}, {"p1", m.pe.p1}}},
            {"selector", selector_to_json(m.selector)},
            {"gamma_b", m.gamma_b},
            {"gamma_b_flagged", m.gamma_b_flagged},
            {"b_hat", detail::to_json(m.b_hat)},
            {"log_prior_ratio", m.log_prior_ratio}};
}

[[nodiscard]] inline R2ldaModel model_from_json(const Json& j) {
    try {
        if (j.at("format").get<std::string>() != kModelFormat) throw FormatError("model: not an r2lda model document");
        const int version = j.at("version").get<int>();
        if (version != kModelVersion) {
            throw FormatError("model: unsupported version " + std::to_string(version));
        }
        const auto p = j.at("dim").get<Eigen::Index>();
        if (p < 1) throw FormatError("model: dim must be >= 1");
        const Json& js = j.at("stats");
        R2ldaModel m;
        ClassStats& s = m.stats;
        s.n0 = js.at("n0").get<Eigen::Index>();
        s.n1 = js.at("n1").get<Eigen::Index>();
        s.prior0 = js.at("prior0").get<double>();
        s.prior1 = js.at("prior1").get<double>();
        s.m0 = detail::vector_from_json(js.at("m0"), p, "m0");
        s.m1 = detail::vector_from_json(js.at("m1"), p, "m1");
        s.m_plus = s.m0 + s.m1;
        s.m_minus = s.m0 - s.m1;
        s.sigma0 = SymMatrix(detail::matrix_from_json(js.at("sigma0"), p, p, "sigma0"));
        s.sigma1 = SymMatrix(detail::matrix_from_json(js.at("sigma1"), p, p, "sigma1"));
        s.sigma_pooled = SymMatrix(detail::matrix_from_json(js.at("sigma_pooled"), p, p, "sigma_pooled"));

        const Json& je = j.at("eig");
        auto eig = std::make_shared<EigenDecomposition>();
        eig->U = detail::matrix_from_json(je.at("U"), p, p, "U");
        eig->d2 = detail::vector_from_json(je.at("d2"), p, "d2");
        const auto p1 = je.at("p1").get<Eigen::Index>();
        if (p1 < 1 || p1 > p) throw FormatError("model: p1 out of range");
        m.eig = eig;
        m.pe = partition_eig(m.eig, p1, p);

        m.selector = selector_from_json(j.at("selector"));
        m.gamma_b = j.at("gamma_b").get<double>();
        m.gamma_b_flagged = j.at("gamma_b_flagged").get<bool>();
        m.b_hat = detail::vector_from_json(j.at("b_hat"), p, "b_hat");
        m.mminus_rot = m.eig->U.transpose() * s.m_minus;
        m.log_prior_ratio = j.at("log_prior_ratio").get<double>();
        return m;
    } catch (const Json::exception& e) {
        throw FormatError(std::string("model: ") + e.what());
    }
}

inline void save_model(const R2ldaModel& m, const std::string& path) {
    detail::write_text_file(path, model_to_json(m).dump(1) + "\n");
}

[[nodiscard]] inline R2ldaModel load_model(const std::string& path) {
    return model_from_json(detail::read_json_file(path));
}

// ---------------------------------------------------------------------------
// Dataset manifest

[[nodiscard]] inline Json dataset_manifest(const DatasetMeta& meta, const Json& labels = Json::object()) {
    Json j{{"name", meta.name}, {"source", meta.source}, {"dim", meta.dim}, {"labels", labels}};
    j["scaling"] = meta.scaling ? Json{{"min", meta.scaling->min}, {"max", meta.scaling->max}} : Json(nullptr);
    Json notes = Json::object();
    for (const auto& [k, v] : meta.notes) notes[k] = v;
    j["notes"] = notes;
    return j;
}

}  // namespace r2lda
