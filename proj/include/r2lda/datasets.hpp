#pragma once

// Synthetic Gaussian data, IDX / CSV ingestion, [-1, 1] rescaling, test-only
// noise and Welch t-test feature selection.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "r2lda/class_stats.hpp"
#include "r2lda/errors.hpp"
#include "r2lda/linalg.hpp"
#include "r2lda/random.hpp"

namespace r2lda {

// ---------------------------------------------------------------------------
// Scaling

/// Global affine map [min, max] -> [-1, 1].
struct ScalingRecord {
    double min = -1.0;
    double max = 1.0;

    [[nodiscard]] bool degenerate() const { return !(max > min); }

    [[nodiscard]] Matrix apply(const Matrix& x) const {
        if (degenerate()) return Matrix::Zero(x.rows(), x.cols());
        return ((x.array() - min) * (2.0 / (max - min)) - 1.0).matrix();
    }
    [[nodiscard]] Matrix invert(const Matrix& x) const {
        return ((x.array() + 1.0) * (0.5 * (max - min)) + min).matrix();
    }
};

struct DatasetMeta {
    std::string name;
    std::string source;
    Eigen::Index dim = 0;
    std::optional<ScalingRecord> scaling;
    std::map<std::string, std::string> notes;
};

struct Dataset {
    LabeledSet train;
    Matrix test0;
    Matrix test1;
    DatasetMeta meta;

    [[nodiscard]] Eigen::Index dim() const { return train.dim(); }
};

/// Scaling record from the global min / max of every training entry.
[[nodiscard]] inline ScalingRecord fit_scaling(const LabeledSet& train) {
    if (train.size() == 0) throw InputError("fit_scaling: empty training set");
    ScalingRecord r;
    r.min = std::numeric_limits<double>::infinity();
    r.max = -std::numeric_limits<double>::infinity();
    for (const Matrix* m : {&train.class0, &train.class1}) {
        if (m->size() == 0) continue;
        r.min = std::min(r.min, m->minCoeff());
        r.max = std::max(r.max, m->maxCoeff());
    }
    return r;
}

/// Maps training (and test) data with a record fitted on the training data only.
/// A constant training set maps to zeros with a warning.
[[nodiscard]] inline std::pair<Dataset, ScalingRecord> rescale_unit_interval(const Dataset& data) {
    const ScalingRecord rec = fit_scaling(data.train);
    if (rec.degenerate()) {
        std::clog << "warning: rescale_unit_interval: constant dataset '" << data.meta.name
                  << "' mapped to zeros\n";
    }
    Dataset out = data;
    out.train.class0 = rec.apply(data.train.class0);
    out.train.class1 = rec.apply(data.train.class1);
    out.test0 = rec.apply(data.test0);
    out.test1 = rec.apply(data.test1);
    out.meta.scaling = rec;
    return {std::move(out), rec};
}

// ---------------------------------------------------------------------------
// Test-only noise

/// x + N(0, sigma^2 I) on every row of `test`.
[[nodiscard]] inline Matrix add_noise(const Matrix& test, double sigma, Rng& rng) {
    if (sigma < 0.0) throw InputError("add_test_noise: sigma must be >= 0");
    if (sigma == 0.0) return test;
    return test + sigma * rng.normal_matrix(test.rows(), test.cols());
}

/// Adds noise to the test partitions only; the training partition is untouched.
[[nodiscard]] inline Dataset add_test_noise(const Dataset& data, double sigma, std::uint64_t seed) {
    Rng rng(seed);
    Dataset out = data;
    out.test0 = add_noise(data.test0, sigma, rng);
    out.test1 = add_noise(data.test1, sigma, rng);
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic Gaussian model

/// Which covariance defines the Mahalanobis distance delta^2 between the class means.
enum class MahalanobisReference { average, sigma0 };

struct SyntheticSpec {
    Eigen::Index p = 100;
    double delta2 = 9.0;
    double offdiag = 0.1;
    Eigen::Index n0 = 50;
    Eigen::Index n1 = 50;
    Eigen::Index test_n0 = 0;
    Eigen::Index test_n1 = 0;
    std::uint64_t seed = 0;
    MahalanobisReference reference = MahalanobisReference::average;

    void validate() const {
        if (p < 1) throw InputError("SyntheticSpec: p must be >= 1");
        if (!(delta2 > 0.0)) throw InputError("SyntheticSpec: delta2 must be > 0");
        if (!(std::abs(offdiag) < 1.0)) throw InputError("SyntheticSpec: |offdiag| must be < 1");
        if (n0 < 0 || n1 < 0 || test_n0 < 0 || test_n1 < 0) {
            throw InputError("SyntheticSpec: sample counts must be >= 0");
        }
    }
};

/// Sigma0 = unit diagonal with constant off-diagonal, Sigma1 = Sigma0 + I,
/// m0 = a 1, m1 = -m0 with a set by delta^2 = (m0 - m1)^T Sigma^{-1} (m0 - m1).
struct SyntheticModel {
    Vector m0, m1;
    SymMatrix sigma0, sigma1;
    SymMatrix reference_sigma;
    Matrix chol0, chol1;  ///< lower Cholesky factors
    double a = 0.0;
    double delta2 = 0.0;
    MahalanobisReference reference = MahalanobisReference::average;

    [[nodiscard]] Eigen::Index dim() const { return m0.size(); }

    /// `count` draws from class `cls`, one per row.
    [[nodiscard]] Matrix sample(int cls, Eigen::Index count, Rng& rng) const {
        const Matrix& l = cls == 0 ? chol0 : chol1;
        const Vector& m = cls == 0 ? m0 : m1;
        const Matrix z = rng.normal_matrix(count, dim());
        Matrix x = z * l.transpose();
        x.rowwise() += m.transpose();
        return x;
    }
};

[[nodiscard]] inline SyntheticModel make_synthetic_model(const SyntheticSpec& spec) {
    spec.validate();
    const Eigen::Index p = spec.p;
    Matrix s0 = Matrix::Constant(p, p, spec.offdiag);
    s0.diagonal().setOnes();
    const Matrix s1 = s0 + Matrix::Identity(p, p);

    SyntheticModel m;
    m.sigma0 = SymMatrix(s0);
    m.sigma1 = SymMatrix(s1);
    m.reference = spec.reference;
    m.reference_sigma = spec.reference == MahalanobisReference::average
                            ? SymMatrix(0.5 * (s0 + s1))
                            : SymMatrix(s0);

    Eigen::LLT<Matrix> llt0(m.sigma0.matrix());
    if (llt0.info() != Eigen::Success) {
        throw InputError("gen_synthetic: Sigma0 is not positive definite (offdiag=" +
                         std::to_string(spec.offdiag) + ", p=" + std::to_string(p) + ")");
    }
    Eigen::LLT<Matrix> llt1(m.sigma1.matrix());
    Eigen::LLT<Matrix> llt_ref(m.reference_sigma.matrix());
    if (llt1.info() != Eigen::Success || llt_ref.info() != Eigen::Success) {
        throw InputError("gen_synthetic: model covariance is not positive definite");
    }
    m.chol0 = llt0.matrixL();
    m.chol1 = llt1.matrixL();

    // (m0 - m1) = 2a 1  =>  delta^2 = 4 a^2 1^T Sigma^{-1} 1
    const Vector ones = Vector::Ones(p);
    const double q = ones.dot(llt_ref.solve(ones));
    m.a = std::sqrt(spec.delta2 / (4.0 * q));
    m.m0 = Vector::Constant(p, m.a);
    m.m1 = -m.m0;
    m.delta2 = spec.delta2;
    return m;
}

/// (m0 - m1)^T Sigma_ref^{-1} (m0 - m1)
[[nodiscard]] inline double mahalanobis2(const SyntheticModel& m) {
    const Vector diff = m.m0 - m.m1;
    return diff.dot(m.reference_sigma.matrix().llt().solve(diff));
}

[[nodiscard]] inline std::string_view to_string(MahalanobisReference r) {
    return r == MahalanobisReference::average ? "average" : "sigma0";
}

[[nodiscard]] inline Dataset gen_synthetic(const SyntheticSpec& spec) {
    const SyntheticModel model = make_synthetic_model(spec);
    Rng rng(spec.seed);
    Dataset out;
    out.train.class0 = model.sample(0, spec.n0, rng);
    out.train.class1 = model.sample(1, spec.n1, rng);
    out.test0 = model.sample(0, spec.test_n0, rng);
    out.test1 = model.sample(1, spec.test_n1, rng);
    out.meta.name = "synthetic";
    out.meta.source = "gaussian";
    out.meta.dim = spec.p;
    out.meta.notes["delta2"] = std::to_string(spec.delta2);
    out.meta.notes["offdiag"] = std::to_string(spec.offdiag);
    out.meta.notes["mahalanobis_reference"] = std::string(to_string(spec.reference));
    out.meta.notes["seed"] = std::to_string(spec.seed);
    return out;
}

// ---------------------------------------------------------------------------
// IDX (MNIST) files

namespace detail {

[[nodiscard]] inline std::vector<unsigned char> read_file_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

[[nodiscard]] inline std::uint32_t read_be32(const std::vector<unsigned char>& b, std::size_t off) {
    return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
           (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

}  // namespace detail

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

/// Raw IDX image tensor: count x rows x cols unsigned bytes, row-major.
struct IdxImages {
    std::uint32_t count = 0, rows = 0, cols = 0;
    std::vector<unsigned char> pixels;
};

[[nodiscard]] inline IdxImages read_idx_images(const std::string& path) {
    const auto bytes = detail::read_file_bytes(path);
    if (bytes.size() < 16) throw FormatError("IDX images '" + path + "': truncated header");
    const std::uint32_t magic = detail::read_be32(bytes, 0);
    if (magic != kIdxImagesMagic) {
        std::ostringstream msg;
        msg << "IDX images '" << path << "': bad magic 0x" << std::hex << magic;
        throw FormatError(msg.str());
    }
    IdxImages img;
    img.count = detail::read_be32(bytes, 4);
    img.rows = detail::read_be32(bytes, 8);
    img.cols = detail::read_be32(bytes, 12);
    const std::uint64_t need = std::uint64_t{img.count} * img.rows * img.cols;
    if (bytes.size() - 16 != need) {
        throw FormatError("IDX images '" + path + "': expected " + std::to_string(need) +
                          " pixel bytes, found " + std::to_string(bytes.size() - 16));
    }
    img.pixels.assign(bytes.begin() + 16, bytes.end());
    return img;
}

[[nodiscard]] inline std::vector<unsigned char> read_idx_labels(const std::string& path) {
    const auto bytes = detail::read_file_bytes(path);
    if (bytes.size() < 8) throw FormatError("IDX labels '" + path + "': truncated header");
    const std::uint32_t magic = detail::read_be32(bytes, 0);
    if (magic != kIdxLabelsMagic) {
        std::ostringstream msg;
        msg << "IDX labels '" << path << "': bad magic 0x" << std::hex << magic;
        throw FormatError(msg.str());
    }
    const std::uint32_t count = detail::read_be32(bytes, 4);
    if (bytes.size() - 8 != count) {
        throw FormatError("IDX labels '" + path + "': expected " + std::to_string(count) +
                          " labels, found " + std::to_string(bytes.size() - 8));
    }
    return {bytes.begin() + 8, bytes.end()};
}

/// Two-digit subset of an IDX image / label pair. The first digit becomes class 0.
/// Images are vectorized row-major; pixel values are kept on the raw [0, 255] scale.
[[nodiscard]] inline Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                                      std::pair<int, int> digits) {
    const IdxImages img = read_idx_images(images_path);
    const auto labels = read_idx_labels(labels_path);
    if (labels.size() != img.count) {
        throw FormatError("IDX: " + std::to_string(img.count) + " images but " +
                          std::to_string(labels.size()) + " labels");
    }
    if (digits.first == digits.second) throw InputError("load_idx: digit pair must be distinct");
    const Eigen::Index p = static_cast<Eigen::Index>(img.rows) * img.cols;

    std::vector<std::size_t> rows0, rows1;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == digits.first) rows0.push_back(i);
        if (labels[i] == digits.second) rows1.push_back(i);
    }
    if (rows0.empty() || rows1.empty()) {
        throw InputError("load_idx: digit " +
                         std::to_string(rows0.empty() ? digits.first : digits.second) +
                         " does not occur in '" + labels_path + "'");
    }
    auto gather = [&](const std::vector<std::size_t>& idx) {
        Matrix m(static_cast<Eigen::Index>(idx.size()), p);
        for (std::size_t r = 0; r < idx.size(); ++r) {
            const unsigned char* px = img.pixels.data() + idx[r] * static_cast<std::size_t>(p);
            for (Eigen::Index j = 0; j < p; ++j) m(static_cast<Eigen::Index>(r), j) = px[j];
        }
        return m;
    };
    Dataset out;
    out.train.class0 = gather(rows0);
    out.train.class1 = gather(rows1);
    out.test0.resize(0, p);
    out.test1.resize(0, p);
    out.meta.name = "idx(" + std::to_string(digits.first) + "," + std::to_string(digits.second) + ")";
    out.meta.source = images_path;
    out.meta.dim = p;
    out.meta.notes["rows"] = std::to_string(img.rows);
    out.meta.notes["cols"] = std::to_string(img.cols);
    return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

[[nodiscard]] inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

[[nodiscard]] inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

[[nodiscard]] inline std::optional<double> parse_double(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

}  // namespace detail

/// Comma-separated table with a header row. Rows labelled `positive_label` form class 0;
/// class 1 is every other row, or only rows labelled `negative_label` when given.
[[nodiscard]] inline Dataset load_csv(const std::string& path, const std::string& label_column,
                                      const std::string& positive_label,
                                      const std::optional<std::string>& negative_label = std::nullopt) {
    std::ifstream f(path);
    if (!f) throw InputError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(f, line)) throw FormatError("CSV '" + path + "': empty file");
    const auto header = detail::split_csv_line(line);
    const auto it = std::find(header.begin(), header.end(), std::string_view(label_column));
    if (it == header.end()) {
        throw FormatError("CSV '" + path + "': no label column named '" + label_column + "'");
    }
    const std::size_t label_idx = static_cast<std::size_t>(it - header.begin());
    const std::size_t ncols = header.size();
    const auto p = static_cast<Eigen::Index>(ncols - 1);
    if (p < 1) throw FormatError("CSV '" + path + "': no feature columns");

    std::vector<std::vector<double>> rows0, rows1;
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != ncols) {
            throw FormatError("CSV '" + path + "' line " + std::to_string(line_no) + ": expected " +
                              std::to_string(ncols) + " cells, got " + std::to_string(cells.size()));
        }
        std::vector<double> values;
        values.reserve(ncols - 1);
        for (std::size_t j = 0; j < ncols; ++j) {
            if (j == label_idx) continue;
            const auto v = detail::parse_double(cells[j]);
            if (!v || !std::isfinite(*v)) {
                throw FormatError("CSV '" + path + "' line " + std::to_string(line_no) +
                                  ": non-numeric cell '" + std::string(cells[j]) + "'");
            }
            values.push_back(*v);
        }
        const std::string_view label = cells[label_idx];
        if (label == positive_label) {
            rows0.push_back(std::move(values));
        } else if (!negative_label || label == *negative_label) {
            rows1.push_back(std::move(values));
        }
    }
    auto to_matrix = [p](const std::vector<std::vector<double>>& rows) {
        Matrix m(static_cast<Eigen::Index>(rows.size()), p);
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (Eigen::Index j = 0; j < p; ++j) m(static_cast<Eigen::Index>(r), j) = rows[r][j];
        return m;
    };
    Dataset out;
    out.train.class0 = to_matrix(rows0);
    out.train.class1 = to_matrix(rows1);
    out.test0.resize(0, p);
    out.test1.resize(0, p);
    out.meta.name = "csv";
    out.meta.source = path;
    out.meta.dim = p;
    out.meta.notes["label_column"] = label_column;
    out.meta.notes["positive_label"] = positive_label;
    if (negative_label) out.meta.notes["negative_label"] = *negative_label;
    return out;
}

// ---------------------------------------------------------------------------
// Feature selection

struct FeatureTest {
    double t = 0.0;
    double df = 0.0;
    double p_value = 1.0;
};

/// Welch two-sample t-test of column j, two-sided.
[[nodiscard]] inline FeatureTest welch_ttest(const Matrix& class0, const Matrix& class1, Eigen::Index j) {
    const auto n0 = static_cast<double>(class0.rows());
    const auto n1 = static_cast<double>(class1.rows());
    const double mean0 = class0.col(j).mean();
    const double mean1 = class1.col(j).mean();
    const double var0 = (class0.col(j).array() - mean0).square().sum() / (n0 - 1.0);
    const double var1 = (class1.col(j).array() - mean1).square().sum() / (n1 - 1.0);
    const double se0 = var0 / n0;
    const double se1 = var1 / n1;
    const double se2 = se0 + se1;

    FeatureTest out;
    if (!(se2 > 0.0)) {
        out.t = 0.0;
        out.p_value = (mean0 == mean1) ? 1.0 : 0.0;
        return out;
    }
    out.t = (mean0 - mean1) / std::sqrt(se2);
    out.df = se2 * se2 / (se0 * se0 / (n0 - 1.0) + se1 * se1 / (n1 - 1.0));
    const boost::math::students_t_distribution<double> dist(out.df);
    out.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.t)));
    out.p_value = std::min(out.p_value, 1.0);
    return out;
}

/// Indices of the k features with the smallest Welch p-values on the training data,
/// ordered by p-value, ties broken by smaller index.
[[nodiscard]] inline std::vector<Eigen::Index> ttest_select(const LabeledSet& train, Eigen::Index k) {
    const Eigen::Index p = train.dim();
    if (k < 1 || k > p) {
        throw InputError("ttest_select: k must be in [1, " + std::to_string(p) + "], got " +
                         std::to_string(k));
    }
    if (train.n0() < 2 || train.n1() < 2) throw InputError("ttest_select: need >= 2 samples per class");
    std::vector<double> pv(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) {
        pv[static_cast<std::size_t>(j)] = welch_ttest(train.class0, train.class1, j).p_value;
    }
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(p));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        return pv[static_cast<std::size_t>(a)] < pv[static_cast<std::size_t>(b)];
    });
    idx.resize(static_cast<std::size_t>(k));
    return idx;
}

[[nodiscard]] inline Matrix select_columns(const Matrix& m, const std::vector<Eigen::Index>& idx) {
    Matrix out(m.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(idx[j]);
    return out;
}

/// Restricts every partition to the given feature indices.
[[nodiscard]] inline Dataset apply_feature_selection(const Dataset& data,
                                                     const std::vector<Eigen::Index>& idx) {
    Dataset out = data;
    out.train.class0 = select_columns(data.train.class0, idx);
    out.train.class1 = select_columns(data.train.class1, idx);
    out.test0 = select_columns(data.test0, idx);
    out.test1 = select_columns(data.test1, idx);
    out.meta.dim = static_cast<Eigen::Index>(idx.size());
    return out;
}

}  // namespace r2lda
