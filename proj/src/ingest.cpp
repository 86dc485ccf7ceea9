#include "toponet/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "toponet/errors.hpp"
#include "toponet/rng.hpp"

namespace toponet::ingest {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_number(const std::string& cell, const std::string& context) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end != begin && (*(end - 1) == ' ' || *(end - 1) == '\t' || *(end - 1) == '\r')) --end;
    double value = 0.0;
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc() || result.ptr != end) {
        throw DataError(context + ": non-numeric cell '" + cell + "'");
    }
    return value;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    auto e = s.find_last_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

}  // namespace

TimeSeriesMatrix load_time_series(const std::string& path,
                                  const std::optional<std::string>& labels_path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open time-series CSV '" + path + "'");

    std::vector<std::string> ids;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() < 2) {
            throw DataError(path + ", row " + std::to_string(line_no) +
                            ": expected channel id plus at least one value");
        }
        ids.push_back(trim(cells.front()));
        std::vector<double> values;
        values.reserve(cells.size() - 1);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            values.push_back(parse_number(cells[c], path + ", row " + std::to_string(line_no)));
        }
        if (!rows.empty() && values.size() != rows.front().size()) {
            throw DataError(path + ", row " + std::to_string(line_no) + ": has " +
                            std::to_string(values.size()) + " values, expected " +
                            std::to_string(rows.front().size()));
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw DataError(path + ": no channels found");

    TimeSeriesMatrix out;
    out.channel_ids = std::move(ids);
    out.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (Eigen::Index r = 0; r < out.values.rows(); ++r)
        for (Eigen::Index c = 0; c < out.values.cols(); ++c)
            out.values(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];

    for (Eigen::Index r = 0; r < out.values.rows(); ++r) {
        if (!out.values.row(r).allFinite()) {
            throw DataError(path + ": channel '" + out.channel_ids[static_cast<std::size_t>(r)] +
                            "' contains non-finite values");
        }
    }

    if (labels_path) {
        std::ifstream lin(*labels_path);
        if (!lin) throw DataError("cannot open labels file '" + *labels_path + "'");
        std::string label_line;
        std::getline(lin, label_line);
        auto cells = split_csv_line(label_line);
        std::vector<std::string> labels;
        labels.reserve(cells.size());
        for (auto& c : cells) labels.push_back(trim(c));
        if (static_cast<Eigen::Index>(labels.size()) != out.timepoints()) {
            throw DataError(*labels_path + ": " + std::to_string(labels.size()) +
                            " labels for " + std::to_string(out.timepoints()) + " timepoints");
        }
        out.timepoint_labels = std::move(labels);
    }
    return out;
}

void write_time_series_csv(const TimeSeriesMatrix& series, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write time-series CSV '" + path + "'");
    char buf[64];
    for (Eigen::Index r = 0; r < series.values.rows(); ++r) {
        out << series.channel_ids[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < series.values.cols(); ++c) {
            const auto res =
                std::to_chars(buf, buf + sizeof(buf), series.values(r, c),
                              std::chars_format::general, 17);
            out << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
        }
        out << '\n';
    }
}

TimeSeriesMatrix detrend(const TimeSeriesMatrix& series) {
    const Eigen::Index m = series.timepoints();
    if (m < 2) throw DataError("detrend requires at least 2 timepoints");

    TimeSeriesMatrix out = series;
    Eigen::VectorXd t(m);
    for (Eigen::Index c = 0; c < m; ++c) t(c) = static_cast<double>(c);
    const double t_mean = t.mean();
    const Eigen::VectorXd t_dev = t.array() - t_mean;
    const double t_ss = t_dev.squaredNorm();

    for (Eigen::Index r = 0; r < series.channels(); ++r) {
        const Eigen::VectorXd y = series.values.row(r).transpose();
        const double y_mean = y.mean();
        const double slope = t_dev.dot(y) / t_ss;
        const double intercept = y_mean - slope * t_mean;
        out.values.row(r) = (y.array() - (intercept + slope * t.array())).transpose();
    }
    return out;
}

TimeSeriesMatrix zscore(const TimeSeriesMatrix& series) {
    const double m = static_cast<double>(series.timepoints());
    TimeSeriesMatrix out = series;
    for (Eigen::Index r = 0; r < series.channels(); ++r) {
        const double mean = series.values.row(r).mean();
        const double var = (series.values.row(r).array() - mean).square().sum() / m;
        if (var == 0.0) {
            throw NumericalError("zero-variance channel '" +
                                 series.channel_ids[static_cast<std::size_t>(r)] + "'");
        }
        out.values.row(r) = (series.values.row(r).array() - mean) / std::sqrt(var);
    }
    return out;
}

std::vector<std::string> degenerate_channels(const TimeSeriesMatrix& series) {
    std::vector<std::string> out;
    for (Eigen::Index r = 0; r < series.channels(); ++r) {
        const double mean = series.values.row(r).mean();
        if ((series.values.row(r).array() - mean).square().sum() == 0.0) {
            out.push_back(series.channel_ids[static_cast<std::size_t>(r)]);
        }
    }
    return out;
}

TimeSeriesMatrix drop_channels(const TimeSeriesMatrix& series,
                               const std::vector<std::string>& ids) {
    const std::set<std::string> doomed(ids.begin(), ids.end());
    std::vector<Eigen::Index> keep;
    for (Eigen::Index r = 0; r < series.channels(); ++r) {
        if (!doomed.count(series.channel_ids[static_cast<std::size_t>(r)])) keep.push_back(r);
    }
    TimeSeriesMatrix out;
    out.timepoint_labels = series.timepoint_labels;
    out.values.resize(static_cast<Eigen::Index>(keep.size()), series.timepoints());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        out.values.row(static_cast<Eigen::Index>(i)) = series.values.row(keep[i]);
        out.channel_ids.push_back(series.channel_ids[static_cast<std::size_t>(keep[i])]);
    }
    return out;
}

std::map<std::string, TimeSeriesMatrix> split_by_class(const TimeSeriesMatrix& series) {
    if (!series.timepoint_labels) {
        throw DataError("split_by_class requires timepoint labels");
    }
    const auto& labels = *series.timepoint_labels;
    std::map<std::string, std::vector<Eigen::Index>> columns;
    for (Eigen::Index c = 0; c < series.timepoints(); ++c) {
        columns[labels[static_cast<std::size_t>(c)]].push_back(c);
    }
    std::map<std::string, TimeSeriesMatrix> out;
    for (const auto& [tag, cols] : columns) {
        TimeSeriesMatrix part;
        part.channel_ids = series.channel_ids;
        part.values.resize(series.channels(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t i = 0; i < cols.size(); ++i) {
            part.values.col(static_cast<Eigen::Index>(i)) = series.values.col(cols[i]);
        }
        out.emplace(tag, std::move(part));
    }
    return out;
}

TimeSeriesMatrix synth_toy_three_node(double a1, double a2, double sigma, int timepoints,
                                      std::uint64_t seed) {
    if (timepoints < 10) throw DataError("toy model requires at least 10 timepoints");
    if (sigma < 0.0) throw ConfigError("toy model noise sigma must be nonnegative");

    Rng rng(seed);
    TimeSeriesMatrix out;
    out.channel_ids = {"P", "Q", "R"};
    out.values.resize(3, timepoints);
    for (int t = 0; t < timepoints; ++t) {
        const double p = rng.next_normal();
        const double e1 = sigma * rng.next_normal();
        const double e2 = sigma * rng.next_normal();
        out.values(0, t) = p;
        out.values(1, t) = a1 * p + e1;
        out.values(2, t) = a2 * p + e2;
    }
    return out;
}

void SyntheticSpec::validate() const {
    if (n_classes < 1) throw ConfigError("synthetic spec: n_classes must be >= 1");
    if (channels < 2) throw ConfigError("synthetic spec: channels must be >= 2");
    if (timepoints_per_class < 2) throw ConfigError("synthetic spec: timepoints_per_class must be >= 2");
    if (noise_sigma <= 0.0) throw ConfigError("synthetic spec: noise_sigma must be positive");
    if (static_cast<int>(class_structure.size()) != n_classes) {
        throw ConfigError("synthetic spec: need one class pattern per class");
    }
    if (gaussian_mean.size() != 0 && gaussian_mean.size() != channels) {
        throw ConfigError("synthetic spec: gaussian_mean length must equal channels");
    }

    std::set<std::set<std::pair<int, int>>> patterns;
    for (int c = 0; c < n_classes; ++c) {
        const Eigen::MatrixXd omega = planted_precision(*this, c);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(omega);
        if (eigen.eigenvalues().minCoeff() <= 0.0) {
            throw ConfigError("synthetic spec: planted precision for class '" +
                              class_structure[static_cast<std::size_t>(c)].tag +
                              "' is not positive definite");
        }
        std::set<std::pair<int, int>> edges;
        for (int i = 0; i < channels; ++i)
            for (int j = i + 1; j < channels; ++j)
                if (omega(i, j) != 0.0) edges.emplace(i, j);
        if (!patterns.insert(edges).second) {
            throw ConfigError("synthetic spec: classes must have distinct sparsity patterns");
        }
    }
}

Eigen::MatrixXd planted_precision(const SyntheticSpec& spec, int class_index) {
    const auto& pattern = spec.class_structure.at(static_cast<std::size_t>(class_index));
    if (pattern.bands.empty()) throw ConfigError("class pattern needs at least one band");

    const int n = spec.channels;
    Eigen::MatrixXd omega = Eigen::MatrixXd::Identity(n, n);
    // Small seeded jitter keeps edge weights distinct downstream without
    // disturbing diagonal dominance.
    Rng rng(derive_seed(spec.precision_seed, static_cast<std::uint64_t>(class_index)));
    for (const auto& [stride, coupling] : pattern.bands) {
        if (stride < 1) throw ConfigError("class pattern stride must be >= 1");
        if (stride >= n) {
            throw ConfigError("class pattern stride " + std::to_string(stride) +
                              " needs more than " + std::to_string(n) + " channels");
        }
        for (int i = 0; i + stride < n; ++i) {
            const double jitter = rng.next_uniform(-0.05, 0.05) * coupling;
            const double w = coupling + jitter;
            omega(i, i + stride) -= w;
            omega(i + stride, i) -= w;
        }
    }
    // Negative off-diagonal precision entries give positive partial
    // correlations, which is what the both-positive edge rule needs.
    const double scale = 1.0 / (spec.noise_sigma * spec.noise_sigma);
    return scale * omega;
}

std::vector<SessionSample> synth_class_dataset(const SyntheticSpec& spec, int sessions,
                                               std::uint64_t seed) {
    if (sessions < 2) throw ConfigError("synth_class_dataset requires at least 2 sessions");
    spec.validate();

    std::vector<Eigen::MatrixXd> factors;  // lower Cholesky factor of each precision
    for (int c = 0; c < spec.n_classes; ++c) {
        const Eigen::MatrixXd omega = planted_precision(spec, c);
        Eigen::LLT<Eigen::MatrixXd> llt(omega);
        if (llt.info() != Eigen::Success) {
            throw ConfigError("synthetic spec: planted precision for class '" +
                              spec.class_structure[static_cast<std::size_t>(c)].tag +
                              "' is not positive definite");
        }
        factors.push_back(llt.matrixL());
    }

    std::vector<SessionSample> out;
    out.reserve(static_cast<std::size_t>(sessions * spec.n_classes));
    for (int s = 0; s < sessions; ++s) {
        for (int c = 0; c < spec.n_classes; ++c) {
            const std::uint64_t unit =
                static_cast<std::uint64_t>(s) * static_cast<std::uint64_t>(spec.n_classes) +
                static_cast<std::uint64_t>(c);
            Rng rng(derive_seed(seed, unit));

            SessionSample sample;
            sample.session = s;
            sample.class_tag = spec.class_structure[static_cast<std::size_t>(c)].tag;
            sample.series.values.resize(spec.channels, spec.timepoints_per_class);
            for (int i = 0; i < spec.channels; ++i) {
                sample.series.channel_ids.push_back("ch" + std::to_string(i));
            }

            // If omega = L L^T then x = L^{-T} z has covariance omega^{-1}.
            Eigen::VectorXd z(spec.channels);
            for (int t = 0; t < spec.timepoints_per_class; ++t) {
                for (int i = 0; i < spec.channels; ++i) z(i) = rng.next_normal();
                Eigen::VectorXd x = factors[static_cast<std::size_t>(c)]
                                        .transpose()
                                        .triangularView<Eigen::Upper>()
                                        .solve(z);
                if (spec.gaussian_mean.size() != 0) x += spec.gaussian_mean;
                sample.series.values.col(t) = x;
            }
            out.push_back(std::move(sample));
        }
    }
    return out;
}

}  // namespace toponet::ingest
