#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace toponet::ingest {

// Labeled multichannel time series: one row per channel, one column per
// timepoint. Labels, when present, tag each timepoint with a class.
struct TimeSeriesMatrix {
    Eigen::MatrixXd values;
    std::vector<std::string> channel_ids;
    std::optional<std::vector<std::string>> timepoint_labels;

    Eigen::Index channels() const { return values.rows(); }
    Eigen::Index timepoints() const { return values.cols(); }
};

// Off-diagonal bands of a planted precision matrix, one (stride, coupling)
// pair per band. Distinct band sets give distinct sparsity patterns, which is
// what makes classes distinguishable.
struct ClassPattern {
    std::string tag;
    std::vector<std::pair<int, double>> bands;  // (stride, coupling)
};

struct SyntheticSpec {
    int n_classes = 3;
    int channels = 30;
    int timepoints_per_class = 300;
    std::uint64_t precision_seed = 1;
    double noise_sigma = 1.0;
    std::vector<ClassPattern> class_structure;
    Eigen::VectorXd gaussian_mean;  // empty means zero mean

    // Throws ConfigError unless every planted precision is symmetric positive
    // definite and the class sparsity patterns are pairwise distinct.
    void validate() const;
};

struct SessionSample {
    int session = 0;
    std::string class_tag;
    TimeSeriesMatrix series;
};

// CSV format: one row per channel, first cell the channel id, remaining cells
// decimal numbers. Labels file: a single comma-separated line of M class tags.
TimeSeriesMatrix load_time_series(const std::string& path,
                                  const std::optional<std::string>& labels_path = std::nullopt);
void write_time_series_csv(const TimeSeriesMatrix& series, const std::string& path);

// Subtracts the per-channel least-squares line over the timepoint index.
TimeSeriesMatrix detrend(const TimeSeriesMatrix& series);

// Per-channel mean 0, population standard deviation 1 (divisor M).
// Throws NumericalError naming the first zero-variance channel.
TimeSeriesMatrix zscore(const TimeSeriesMatrix& series);

// Channels with zero population variance; the pipeline drops these when
// --drop-degenerate is on instead of failing the run.
std::vector<std::string> degenerate_channels(const TimeSeriesMatrix& series);
TimeSeriesMatrix drop_channels(const TimeSeriesMatrix& series,
                               const std::vector<std::string>& ids);

// Partitions columns by timepoint label, preserving column order per class.
std::map<std::string, TimeSeriesMatrix> split_by_class(const TimeSeriesMatrix& series);

// Three-node confounder model: P standard normal, Q = a1*P + e1, R = a2*P + e2
// with e1, e2 ~ N(0, sigma^2). Rows are P, Q, R in that order.
TimeSeriesMatrix synth_toy_three_node(double a1, double a2, double sigma, int timepoints,
                                      std::uint64_t seed);

// Planted precision matrix for one class (exposed for tests and diagnostics).
Eigen::MatrixXd planted_precision(const SyntheticSpec& spec, int class_index);

// Draws `sessions` Gaussian time series per class, each with the planted class
// precision as its population precision matrix. Deterministic given seed.
std::vector<SessionSample> synth_class_dataset(const SyntheticSpec& spec, int sessions,
                                               std::uint64_t seed);

}  // namespace toponet::ingest
