#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>

#include "toponet/errors.hpp"
#include "toponet/ingest.hpp"
#include "toponet/rng.hpp"

using namespace toponet;
using ingest::TimeSeriesMatrix;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
    const auto dir = std::filesystem::temp_directory_path() / "toponet_ingest_tests";
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

bool throws_containing(const std::function<void()>& fn, const std::string& needle) {
    try {
        fn();
    } catch (const std::exception& e) {
        return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
}

TimeSeriesMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    TimeSeriesMatrix ts;
    ts.values.resize(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        ts.channel_ids.push_back("ch" + std::to_string(r));
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            ts.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return ts;
}

// Independent check for the detrend fit: solve the 2x2 normal equations for
// (intercept, slope) directly and subtract the fitted line.
Eigen::VectorXd detrend_oracle(const Eigen::VectorXd& y) {
    const auto m = static_cast<double>(y.size());
    double sum_t = 0.0;
    double sum_tt = 0.0;
    double sum_y = 0.0;
    double sum_ty = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double t = static_cast<double>(i);
        sum_t += t;
        sum_tt += t * t;
        sum_y += y(i);
        sum_ty += t * y(i);
    }
    const double det = m * sum_tt - sum_t * sum_t;
    const double intercept = (sum_tt * sum_y - sum_t * sum_ty) / det;
    const double slope = (m * sum_ty - sum_t * sum_y) / det;
    Eigen::VectorXd out(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        out(i) = y(i) - (intercept + slope * static_cast<double>(i));
    }
    return out;
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::VectorXd da = a.array() - a.mean();
    const Eigen::VectorXd db = b.array() - b.mean();
    return da.dot(db) / std::sqrt(da.squaredNorm() * db.squaredNorm());
}

}  // namespace

TEST_CASE("load_time_series reads channels and ids") {
    const auto csv = write_temp("basic.csv", "v1,1,2,3\nv2,4,5,6\n");
    const auto ts = ingest::load_time_series(csv.string());
    CHECK(ts.channels() == 2);
    CHECK(ts.timepoints() == 3);
    CHECK(ts.channel_ids == std::vector<std::string>{"v1", "v2"});
    CHECK(ts.values(0, 0) == 1.0);
    CHECK(ts.values(1, 2) == 6.0);
    CHECK_FALSE(ts.timepoint_labels.has_value());
}

TEST_CASE("load_time_series attaches labels") {
    const auto csv = write_temp("labeled.csv", "v1,1,2,3\nv2,4,5,6\n");
    const auto labels = write_temp("labeled.labels", "A,A,B\n");
    const auto ts = ingest::load_time_series(csv.string(), labels.string());
    REQUIRE(ts.timepoint_labels.has_value());
    CHECK(*ts.timepoint_labels == std::vector<std::string>{"A", "A", "B"});
}

TEST_CASE("load_time_series rejects ragged rows, naming the row") {
    const auto csv = write_temp("ragged.csv", "v1,1,2,3\nv2,4,5\n");
    CHECK(throws_containing([&] { ingest::load_time_series(csv.string()); }, "row 2"));
    CHECK_THROWS_AS(ingest::load_time_series(csv.string()), DataError);
}

TEST_CASE("load_time_series rejects non-numeric cells") {
    const auto csv = write_temp("nonnum.csv", "v1,1,x,3\n");
    CHECK(throws_containing([&] { ingest::load_time_series(csv.string()); }, "non-numeric"));
}

TEST_CASE("load_time_series rejects label count mismatch") {
    const auto csv = write_temp("mismatch.csv", "v1,1,2,3\n");
    const auto labels = write_temp("mismatch.labels", "A,B\n");
    CHECK_THROWS_AS(ingest::load_time_series(csv.string(), labels.string()), DataError);
}

TEST_CASE("write/load round trip preserves values exactly") {
    auto ts = from_rows({{1.25, -3.5, 0.1}, {2.0, 5.0, -7.25}});
    const auto dir = std::filesystem::temp_directory_path() / "toponet_ingest_tests";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "roundtrip.csv").string();
    ingest::write_time_series_csv(ts, path);
    const auto back = ingest::load_time_series(path);
    CHECK(back.values == ts.values);
    CHECK(back.channel_ids == ts.channel_ids);
}

TEST_CASE("detrend removes exact lines") {
    const auto flat = ingest::detrend(from_rows({{1, 2, 3}}));
    CHECK(flat.values.cwiseAbs().maxCoeff() < 1e-14);
    const auto constant = ingest::detrend(from_rows({{5, 5, 5}}));
    CHECK(constant.values.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("detrend matches the normal-equations fit") {
    // Least-squares line through [1,3,2] is 1.5 + 0.5 t, so the residual is
    // [-0.5, 1.0, -0.5].
    Eigen::VectorXd y(3);
    y << 1, 3, 2;
    const Eigen::VectorXd expected = detrend_oracle(y);
    CHECK(expected(0) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(expected(1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(expected(2) == doctest::Approx(-0.5).epsilon(1e-12));

    const auto out = ingest::detrend(from_rows({{1, 3, 2}}));
    for (int i = 0; i < 3; ++i) CHECK(out.values(0, i) == doctest::Approx(expected(i)).epsilon(1e-12));
}

TEST_CASE("detrend output is uncorrelated with the index ramp") {
    Rng rng(41);
    for (int rep = 0; rep < 20; ++rep) {
        TimeSeriesMatrix ts;
        ts.channel_ids = {"a"};
        ts.values.resize(1, 50);
        for (int c = 0; c < 50; ++c) ts.values(0, c) = rng.next_normal() + 0.3 * c;
        const auto out = ingest::detrend(ts);
        Eigen::VectorXd ramp(50);
        for (int c = 0; c < 50; ++c) ramp(c) = c;
        CHECK(std::abs(pearson(out.values.row(0).transpose(), ramp)) < 1e-10);
    }
}

TEST_CASE("detrend is idempotent") {
    Rng rng(17);
    TimeSeriesMatrix ts;
    ts.channel_ids = {"a", "b"};
    ts.values.resize(2, 40);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 40; ++c) ts.values(r, c) = rng.next_normal() + 0.1 * c * (r + 1);
    const auto once = ingest::detrend(ts);
    const auto twice = ingest::detrend(once);
    CHECK((once.values - twice.values).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("detrend refuses single-timepoint input") {
    CHECK_THROWS_AS(ingest::detrend(from_rows({{1}})), DataError);
}

TEST_CASE("zscore standardizes with population sigma") {
    const auto out = ingest::zscore(from_rows({{1, 2, 3}}));
    const double e = std::sqrt(3.0 / 2.0);
    CHECK(out.values(0, 0) == doctest::Approx(-e).epsilon(1e-12));
    CHECK(out.values(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(out.values(0, 2) == doctest::Approx(e).epsilon(1e-12));

    const auto fixed = ingest::zscore(from_rows({{-1, 1}}));
    CHECK(fixed.values(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(fixed.values(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zscore names the degenerate channel") {
    auto ts = from_rows({{1, 2, 3}, {0, 0, 0}});
    ts.channel_ids = {"good", "flat"};
    CHECK(throws_containing([&] { ingest::zscore(ts); }, "flat"));
    CHECK_THROWS_AS(ingest::zscore(ts), NumericalError);
    CHECK(ingest::degenerate_channels(ts) == std::vector<std::string>{"flat"});
    const auto kept = ingest::drop_channels(ts, {"flat"});
    CHECK(kept.channels() == 1);
    CHECK(kept.channel_ids == std::vector<std::string>{"good"});
}

TEST_CASE("zscore invariants on random full-rank input") {
    Rng rng(53);
    TimeSeriesMatrix ts;
    ts.channel_ids = {"a", "b", "c"};
    ts.values.resize(3, 64);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 64; ++c) ts.values(r, c) = 2.0 * rng.next_normal() + r;
    const auto out = ingest::zscore(ts);
    for (int r = 0; r < 3; ++r) {
        const double mean = out.values.row(r).mean();
        const double sigma = std::sqrt((out.values.row(r).array() - mean).square().mean());
        CHECK(std::abs(mean) < 1e-12);
        CHECK(std::abs(sigma - 1.0) < 1e-12);
    }
}

TEST_CASE("split_by_class selects columns per tag") {
    auto ts = from_rows({{1, 2, 3}, {4, 5, 6}});
    ts.timepoint_labels = std::vector<std::string>{"A", "B", "A"};
    const auto parts = ingest::split_by_class(ts);
    REQUIRE(parts.size() == 2);
    CHECK(parts.at("A").timepoints() == 2);
    CHECK(parts.at("A").values(0, 0) == 1.0);
    CHECK(parts.at("A").values(0, 1) == 3.0);
    CHECK(parts.at("B").timepoints() == 1);
    CHECK(parts.at("B").values(1, 0) == 5.0);
}

TEST_CASE("split_by_class with one tag returns the full matrix") {
    auto ts = from_rows({{1, 2, 3}});
    ts.timepoint_labels = std::vector<std::string>{"A", "A", "A"};
    const auto parts = ingest::split_by_class(ts);
    REQUIRE(parts.size() == 1);
    CHECK(parts.at("A").values == ts.values);
}

TEST_CASE("split_by_class partitions every column exactly once") {
    auto ts = from_rows({{1, 2, 3}, {4, 5, 6}});
    ts.timepoint_labels = std::vector<std::string>{"A", "B", "C"};
    const auto parts = ingest::split_by_class(ts);
    REQUIRE(parts.size() == 3);
    Eigen::Index total = 0;
    for (const auto& [tag, part] : parts) total += part.timepoints();
    CHECK(total == ts.timepoints());
}

TEST_CASE("split_by_class requires labels") {
    CHECK_THROWS_AS(ingest::split_by_class(from_rows({{1, 2}})), DataError);
}

TEST_CASE("toy three-node model has the planted correlation structure") {
    const auto ts = ingest::synth_toy_three_node(0.4, 0.9, 0.5, 10000, 7);
    REQUIRE(ts.channels() == 3);
    REQUIRE(ts.timepoints() == 10000);
    // Population corr(Q,R) = 0.36 / sqrt(0.41 * 1.06) ~ 0.546.
    const double qr = pearson(ts.values.row(1).transpose(), ts.values.row(2).transpose());
    CHECK(qr > 0.4);
    CHECK(qr == doctest::Approx(0.546).epsilon(0.1));
}

TEST_CASE("toy model with zero couplings is uncorrelated") {
    const auto ts = ingest::synth_toy_three_node(0.0, 0.0, 1.0, 100, 3);
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            CHECK(std::abs(pearson(ts.values.row(i).transpose(), ts.values.row(j).transpose())) <
                  0.3);
        }
    }
}

TEST_CASE("toy model is deterministic given the seed") {
    const auto a = ingest::synth_toy_three_node(0.4, 0.9, 0.5, 200, 11);
    const auto b = ingest::synth_toy_three_node(0.4, 0.9, 0.5, 200, 11);
    CHECK(a.values == b.values);
}

TEST_CASE("synth_class_dataset produces one matrix per session and class") {
    ingest::SyntheticSpec spec;
    spec.n_classes = 2;
    spec.channels = 6;
    spec.timepoints_per_class = 50;
    spec.class_structure = {{"classA", {{1, 0.4}}}, {"classB", {{2, 0.4}}}};
    const auto sessions = ingest::synth_class_dataset(spec, 3, 99);
    CHECK(sessions.size() == 6);
    int class_a = 0;
    for (const auto& s : sessions) {
        if (s.class_tag == "classA") ++class_a;
        CHECK(s.series.channels() == 6);
        CHECK(s.series.timepoints() == 50);
    }
    CHECK(class_a == 3);
}

TEST_CASE("identity precision yields near-identity sample covariance") {
    ingest::SyntheticSpec spec;
    spec.n_classes = 1;
    spec.channels = 5;
    spec.timepoints_per_class = 5000;
    spec.class_structure = {{"only", {{1, 0.0}}}};
    const auto sessions = ingest::synth_class_dataset(spec, 2, 5);
    const auto& values = sessions.front().series.values;
    for (int i = 0; i < 5; ++i) {
        for (int j = i + 1; j < 5; ++j) {
            CHECK(std::abs(pearson(values.row(i).transpose(), values.row(j).transpose())) < 0.1);
        }
    }
}

TEST_CASE("synth_class_dataset is bitwise deterministic") {
    ingest::SyntheticSpec spec;
    spec.n_classes = 2;
    spec.channels = 4;
    spec.timepoints_per_class = 30;
    spec.class_structure = {{"classA", {{1, 0.3}}}, {"classB", {{2, 0.3}}}};
    const auto a = ingest::synth_class_dataset(spec, 2, 123);
    const auto b = ingest::synth_class_dataset(spec, 2, 123);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].series.values == b[i].series.values);
}

TEST_CASE("synthetic spec validation rejects duplicate patterns and bad shapes") {
    ingest::SyntheticSpec spec;
    spec.n_classes = 2;
    spec.channels = 6;
    spec.timepoints_per_class = 40;
    spec.class_structure = {{"classA", {{1, 0.4}}}, {"classB", {{1, 0.4}}}};
    spec.precision_seed = 1;
    // identical strides share a sparsity pattern
    CHECK_THROWS_AS(spec.validate(), ConfigError);

    spec.class_structure = {{"classA", {{1, 0.4}}}, {"classB", {{2, 0.4}}}};
    CHECK_NOTHROW(spec.validate());

    // an over-strong coupling loses positive definiteness
    spec.class_structure = {{"classA", {{1, 0.9}}}, {"classB", {{2, 0.4}}}};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("planted precision is symmetric positive definite") {
    ingest::SyntheticSpec spec;
    spec.n_classes = 3;
    spec.channels = 12;
    spec.timepoints_per_class = 40;
    spec.class_structure = {{"a", {{1, 0.42}}}, {"b", {{2, 0.42}}}, {"c", {{3, 0.42}}}};
    for (int c = 0; c < 3; ++c) {
        const Eigen::MatrixXd omega = ingest::planted_precision(spec, c);
        CHECK((omega - omega.transpose()).cwiseAbs().maxCoeff() == 0.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(omega);
        CHECK(eigen.eigenvalues().minCoeff() > 0.0);
    }
}
