#include "toponet/model/cv.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "toponet/errors.hpp"
#include "toponet/rng.hpp"

namespace toponet::model {

namespace {

ClassMetrics metrics_for(long tp, long fp, long fn, int label) {
    ClassMetrics m;
    m.label = label;
    if (tp + fp == 0) {
        m.precision = 0.0;
        m.zero_division = true;
    } else {
        m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    }
    if (tp + fn == 0) {
        m.recall = 0.0;
        m.zero_division = true;
    } else {
        m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    }
    if (m.precision + m.recall == 0.0) {
        m.f1 = 0.0;
        m.zero_division = true;
    } else {
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    }
    return m;
}

CVReport finalize(const Eigen::VectorXi& y, std::vector<int> predictions,
                  std::vector<int> fold_of_row, int folds) {
    CVReport report;
    report.folds = folds;
    report.predictions = std::move(predictions);
    report.fold_of_row = std::move(fold_of_row);

    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const bool truth_pos = y(i) == 1;
        const bool pred_pos = report.predictions[static_cast<std::size_t>(i)] == 1;
        if (truth_pos && pred_pos) ++report.confusion.tp;
        if (!truth_pos && pred_pos) ++report.confusion.fp;
        if (truth_pos && !pred_pos) ++report.confusion.fn;
        if (!truth_pos && !pred_pos) ++report.confusion.tn;
    }
    report.per_class = compute_metrics(report.confusion);
    report.accuracy = accuracy_from(report.confusion);

    std::vector<double> fold_acc(static_cast<std::size_t>(folds), 0.0);
    std::vector<int> fold_size(static_cast<std::size_t>(folds), 0);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const auto f = static_cast<std::size_t>(report.fold_of_row[static_cast<std::size_t>(i)]);
        ++fold_size[f];
        if (report.predictions[static_cast<std::size_t>(i)] == y(i)) fold_acc[f] += 1.0;
    }
    double mean = 0.0;
    for (std::size_t f = 0; f < fold_acc.size(); ++f) {
        fold_acc[f] /= std::max(fold_size[f], 1);
        mean += fold_acc[f];
    }
    mean /= static_cast<double>(folds);
    double var = 0.0;
    for (const double a : fold_acc) var += (a - mean) * (a - mean);
    var /= static_cast<double>(folds);
    report.fold_accuracy_mean = mean;
    report.fold_accuracy_std = std::sqrt(var);
    return report;
}

}  // namespace

std::vector<ClassMetrics> compute_metrics(const ConfusionCounts& c) {
    if (c.tp < 0 || c.fp < 0 || c.fn < 0 || c.tn < 0) {
        throw DataError("confusion counts must be nonnegative");
    }
    // The -1 class swaps the roles of the counts.
    return {metrics_for(c.tp, c.fp, c.fn, 1), metrics_for(c.tn, c.fn, c.fp, -1)};
}

double accuracy_from(const ConfusionCounts& c) {
    const long total = c.total();
    return total == 0 ? 0.0 : static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
}

CVReport loocv(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const TrainerFn& trainer,
               const CvHooks* hooks) {
    const int n = static_cast<int>(x.rows());
    if (n < 3) throw DataError("LOOCV needs at least 3 rows");

    std::vector<int> predictions(static_cast<std::size_t>(n), 0);
    std::vector<int> fold_of_row(static_cast<std::size_t>(n), 0);
    Eigen::MatrixXd train_x(n - 1, x.cols());
    Eigen::VectorXi train_y(n - 1);
    for (int held_out = 0; held_out < n; ++held_out) {
        std::vector<int> train_rows;
        train_rows.reserve(static_cast<std::size_t>(n - 1));
        int at = 0;
        for (int i = 0; i < n; ++i) {
            if (i == held_out) continue;
            train_x.row(at) = x.row(i);
            train_y(at) = y(i);
            train_rows.push_back(i);
            ++at;
        }
        if (hooks && hooks->on_fit) hooks->on_fit(held_out, train_rows);
        const RowPredictor predict = trainer(train_x, train_y);
        predictions[static_cast<std::size_t>(held_out)] = predict(x.row(held_out));
        fold_of_row[static_cast<std::size_t>(held_out)] = held_out;
    }
    return finalize(y, std::move(predictions), std::move(fold_of_row), n);
}

CVReport kfold_cv(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, int k, std::uint64_t seed,
                  const TrainerFn& trainer, const CvHooks* hooks) {
    const int n = static_cast<int>(x.rows());
    if (k < 2) throw ConfigError("k-fold CV needs k >= 2");
    if (k == n) return loocv(x, y, trainer, hooks);  // singleton folds

    std::map<int, std::vector<int>> by_class;
    for (int i = 0; i < n; ++i) by_class[y(i)].push_back(i);

    int effective_k = k;
    for (const auto& [label, rows] : by_class) {
        effective_k = std::min(effective_k, static_cast<int>(rows.size()));
    }
    std::vector<std::string> warnings;
    if (effective_k < k) {
        warnings.push_back("smallest class has fewer than " + std::to_string(k) +
                           " members; falling back to " + std::to_string(effective_k) +
                           "-fold CV");
    }
    if (effective_k < 2) throw DataError("k-fold CV needs every class to have >= 2 members");

    // Stratified assignment: shuffle within class, then deal through a global
    // fold counter so overall fold sizes differ by at most one.
    Rng rng(seed);
    std::vector<int> fold_of_row(static_cast<std::size_t>(n), 0);
    int counter = 0;
    for (auto& [label, rows] : by_class) {
        for (std::size_t i = rows.size(); i > 1; --i) {
            std::swap(rows[i - 1], rows[rng.next_index(i)]);
        }
        for (const int row : rows) {
            fold_of_row[static_cast<std::size_t>(row)] = counter % effective_k;
            ++counter;
        }
    }

    std::vector<int> predictions(static_cast<std::size_t>(n), 0);
    for (int fold = 0; fold < effective_k; ++fold) {
        std::vector<int> train_rows;
        std::vector<int> test_rows;
        for (int i = 0; i < n; ++i) {
            (fold_of_row[static_cast<std::size_t>(i)] == fold ? test_rows : train_rows).push_back(i);
        }
        Eigen::MatrixXd train_x(static_cast<Eigen::Index>(train_rows.size()), x.cols());
        Eigen::VectorXi train_y(static_cast<Eigen::Index>(train_rows.size()));
        for (std::size_t i = 0; i < train_rows.size(); ++i) {
            train_x.row(static_cast<Eigen::Index>(i)) = x.row(train_rows[i]);
            train_y(static_cast<Eigen::Index>(i)) = y(train_rows[i]);
        }
        if (hooks && hooks->on_fit) hooks->on_fit(fold, train_rows);
        const RowPredictor predict = trainer(train_x, train_y);
        for (const int row : test_rows) {
            predictions[static_cast<std::size_t>(row)] = predict(x.row(row));
        }
    }
    CVReport report = finalize(y, std::move(predictions), std::move(fold_of_row), effective_k);
    report.warnings = std::move(warnings);
    return report;
}

}  // namespace toponet::model
