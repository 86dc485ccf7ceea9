#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace toponet::model {

struct ConfusionCounts {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    long tn = 0;

    long total() const { return tp + fp + fn + tn; }
};

struct ClassMetrics {
    int label = 1;  // +1 or -1
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool zero_division = false;  // set when a 0/0 was reported as 0
};

struct CVReport {
    int folds = 0;
    std::vector<int> predictions;  // aligned to input rows
    std::vector<int> fold_of_row;
    ConfusionCounts confusion;  // +1 is the positive class
    std::vector<ClassMetrics> per_class;
    double accuracy = 0.0;
    double fold_accuracy_mean = 0.0;
    double fold_accuracy_std = 0.0;
    std::vector<std::string> warnings;
};

// A trainer maps (X_train, y_train) to a row predictor. Everything fitted for
// a fold must be fitted inside the trainer, on the fold's training rows only.
using RowPredictor = std::function<int(const Eigen::RowVectorXd&)>;
using TrainerFn = std::function<RowPredictor(const Eigen::MatrixXd&, const Eigen::VectorXi&)>;

// Observation hook: called once per fold with the training row indices,
// before the trainer runs. Lets tests prove no fit ever saw held-out rows.
struct CvHooks {
    std::function<void(int fold, const std::vector<int>& train_rows)> on_fit;
};

// Per-class precision/recall/F1 (for +1 and -1) plus accuracy identities.
std::vector<ClassMetrics> compute_metrics(const ConfusionCounts& counts);
double accuracy_from(const ConfusionCounts& counts);

// Leave-one-out: n folds, one held-out row each, in row order.
CVReport loocv(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const TrainerFn& trainer,
               const CvHooks* hooks = nullptr);

// Stratified k-fold with a seeded shuffle. A class smaller than k triggers a
// fallback to the largest feasible k, recorded as a warning.
CVReport kfold_cv(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, int k, std::uint64_t seed,
                  const TrainerFn& trainer, const CvHooks* hooks = nullptr);

}  // namespace toponet::model
