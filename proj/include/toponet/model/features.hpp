#pragma once

#include <Eigen/Dense>

#include <vector>

namespace toponet::model {

// Per-column standardizer (population sigma). Constant columns pass through
// untouched and are flagged.
struct FeatureScaler {
    Eigen::VectorXd mean;
    Eigen::VectorXd sigma;
    std::vector<bool> constant;

    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

std::pair<Eigen::MatrixXd, FeatureScaler> standardize_features(const Eigen::MatrixXd& x);

}  // namespace toponet::model
