#pragma once

#include <Eigen/Dense>

namespace toponet::model {

struct PCAModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;               // rows orthonormal, d x d
    Eigen::VectorXd explained_variance_ratio; // descending, length d
};

// Mean-centered SVD; components sorted by descending singular value.
PCAModel fit_pca(const Eigen::MatrixXd& x);

// Projects centered rows onto the first k components.
Eigen::MatrixXd transform_pca(const PCAModel& model, const Eigen::MatrixXd& x, int k);

// Smallest k whose cumulative explained-variance ratio reaches the threshold.
int components_for_variance(const PCAModel& model, double threshold);

Eigen::MatrixXd transform_pca_variance(const PCAModel& model, const Eigen::MatrixXd& x,
                                       double threshold);

}  // namespace toponet::model
