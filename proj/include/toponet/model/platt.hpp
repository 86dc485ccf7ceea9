#pragma once

#include <Eigen/Dense>

namespace toponet::model {

// Sigmoid map from decision values to positive-class probability:
// p(+1 | f) = 1 / (1 + exp(a * f + b)).
struct PlattCalibration {
    double a = 0.0;
    double b = 0.0;
    bool degenerate = false;  // all decision values equal; prior returned instead
    double prior = 0.5;
};

PlattCalibration platt_calibrate(const Eigen::VectorXd& decision_values,
                                 const Eigen::VectorXi& y);

double platt_probability(const PlattCalibration& calib, double decision_value);

}  // namespace toponet::model
