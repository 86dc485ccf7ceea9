#pragma once

#include <Eigen/Dense>

#include <string>

namespace toponet::model {

struct KernelSpec {
    enum class Type { Linear, Rbf, Polynomial };

    Type type = Type::Rbf;
    double gamma = 0.0;  // 0 resolves to 1 / (d * mean feature variance) at fit time
    int degree = 3;
    double coef0 = 1.0;

    static KernelSpec linear() { return {Type::Linear, 0.0, 0, 0.0}; }
    static KernelSpec rbf(double gamma = 0.0) { return {Type::Rbf, gamma, 0, 0.0}; }
    static KernelSpec polynomial(int degree = 3, double coef0 = 1.0) {
        return {Type::Polynomial, 0.0, degree, coef0};
    }

    std::string name() const;
};

struct SvmModel {
    KernelSpec kernel;  // gamma resolved
    Eigen::MatrixXd support_vectors;
    Eigen::VectorXd dual_coef;  // alpha_i * y_i per support vector
    double bias = 0.0;
    double C = 1.0;
    double tol = 1e-3;

    // Diagnostics recorded at convergence.
    double kkt_residual = 0.0;
    double training_accuracy = 0.0;
};

// Soft-margin dual solved by sequential minimal optimization. Training rows
// are canonicalized (sorted lexicographically) first, which makes the fitted
// model independent of input row order. Labels must be +/-1 with both classes
// present.
SvmModel train_svm(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, KernelSpec kernel,
                   double C = 1.0, double tol = 1e-3);

Eigen::VectorXd decision_function(const SvmModel& model, const Eigen::MatrixXd& x);
double decision_value(const SvmModel& model, const Eigen::RowVectorXd& x);

// sign of the decision value; an exact 0 maps to +1.
Eigen::VectorXi predict_svm(const SvmModel& model, const Eigen::MatrixXd& x);

}  // namespace toponet::model
