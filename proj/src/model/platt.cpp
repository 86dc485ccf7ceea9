#include "toponet/model/platt.hpp"

#include <algorithm>
#include <cmath>

#include "toponet/errors.hpp"

namespace toponet::model {

// Penalized maximum-likelihood sigmoid fit; Newton iterations with
// backtracking as in Lin, Lin & Weng's numerically stable formulation.
PlattCalibration platt_calibrate(const Eigen::VectorXd& f, const Eigen::VectorXi& y) {
    const Eigen::Index n = f.size();
    if (n < 2 || y.size() != n) throw DataError("Platt calibration needs matched scores and labels");

    double n_pos = 0.0;
    double n_neg = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        (y(i) == 1 ? n_pos : n_neg) += 1.0;
    }
    if (n_pos == 0.0 || n_neg == 0.0) throw DataError("Platt calibration needs both classes");

    PlattCalibration out;
    out.prior = n_pos / static_cast<double>(n);
    if ((f.array() - f(0)).abs().maxCoeff() == 0.0) {
        out.degenerate = true;
        return out;
    }

    // Regularized targets keep the fit away from 0/1.
    const double t_pos = (n_pos + 1.0) / (n_pos + 2.0);
    const double t_neg = 1.0 / (n_neg + 2.0);
    Eigen::VectorXd t(n);
    for (Eigen::Index i = 0; i < n; ++i) t(i) = y(i) == 1 ? t_pos : t_neg;

    double a = 0.0;
    double b = std::log((n_neg + 1.0) / (n_pos + 1.0));

    auto objective = [&](double aa, double bb) {
        double obj = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double z = aa * f(i) + bb;
            // log(1 + exp(-|z|)) + max(z, 0) is the stable log(1 + exp(z))
            const double log1pe = std::log1p(std::exp(-std::abs(z))) + std::max(z, 0.0);
            obj += t(i) * z + log1pe - z;  // = t*z + log(1 + exp(-z))
        }
        return obj;
    };

    const int max_iter = 100;
    const double min_step = 1e-10;
    const double ridge = 1e-12;
    double obj = objective(a, b);
    for (int iter = 0; iter < max_iter; ++iter) {
        double h11 = ridge;
        double h22 = ridge;
        double h21 = 0.0;
        double g1 = 0.0;
        double g2 = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double z = a * f(i) + b;
            double p;
            double q;
            if (z >= 0.0) {
                p = std::exp(-z) / (1.0 + std::exp(-z));
                q = 1.0 / (1.0 + std::exp(-z));
            } else {
                p = 1.0 / (1.0 + std::exp(z));
                q = std::exp(z) / (1.0 + std::exp(z));
            }
            const double d2 = p * q;
            h11 += f(i) * f(i) * d2;
            h22 += d2;
            h21 += f(i) * d2;
            const double d1 = t(i) - p;
            g1 += f(i) * d1;
            g2 += d1;
        }
        if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;

        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * db;

        double step = 1.0;
        while (step >= min_step) {
            const double a_new = a + step * da;
            const double b_new = b + step * db;
            const double obj_new = objective(a_new, b_new);
            if (obj_new < obj + 1e-4 * step * gd) {
                a = a_new;
                b = b_new;
                obj = obj_new;
                break;
            }
            step /= 2.0;
        }
        if (step < min_step) break;  // line search failed; accept current fit
    }

    out.a = a;
    out.b = b;
    return out;
}

double platt_probability(const PlattCalibration& calib, double decision_value) {
    if (calib.degenerate) return calib.prior;
    const double z = calib.a * decision_value + calib.b;
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(z));
}

}  // namespace toponet::model
