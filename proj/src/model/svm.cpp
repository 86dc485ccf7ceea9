#include "toponet/model/svm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "toponet/errors.hpp"

namespace toponet::model {

namespace {

double kernel_eval(const KernelSpec& k, const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
    switch (k.type) {
        case KernelSpec::Type::Linear:
            return a.dot(b);
        case KernelSpec::Type::Rbf:
            return std::exp(-k.gamma * (a - b).squaredNorm());
        case KernelSpec::Type::Polynomial:
            return std::pow(a.dot(b) + k.coef0, k.degree);
    }
    return 0.0;
}

// Platt's SMO over a precomputed kernel matrix. Indices are already in
// canonical order; every scan below is a plain forward loop, so the whole
// optimization is deterministic.
class SmoSolver {
public:
    SmoSolver(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, double c, double tol)
        : k_(gram), y_(y), c_(c), tol_(tol), n_(static_cast<int>(y.size())),
          alpha_(Eigen::VectorXd::Zero(y.size())), errors_(-y) {}

    void solve() {
        int num_changed = 0;
        bool examine_all = true;
        int guard = 0;
        const int max_sweeps = 2000 + 200 * n_;
        while (num_changed > 0 || examine_all) {
            if (++guard > max_sweeps) {
                throw NumericalError("SMO failed to converge within the sweep budget");
            }
            num_changed = 0;
            for (int i = 0; i < n_; ++i) {
                if (examine_all || is_free(i)) num_changed += examine(i);
            }
            if (examine_all) {
                examine_all = false;
            } else if (num_changed == 0) {
                examine_all = true;
            }
        }
    }

    const Eigen::VectorXd& alpha() const { return alpha_; }
    double threshold() const { return b_; }

    // Largest KKT violation of y_i * f(x_i) - 1 against the box constraints.
    double max_violation() const {
        double worst = 0.0;
        for (int i = 0; i < n_; ++i) {
            const double r = errors_(i) * y_(i);
            if (alpha_(i) < c_) worst = std::max(worst, -r);
            if (alpha_(i) > 0.0) worst = std::max(worst, r);
        }
        return worst;
    }

private:
    bool is_free(int i) const { return alpha_(i) > 0.0 && alpha_(i) < c_; }

    int examine(int i2) {
        const double r2 = errors_(i2) * y_(i2);
        const bool violates = (r2 < -tol_ && alpha_(i2) < c_) || (r2 > tol_ && alpha_(i2) > 0.0);
        if (!violates) return 0;

        // First choice: the free point with the largest |E1 - E2|.
        int best = -1;
        double best_gap = -1.0;
        for (int i = 0; i < n_; ++i) {
            if (!is_free(i)) continue;
            const double gap = std::abs(errors_(i) - errors_(i2));
            if (gap > best_gap) {
                best_gap = gap;
                best = i;
            }
        }
        if (best >= 0 && take_step(best, i2)) return 1;
        for (int i = 0; i < n_; ++i) {
            if (is_free(i) && take_step(i, i2)) return 1;
        }
        for (int i = 0; i < n_; ++i) {
            if (take_step(i, i2)) return 1;
        }
        return 0;
    }

    bool take_step(int i1, int i2) {
        if (i1 == i2) return false;
        const double a1_old = alpha_(i1);
        const double a2_old = alpha_(i2);
        const double y1 = y_(i1);
        const double y2 = y_(i2);
        const double e1 = errors_(i1);
        const double e2 = errors_(i2);
        const double s = y1 * y2;

        double low;
        double high;
        if (y1 != y2) {
            low = std::max(0.0, a2_old - a1_old);
            high = std::min(c_, c_ + a2_old - a1_old);
        } else {
            low = std::max(0.0, a1_old + a2_old - c_);
            high = std::min(c_, a1_old + a2_old);
        }
        if (low == high) return false;

        const double k11 = k_(i1, i1);
        const double k12 = k_(i1, i2);
        const double k22 = k_(i2, i2);
        const double eta = k11 + k22 - 2.0 * k12;

        double a2 = 0.0;
        if (eta > 0.0) {
            a2 = a2_old + y2 * (e1 - e2) / eta;
            a2 = std::clamp(a2, low, high);
        } else {
            // Flat direction: evaluate the objective at both segment ends.
            // The threshold terms y*b of the textbook f1/f2 cancel in the
            // endpoint comparison, so they are omitted here.
            const double f1 = y1 * e1 - a1_old * k11 - s * a2_old * k12;
            const double f2 = y2 * e2 - s * a1_old * k12 - a2_old * k22;
            const double l1 = a1_old + s * (a2_old - low);
            const double h1 = a1_old + s * (a2_old - high);
            const double obj_low = l1 * f1 + low * f2 + 0.5 * l1 * l1 * k11 +
                                   0.5 * low * low * k22 + s * low * l1 * k12;
            const double obj_high = h1 * f1 + high * f2 + 0.5 * h1 * h1 * k11 +
                                    0.5 * high * high * k22 + s * high * h1 * k12;
            if (obj_low < obj_high - 1e-12) {
                a2 = low;
            } else if (obj_low > obj_high + 1e-12) {
                a2 = high;
            } else {
                return false;
            }
        }
        if (std::abs(a2 - a2_old) < 1e-12 * (a2 + a2_old + 1e-12)) return false;
        const double a1 = a1_old + s * (a2_old - a2);

        // Threshold update (Platt): pick the value consistent with free points.
        const double b_old = b_;
        const double b1 = e1 + y1 * (a1 - a1_old) * k11 + y2 * (a2 - a2_old) * k12 + b_;
        const double b2 = e2 + y1 * (a1 - a1_old) * k12 + y2 * (a2 - a2_old) * k22 + b_;
        if (a1 > 0.0 && a1 < c_) {
            b_ = b1;
        } else if (a2 > 0.0 && a2 < c_) {
            b_ = b2;
        } else {
            b_ = (b1 + b2) / 2.0;
        }

        for (int i = 0; i < n_; ++i) {
            errors_(i) += y1 * (a1 - a1_old) * k_(i1, i) + y2 * (a2 - a2_old) * k_(i2, i) -
                          (b_ - b_old);
        }
        alpha_(i1) = a1;
        alpha_(i2) = a2;
        errors_(i1) = decision(i1) - y1;
        errors_(i2) = decision(i2) - y2;
        return true;
    }

    double decision(int i) const {
        double u = -b_;
        for (int j = 0; j < n_; ++j) {
            if (alpha_(j) != 0.0) u += alpha_(j) * y_(j) * k_(j, i);
        }
        return u;
    }

    const Eigen::MatrixXd& k_;
    const Eigen::VectorXd& y_;
    double c_;
    double tol_;
    int n_;
    Eigen::VectorXd alpha_;
    Eigen::VectorXd errors_;  // f(x_i) - y_i
    double b_ = 0.0;
};

}  // namespace

std::string KernelSpec::name() const {
    switch (type) {
        case Type::Linear:
            return "linear";
        case Type::Rbf:
            return "rbf";
        case Type::Polynomial:
            return "polynomial";
    }
    return "unknown";
}

SvmModel train_svm(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, KernelSpec kernel,
                   double C, double tol) {
    const int n = static_cast<int>(x.rows());
    if (n < 2) throw DataError("SVM training needs at least 2 rows");
    if (y.size() != n) throw DataError("SVM label count does not match row count");
    if (C <= 0.0) throw ConfigError("SVM C must be positive");
    int positives = 0;
    for (int i = 0; i < n; ++i) {
        if (y(i) != 1 && y(i) != -1) throw DataError("SVM labels must be +1 or -1");
        if (y(i) == 1) ++positives;
    }
    if (positives == 0 || positives == n) {
        throw DataError("SVM training needs both classes present");
    }

    // Canonical row order: the fitted model must not depend on input order.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            if (x(a, c) != x(b, c)) return x(a, c) < x(b, c);
        }
        return y(a) < y(b);
    });
    Eigen::MatrixXd xs(n, x.cols());
    Eigen::VectorXd ys(n);
    for (int i = 0; i < n; ++i) {
        xs.row(i) = x.row(order[static_cast<std::size_t>(i)]);
        ys(i) = static_cast<double>(y(order[static_cast<std::size_t>(i)]));
    }

    if (kernel.type == KernelSpec::Type::Rbf && kernel.gamma == 0.0) {
        const Eigen::RowVectorXd means = xs.colwise().mean();
        const double mean_var =
            (xs.rowwise() - means).array().square().colwise().mean().mean();
        kernel.gamma = mean_var > 0.0 ? 1.0 / (static_cast<double>(x.cols()) * mean_var)
                                      : 1.0 / static_cast<double>(x.cols());
    }

    Eigen::MatrixXd gram(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            const double v = kernel_eval(kernel, xs.row(i), xs.row(j));
            gram(i, j) = v;
            gram(j, i) = v;
        }
    }

    SmoSolver solver(gram, ys, C, tol);
    solver.solve();

    SvmModel model;
    model.kernel = kernel;
    model.C = C;
    model.tol = tol;
    model.bias = -solver.threshold();
    model.kkt_residual = solver.max_violation();

    const Eigen::VectorXd& alpha = solver.alpha();
    std::vector<int> sv;
    for (int i = 0; i < n; ++i) {
        if (alpha(i) > 0.0) sv.push_back(i);
    }
    model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), x.cols());
    model.dual_coef.resize(static_cast<Eigen::Index>(sv.size()));
    for (std::size_t i = 0; i < sv.size(); ++i) {
        model.support_vectors.row(static_cast<Eigen::Index>(i)) = xs.row(sv[i]);
        model.dual_coef(static_cast<Eigen::Index>(i)) = alpha(sv[i]) * ys(sv[i]);
    }

    int correct = 0;
    for (int i = 0; i < n; ++i) {
        const double f = decision_value(model, xs.row(i));
        const int pred = f < 0.0 ? -1 : 1;
        if (pred == static_cast<int>(ys(i))) ++correct;
    }
    model.training_accuracy = static_cast<double>(correct) / n;
    return model;
}

double decision_value(const SvmModel& model, const Eigen::RowVectorXd& x) {
    if (x.cols() != model.support_vectors.cols()) {
        throw DataError("SVM expects " + std::to_string(model.support_vectors.cols()) +
                        " features, got " + std::to_string(x.cols()));
    }
    double f = model.bias;
    for (Eigen::Index i = 0; i < model.support_vectors.rows(); ++i) {
        f += model.dual_coef(i) * kernel_eval(model.kernel, model.support_vectors.row(i), x);
    }
    return f;
}

Eigen::VectorXd decision_function(const SvmModel& model, const Eigen::MatrixXd& x) {
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = decision_value(model, x.row(i));
    return out;
}

Eigen::VectorXi predict_svm(const SvmModel& model, const Eigen::MatrixXd& x) {
    const Eigen::VectorXd f = decision_function(model, x);
    Eigen::VectorXi out(f.size());
    for (Eigen::Index i = 0; i < f.size(); ++i) out(i) = f(i) < 0.0 ? -1 : 1;
    return out;
}

}  // namespace toponet::model
