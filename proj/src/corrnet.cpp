#include "toponet/corrnet.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "toponet/errors.hpp"

namespace toponet::corrnet {

namespace {

// Cholesky factorization of a symmetric matrix stored row-major, with a
// relative pivot tolerance. Returns false on (numerical) rank deficiency.
// Deliberately hand-rolled: the regression oracle must not share a solver
// with the SVD-based production path.
bool cholesky_factor(std::vector<double>& a, int n, double rel_tol) {
    double max_diag = 0.0;
    for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a[i * n + i]));
    const double floor = rel_tol * std::max(max_diag, 1e-300);
    for (int j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (int k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (d <= floor) return false;
        const double root = std::sqrt(d);
        a[j * n + j] = root;
        for (int i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (int k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / root;
        }
    }
    return true;
}

void cholesky_solve(const std::vector<double>& l, int n, std::vector<double>& b) {
    for (int i = 0; i < n; ++i) {
        double s = b[static_cast<std::size_t>(i)];
        for (int k = 0; k < i; ++k) s -= l[i * n + k] * b[static_cast<std::size_t>(k)];
        b[static_cast<std::size_t>(i)] = s / l[i * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[static_cast<std::size_t>(i)];
        for (int k = i + 1; k < n; ++k) s -= l[k * n + i] * b[static_cast<std::size_t>(k)];
        b[static_cast<std::size_t>(i)] = s / l[i * n + i];
    }
}

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double mx = x.mean();
    const double my = y.mean();
    const Eigen::VectorXd dx = x.array() - mx;
    const Eigen::VectorXd dy = y.array() - my;
    const double denom = std::sqrt(dx.squaredNorm() * dy.squaredNorm());
    if (denom == 0.0) throw NumericalError("Pearson correlation of a constant series");
    return dx.dot(dy) / denom;
}

}  // namespace

Eigen::MatrixXd sample_covariance(const ingest::TimeSeriesMatrix& series) {
    const Eigen::Index n = series.channels();
    const Eigen::Index m = series.timepoints();
    if (m < 2) throw DataError("sample covariance requires at least 2 timepoints");

    Eigen::MatrixXd centered = series.values;
    for (Eigen::Index r = 0; r < n; ++r) {
        centered.row(r).array() -= series.values.row(r).mean();
    }
    Eigen::MatrixXd cov(n, n);
    const double denom = static_cast<double>(m - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const double c = centered.row(i).dot(centered.row(j)) / denom;
            cov(i, j) = c;
            cov(j, i) = c;
        }
    }
    return cov;
}

CorrelationMatrix marginal_correlation(const ingest::TimeSeriesMatrix& series) {
    const Eigen::MatrixXd cov = sample_covariance(series);
    const Eigen::Index n = cov.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (cov(i, i) == 0.0) {
            throw NumericalError("constant channel '" +
                                 series.channel_ids[static_cast<std::size_t>(i)] +
                                 "' has no marginal correlation");
        }
    }
    CorrelationMatrix out;
    out.kind = CorrKind::Marginal;
    out.channel_ids = series.channel_ids;
    out.values.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double r = cov(i, j) / std::sqrt(cov(i, i) * cov(j, j));
            out.values(i, j) = r;
            out.values(j, i) = r;
        }
    }
    return out;
}

Eigen::MatrixXd moore_penrose_pinv(const Eigen::MatrixXd& matrix, double rel_tol) {
    if (!matrix.allFinite()) throw NumericalError("pseudo-inverse of a non-finite matrix");
    if (rel_tol <= 0.0) throw ConfigError("pseudo-inverse rel_tol must be positive");

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();
    if (sigma.size() == 0) return Eigen::MatrixXd::Zero(matrix.cols(), matrix.rows());

    const double cutoff = rel_tol * sigma(0);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sigma.size());
    for (Eigen::Index k = 0; k < sigma.size(); ++k) {
        if (sigma(k) > cutoff && sigma(k) > 0.0) inv(k) = 1.0 / sigma(k);
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

CorrelationMatrix partial_correlation(const ingest::TimeSeriesMatrix& series, double rel_tol) {
    const Eigen::Index n = series.channels();
    if (n < 2) throw DataError("partial correlation requires at least 2 channels");
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mean = series.values.row(i).mean();
        if ((series.values.row(i).array() - mean).square().sum() == 0.0) {
            throw NumericalError("constant channel '" +
                                 series.channel_ids[static_cast<std::size_t>(i)] +
                                 "' has no partial correlation");
        }
    }

    const Eigen::MatrixXd cov = sample_covariance(series);
    Eigen::MatrixXd omega = moore_penrose_pinv(cov, rel_tol);
    omega = ((omega + omega.transpose()) / 2.0).eval();

    CorrelationMatrix out;
    out.kind = CorrKind::Partial;
    out.channel_ids = series.channel_ids;
    out.values.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (omega(i, i) <= 0.0) {
            throw NumericalError("precision diagonal not positive at index " + std::to_string(i));
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values(i, i) = 1.0;  // reported as 1 by convention; unused downstream
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double rho = -omega(i, j) / std::sqrt(omega(i, i) * omega(j, j));
            out.values(i, j) = rho;
            out.values(j, i) = rho;
        }
    }
    return out;
}

CorrelationMatrix partial_correlation_regression_oracle(const ingest::TimeSeriesMatrix& series) {
    const Eigen::Index n = series.channels();
    const Eigen::Index m = series.timepoints();
    if (n < 2) throw DataError("partial correlation requires at least 2 channels");
    if (m < n + 1) {
        throw OracleInapplicableError("regression oracle needs more timepoints than channels");
    }

    // Full-rank precheck on the covariance; the regression route is undefined
    // under multicollinearity.
    {
        const Eigen::MatrixXd cov = sample_covariance(series);
        std::vector<double> a(static_cast<std::size_t>(n * n));
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                a[static_cast<std::size_t>(i * n + j)] = cov(i, j);
        if (!cholesky_factor(a, static_cast<int>(n), 1e-10)) {
            throw OracleInapplicableError("covariance is rank deficient (multicollinear channels)");
        }
    }

    auto residual_on = [&](Eigen::Index target, Eigen::Index excluded) {
        // Design: intercept plus every channel except target and excluded.
        std::vector<Eigen::Index> predictors;
        for (Eigen::Index k = 0; k < n; ++k) {
            if (k != target && k != excluded) predictors.push_back(k);
        }
        const int p = static_cast<int>(predictors.size()) + 1;
        Eigen::MatrixXd design(m, p);
        design.col(0).setOnes();
        for (std::size_t k = 0; k < predictors.size(); ++k) {
            design.col(static_cast<Eigen::Index>(k + 1)) =
                series.values.row(predictors[k]).transpose();
        }
        const Eigen::VectorXd y = series.values.row(target).transpose();

        std::vector<double> gram(static_cast<std::size_t>(p * p));
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j)
                gram[static_cast<std::size_t>(i * p + j)] = design.col(i).dot(design.col(j));
        std::vector<double> rhs(static_cast<std::size_t>(p));
        for (int i = 0; i < p; ++i) rhs[static_cast<std::size_t>(i)] = design.col(i).dot(y);

        if (!cholesky_factor(gram, p, 1e-12)) {
            throw OracleInapplicableError("conditioning set is rank deficient");
        }
        cholesky_solve(gram, p, rhs);

        Eigen::VectorXd fitted = Eigen::VectorXd::Zero(m);
        for (int i = 0; i < p; ++i) fitted += rhs[static_cast<std::size_t>(i)] * design.col(i);
        return (y - fitted).eval();
    };

    CorrelationMatrix out;
    out.kind = CorrKind::Partial;
    out.channel_ids = series.channel_ids;
    out.values = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const Eigen::VectorXd ri = residual_on(i, j);
            const Eigen::VectorXd rj = residual_on(j, i);
            const double rho = pearson(ri, rj);
            out.values(i, j) = rho;
            out.values(j, i) = rho;
        }
    }
    return out;
}

VisualNetwork build_visual_network(const CorrelationMatrix& marginal,
                                   const CorrelationMatrix& partial) {
    if (marginal.kind != CorrKind::Marginal || partial.kind != CorrKind::Partial) {
        throw DataError("build_visual_network expects a marginal and a partial matrix");
    }
    if (marginal.size() != partial.size()) {
        throw DataError("correlation matrices disagree on size: " +
                        std::to_string(marginal.size()) + " vs " +
                        std::to_string(partial.size()));
    }
    VisualNetwork net;
    net.vertices = marginal.channel_ids;
    const Eigen::Index n = marginal.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (marginal.values(i, j) > 0.0 && partial.values(i, j) > 0.0) {
                net.edges.push_back({static_cast<int>(i), static_cast<int>(j),
                                     partial.values(i, j)});
            }
        }
    }
    return net;
}

}  // namespace toponet::corrnet
