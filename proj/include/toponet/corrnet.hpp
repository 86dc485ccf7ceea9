#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "toponet/ingest.hpp"

namespace toponet::corrnet {

enum class CorrKind { Marginal, Partial };

struct CorrelationMatrix {
    CorrKind kind = CorrKind::Marginal;
    Eigen::MatrixXd values;  // symmetric, unit diagonal
    std::vector<std::string> channel_ids;

    Eigen::Index size() const { return values.rows(); }
};

// Weighted undirected graph whose edges pass the both-positive rule.
struct VisualNetwork {
    struct Edge {
        int i = 0;
        int j = 0;  // i < j
        double weight = 0.0;
    };
    std::vector<std::string> vertices;
    std::vector<Edge> edges;
};

// Unbiased sample covariance (divisor M-1).
Eigen::MatrixXd sample_covariance(const ingest::TimeSeriesMatrix& series);

// Pearson correlation at zero lag.
CorrelationMatrix marginal_correlation(const ingest::TimeSeriesMatrix& series);

// SVD pseudo-inverse; singular values below rel_tol * sigma_max are dropped.
Eigen::MatrixXd moore_penrose_pinv(const Eigen::MatrixXd& matrix, double rel_tol);

// Partial correlation from the (pseudo-inverted) precision matrix:
// rho_ij = -omega_ij / sqrt(omega_ii * omega_jj), diagonal reported as 1.
CorrelationMatrix partial_correlation(const ingest::TimeSeriesMatrix& series,
                                      double rel_tol = 1e-10);

// Independent route: correlation of residuals after regressing each channel of
// a pair on all remaining channels (with intercept). Solved by its own
// normal-equations Cholesky so it shares nothing with the SVD path. Throws
// OracleInapplicableError when the covariance is rank deficient.
CorrelationMatrix partial_correlation_regression_oracle(const ingest::TimeSeriesMatrix& series);

// Edge (i,j) kept iff marginal > 0 AND partial > 0; the retained weight is the
// partial correlation. Isolated vertices stay in the vertex set.
VisualNetwork build_visual_network(const CorrelationMatrix& marginal,
                                   const CorrelationMatrix& partial);

}  // namespace toponet::corrnet
