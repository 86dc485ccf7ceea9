#include "toponet/model/pca.hpp"

#include "toponet/errors.hpp"

namespace toponet::model {

PCAModel fit_pca(const Eigen::MatrixXd& x) {
    if (x.rows() < 2) throw DataError("PCA needs at least 2 rows");

    PCAModel model;
    model.mean = x.colwise().mean();
    Eigen::MatrixXd centered = x;
    centered.rowwise() -= model.mean.transpose();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeFullV);
    model.components = svd.matrixV().transpose();

    const Eigen::Index d = x.cols();
    model.explained_variance_ratio = Eigen::VectorXd::Zero(d);
    const Eigen::VectorXd& sigma = svd.singularValues();
    const double total = sigma.array().square().sum();
    if (total > 0.0) {
        for (Eigen::Index k = 0; k < sigma.size(); ++k) {
            model.explained_variance_ratio(k) = sigma(k) * sigma(k) / total;
        }
    }
    return model;
}

Eigen::MatrixXd transform_pca(const PCAModel& model, const Eigen::MatrixXd& x, int k) {
    if (k < 1 || k > model.components.rows()) {
        throw ConfigError("PCA component count out of range: " + std::to_string(k));
    }
    if (x.cols() != model.components.cols()) {
        throw DataError("PCA transform expects " + std::to_string(model.components.cols()) +
                        " columns, got " + std::to_string(x.cols()));
    }
    Eigen::MatrixXd centered = x;
    centered.rowwise() -= model.mean.transpose();
    return centered * model.components.topRows(k).transpose();
}

int components_for_variance(const PCAModel& model, double threshold) {
    if (threshold <= 0.0 || threshold > 1.0) {
        throw ConfigError("variance threshold must be in (0, 1]");
    }
    double cumulative = 0.0;
    const Eigen::Index d = model.explained_variance_ratio.size();
    for (Eigen::Index k = 0; k < d; ++k) {
        cumulative += model.explained_variance_ratio(k);
        if (cumulative >= threshold - 1e-12) return static_cast<int>(k) + 1;
    }
    return static_cast<int>(d);
}

Eigen::MatrixXd transform_pca_variance(const PCAModel& model, const Eigen::MatrixXd& x,
                                       double threshold) {
    return transform_pca(model, x, components_for_variance(model, threshold));
}

}  // namespace toponet::model
