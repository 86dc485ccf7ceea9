#include "toponet/model/features.hpp"

#include <cmath>

namespace toponet::model {

Eigen::MatrixXd FeatureScaler::apply(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd out = x;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        if (constant[static_cast<std::size_t>(c)]) continue;
        out.col(c) = (x.col(c).array() - mean(c)) / sigma(c);
    }
    return out;
}

std::pair<Eigen::MatrixXd, FeatureScaler> standardize_features(const Eigen::MatrixXd& x) {
    FeatureScaler scaler;
    const Eigen::Index d = x.cols();
    scaler.mean.resize(d);
    scaler.sigma.resize(d);
    scaler.constant.assign(static_cast<std::size_t>(d), false);
    for (Eigen::Index c = 0; c < d; ++c) {
        scaler.mean(c) = x.col(c).mean();
        const double var = (x.col(c).array() - scaler.mean(c)).square().mean();
        if (var == 0.0) {
            scaler.constant[static_cast<std::size_t>(c)] = true;
            scaler.sigma(c) = 1.0;
        } else {
            scaler.sigma(c) = std::sqrt(var);
        }
    }
    return {scaler.apply(x), scaler};
}

}  // namespace toponet::model
