#include "toponet/model/autoencoder.hpp"

#include <cmath>
#include <limits>

#include "toponet/errors.hpp"
#include "toponet/rng.hpp"

namespace toponet::model {

Autoencoder::Autoencoder(int input_dim, std::uint64_t seed) {
    if (input_dim < 1) throw ConfigError("autoencoder input dimension must be >= 1");
    enc_w_.resize(kLatentDim, input_dim);
    enc_b_.resize(kLatentDim);
    dec_w_.resize(input_dim, kLatentDim);
    dec_b_.resize(input_dim);

    Rng rng(seed);
    auto fill = [&rng](auto& block) {
        for (Eigen::Index r = 0; r < block.rows(); ++r)
            for (Eigen::Index c = 0; c < block.cols(); ++c)
                block(r, c) = rng.next_uniform(-0.1, 0.1);
    };
    fill(enc_w_);
    fill(enc_b_);
    fill(dec_w_);
    fill(dec_b_);
}

Eigen::MatrixXd Autoencoder::encode(const Eigen::MatrixXd& x) const {
    if (x.cols() != enc_w_.cols()) {
        throw DataError("autoencoder expects " + std::to_string(enc_w_.cols()) +
                        " columns, got " + std::to_string(x.cols()));
    }
    Eigen::MatrixXd z = x * enc_w_.transpose();
    z.rowwise() += enc_b_.transpose();
    return z.array().tanh();
}

Eigen::MatrixXd Autoencoder::reconstruct(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd y = encode(x) * dec_w_.transpose();
    y.rowwise() += dec_b_.transpose();
    return y;
}

double Autoencoder::mse(const Eigen::MatrixXd& x) const {
    const Eigen::MatrixXd residual = reconstruct(x) - x;
    return residual.squaredNorm() / static_cast<double>(x.rows() * x.cols());
}

int Autoencoder::parameter_count() const {
    return static_cast<int>(enc_w_.size() + enc_b_.size() + dec_w_.size() + dec_b_.size());
}

Eigen::VectorXd Autoencoder::parameters() const {
    Eigen::VectorXd theta(parameter_count());
    Eigen::Index at = 0;
    auto push = [&](const auto& block) {
        for (Eigen::Index r = 0; r < block.rows(); ++r)
            for (Eigen::Index c = 0; c < block.cols(); ++c) theta(at++) = block(r, c);
    };
    push(enc_w_);
    push(enc_b_);
    push(dec_w_);
    push(dec_b_);
    return theta;
}

void Autoencoder::set_parameters(const Eigen::VectorXd& theta) {
    if (theta.size() != parameter_count()) {
        throw DataError("parameter vector has wrong length");
    }
    Eigen::Index at = 0;
    auto pull = [&](auto& block) {
        for (Eigen::Index r = 0; r < block.rows(); ++r)
            for (Eigen::Index c = 0; c < block.cols(); ++c) block(r, c) = theta(at++);
    };
    pull(enc_w_);
    pull(enc_b_);
    pull(dec_w_);
    pull(dec_b_);
}

Eigen::VectorXd Autoencoder::mse_gradient(const Eigen::MatrixXd& x) const {
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();

    Eigen::MatrixXd z = x * enc_w_.transpose();
    z.rowwise() += enc_b_.transpose();
    const Eigen::MatrixXd h = z.array().tanh();
    Eigen::MatrixXd y = h * dec_w_.transpose();
    y.rowwise() += dec_b_.transpose();

    // L = ||y - x||_F^2 / (n d)
    const Eigen::MatrixXd dy = 2.0 * (y - x) / static_cast<double>(n * d);
    const Eigen::MatrixXd d_dec_w = dy.transpose() * h;
    const Eigen::VectorXd d_dec_b = dy.colwise().sum();
    const Eigen::MatrixXd dh = dy * dec_w_;
    const Eigen::MatrixXd dz = dh.array() * (1.0 - h.array().square());
    const Eigen::MatrixXd d_enc_w = dz.transpose() * x;
    const Eigen::VectorXd d_enc_b = dz.colwise().sum();

    Eigen::VectorXd grad(parameter_count());
    Eigen::Index at = 0;
    auto push = [&](const auto& block) {
        for (Eigen::Index r = 0; r < block.rows(); ++r)
            for (Eigen::Index c = 0; c < block.cols(); ++c) grad(at++) = block(r, c);
    };
    push(d_enc_w);
    push(d_enc_b);
    push(d_dec_w);
    push(d_dec_b);
    return grad;
}

Autoencoder train_autoencoder(const Eigen::MatrixXd& x, const AutoencoderConfig& config,
                              TrainingCurve* curve) {
    if (x.rows() < 2) throw DataError("autoencoder training needs at least 2 rows");

    Autoencoder model(static_cast<int>(x.cols()), config.seed);
    Eigen::VectorXd theta = model.parameters();
    Eigen::VectorXd velocity = Eigen::VectorXd::Zero(theta.size());

    Eigen::VectorXd best_theta = theta;
    double best = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        const double loss = model.mse(x);
        if (!std::isfinite(loss)) {
            throw NumericalError("autoencoder loss diverged; try a smaller learning rate");
        }
        if (curve) curve->loss.push_back(loss);
        if (loss < best - config.early_stop_delta) best_epoch = epoch;
        if (loss < best) {
            best = loss;
            best_theta = theta;
        }
        if (epoch - best_epoch >= config.early_stop_window) break;

        const Eigen::VectorXd grad = model.mse_gradient(x);
        velocity = config.momentum * velocity - config.learning_rate * grad;
        theta += velocity;
        model.set_parameters(theta);
    }
    // Keep the best parameters seen; the trailing curve entry is their loss.
    model.set_parameters(best_theta);
    if (curve) curve->loss.push_back(model.mse(x));
    return model;
}

double gradient_check(const Autoencoder& model, const Eigen::MatrixXd& x, double step) {
    if (step < 1e-7 || step > 1e-3) throw ConfigError("gradient check step outside [1e-7, 1e-3]");

    Autoencoder probe = model;
    const Eigen::VectorXd theta = model.parameters();
    const Eigen::VectorXd analytic = model.mse_gradient(x);

    double worst = 0.0;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
        Eigen::VectorXd plus = theta;
        Eigen::VectorXd minus = theta;
        plus(k) += step;
        minus(k) -= step;
        probe.set_parameters(plus);
        const double up = probe.mse(x);
        probe.set_parameters(minus);
        const double down = probe.mse(x);
        const double numeric = (up - down) / (2.0 * step);
        const double scale = std::max(std::abs(analytic(k)) + std::abs(numeric), 1e-8);
        worst = std::max(worst, std::abs(analytic(k) - numeric) / scale);
    }
    return worst;
}

}  // namespace toponet::model
