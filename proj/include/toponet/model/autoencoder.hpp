#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace toponet::model {

struct AutoencoderConfig {
    double learning_rate = 1e-2;
    double momentum = 0.9;
    int max_epochs = 2000;
    // Stop when the best loss has not improved by early_stop_delta within the
    // last early_stop_window epochs.
    double early_stop_delta = 1e-8;
    int early_stop_window = 50;
    std::uint64_t seed = 0;
};

// Single hidden layer: input -> tanh latent (4 units) -> linear output.
class Autoencoder {
public:
    static constexpr int kLatentDim = 4;

    Autoencoder(int input_dim, std::uint64_t seed);

    // n x 4 latent codes; throws DataError on a column-count mismatch.
    Eigen::MatrixXd encode(const Eigen::MatrixXd& x) const;
    Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& x) const;

    // Mean squared reconstruction error, averaged over all matrix entries.
    double mse(const Eigen::MatrixXd& x) const;

    // Flattened parameter vector (enc_w row-major, enc_b, dec_w row-major,
    // dec_b) for optimizer and finite-difference use.
    Eigen::VectorXd parameters() const;
    void set_parameters(const Eigen::VectorXd& theta);
    Eigen::VectorXd mse_gradient(const Eigen::MatrixXd& x) const;

    int input_dim() const { return static_cast<int>(enc_w_.cols()); }
    int parameter_count() const;

private:
    Eigen::MatrixXd enc_w_;  // 4 x d
    Eigen::VectorXd enc_b_;  // 4
    Eigen::MatrixXd dec_w_;  // d x 4
    Eigen::VectorXd dec_b_;  // d
};

struct TrainingCurve {
    std::vector<double> loss;  // per epoch, before the update
};

// Full-batch gradient descent with momentum on the MSE loss. Throws
// NumericalError (suggesting a smaller learning rate) if the loss leaves the
// finite range.
Autoencoder train_autoencoder(const Eigen::MatrixXd& x, const AutoencoderConfig& config,
                              TrainingCurve* curve = nullptr);

// Max relative discrepancy between the analytic gradient and central finite
// differences, over all parameters.
double gradient_check(const Autoencoder& model, const Eigen::MatrixXd& x, double step);

}  // namespace toponet::model
