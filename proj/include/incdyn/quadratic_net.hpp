#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "incdyn/matrix_sensing.hpp"
#include "incdyn/ode.hpp"
#include "incdyn/rng.hpp"

namespace incdyn {

enum class LossKind { kVariance, kSquared, kSquaredWithBias };

/// x -> x^T W^T W x (+ optional global bias), trained against a ground
/// truth of the same form. The initialization is a scaled random
/// orthogonal matrix, so W(0)^T W(0) = sigma0 I exactly.
struct QuadraticNetSpec {
    int dim = 0;
    double sigma0 = 1e-4;
    Eigen::MatrixXd ground_truth;  // W*
    double bias_truth = 0.0;       // b*
    bool has_bias = false;

    QuadraticNetSpec(double sigma0_, Eigen::MatrixXd ground_truth_, bool has_bias_ = false,
                     double bias_truth_ = 0.0);

    /// W(0) = sqrt(sigma0) Q for a random orthogonal Q.
    Eigen::MatrixXd initial_weights(Rng& rng) const;
};

/// Gaussian inputs labeled by the ground-truth network.
struct QuadraticDataset {
    std::vector<Eigen::VectorXd> inputs;
    Eigen::VectorXd labels;
};

QuadraticDataset make_quadratic_dataset(const QuadraticNetSpec& spec, int count, Rng& rng);

/// Population variance loss: (1/8) || W*^T W* - W^T W ||_F^2.
double variance_loss(const Eigen::MatrixXd& w, const Eigen::MatrixXd& w_star);

/// Sample variance loss over provided inputs: (1/16) * unbiased variance of
/// the prediction error.
double variance_loss(const Eigen::MatrixXd& w, const Eigen::MatrixXd& w_star,
                     const std::vector<Eigen::VectorXd>& inputs);

/// Variance-loss flow: the Gram spectrum follows the depth-2 toy law.
SpectrumTrajectory variance_flow_spectrum(const QuadraticNetSpec& spec, double t_end,
                                          const StepControl& ctrl = {}, int samples = 201);

/// Full-matrix variance-loss flow dW/dt = (1/2) W (W*^T W* - W^T W);
/// independent route used to cross-check the decoupled spectrum.
SpectrumTrajectory variance_flow_matrix(const QuadraticNetSpec& spec, double t_end, Rng& rng,
                                        const StepControl& ctrl = {}, int samples = 201);

/// Coupled squared-loss flow right-hand side on the Gram spectrum; with a
/// bias the last component of the return is db/dt.
Eigen::VectorXd squared_flow_rhs(const Eigen::VectorXd& sigma, const Eigen::VectorXd& sigma_star);
Eigen::VectorXd squared_flow_rhs(const Eigen::VectorXd& sigma, const Eigen::VectorXd& sigma_star,
                                 double bias, double bias_star);

/// Optimal bias for the squared loss given the current spectrum.
double optimal_bias(const Eigen::VectorXd& sigma, const Eigen::VectorXd& sigma_star,
                    double bias_star);

struct QuadraticGdOptions {
    double eta = 0.0;   // 0 -> auto
    long steps = 40000;
    long log_every = 100;
    int top_k = 5;
    double loss_tol = 1e-12;
    std::uint64_t seed = 1;
};

/// Full-parameter gradient descent; logs the top singular values of
/// W^T W. With kSquaredWithBias the bias starts at its optimum for the
/// initial spectrum.
SpectrumTrajectory quadratic_gd_run(const QuadraticNetSpec& spec, LossKind loss,
                                    const QuadraticDataset& dataset,
                                    const QuadraticGdOptions& opts);

}  // namespace incdyn
