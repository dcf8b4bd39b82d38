#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "incdyn/ode.hpp"
#include "incdyn/rng.hpp"

namespace incdyn {

/// How the factor matrices are initialized.
struct IdentityInit {
    double sigma0 = 1e-4; // every factor starts as sigma0^{1/N} I
};
struct GaussianInit {
    double target_top_singular = 1e-4; // expected top singular value of the product
};

/// Factorized recovery problem for a PSD ground truth. An empty
/// measurement set means the population loss.
struct SensingProblem {
    int dim = 0;
    int depth = 1;
    Eigen::MatrixXd ground_truth;            // W*, symmetric PSD
    std::optional<IdentityInit> identity_init;
    std::optional<GaussianInit> gaussian_init;
    std::vector<Eigen::MatrixXd> measurements;

    SensingProblem(int depth_, Eigen::MatrixXd ground_truth_, IdentityInit init);
    SensingProblem(int depth_, Eigen::MatrixXd ground_truth_, GaussianInit init);
};

/// Draws m sensing matrices with i.i.d. standard normal entries.
std::vector<Eigen::MatrixXd> gaussian_measurements(int dim, int count, Rng& rng);

/// Singular-value history of the end-to-end product, sorted descending,
/// with per-index principal angles to the ground-truth eigenvectors.
struct SpectrumTrajectory {
    std::vector<double> times;      // flow time or iteration index
    Eigen::MatrixXd singular_values; // row k = sorted spectrum at times[k]
    Eigen::MatrixXd alignment;       // row k = principal angles (radians)
    Eigen::MatrixXd final_matrix;    // product W at the last sample
    double final_loss = 0.0;
};

/// Population-loss gradient flow from the identity-scaled initialization:
/// each ground-truth eigenvalue follows the decoupled deep toy law.
SpectrumTrajectory sensing_flow_spectrum(const SensingProblem& problem, double t_end,
                                         const StepControl& ctrl = {}, int samples = 201);

struct SensingGdOptions {
    double eta = 0.0;       // 0 -> auto from the top ground-truth eigenvalue
    long steps = 20000;
    long log_every = 100;
    int top_k = 5;          // singular values to log (0 = all)
    double loss_tol = 1e-12; // early stop on the (normalized) loss
    std::uint64_t seed = 1; // Gaussian initialization draw
};

/// Full-matrix gradient descent on the factor list over the depth
/// normalized squared loss (sample mean over the measurement set when
/// present, population Frobenius form otherwise).
SpectrumTrajectory sensing_gd_run(const SensingProblem& problem, const SensingGdOptions& opts);

/// Number of spectrum entries at or above `threshold_frac` of the largest.
int effective_rank(const Eigen::VectorXd& spectrum, double threshold_frac = 0.1);

/// Per-factor entry standard deviation such that the expected top singular
/// value of the depth-N product hits `target`. Closed form at depth 1,
/// Monte-Carlo pilot (100 draws) otherwise.
double calibrate_gaussian_factor_stddev(int dim, int depth, double target, Rng& rng);

}  // namespace incdyn
