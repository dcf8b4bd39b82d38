#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "incdyn/rng.hpp"

namespace incdyn {

enum class ClassifierLoss { kExponential, kLogistic };
enum class StepSchedule { kFixed, kLossScaled };

/// Separable binary dataset: Gaussian inputs labeled by the sign of a
/// ground-truth linear predictor (sparse in space or in frequency).
struct ClassificationDataset {
    Eigen::MatrixXd examples; // m x d
    Eigen::VectorXd labels;   // +-1
    Eigen::VectorXd truth;    // the labeling predictor
    std::vector<int> support; // nonzero coordinates (spatial case)
    std::vector<int> frequency_support; // nonzero DFT bins (convolutional case)
};

/// Gaussian examples labeled by a `sparsity`-sparse vector; resampled until
/// the normalized minimum margin exceeds `min_margin`.
ClassificationDataset make_sparse_dataset(int dim, int count, int sparsity, Rng& rng,
                                          double min_margin = 1e-3);

/// Gaussian examples labeled by a predictor with `pairs` conjugate pairs of
/// nonzero frequencies (2*pairs nonzero DFT bins).
ClassificationDataset make_frequency_sparse_dataset(int dim, int count, int pairs, Rng& rng,
                                                    double min_margin = 1e-3);

/// Signed power parameterization sigma_i = w+_i^N - w-_i^N with the
/// symmetric start w+(0) = w-(0) = sigma0^{1/N}, so sigma(0) = 0 exactly.
struct DiagonalNetSpec {
    int depth = 1;
    int dim = 0;
    double init_scale = 1e-3;

    DiagonalNetSpec(int depth_, int dim_, double init_scale_);
};

struct ClassifierRunOptions {
    double eta = 0.0; // 0 -> auto
    long max_steps = 100000;
    long log_every = 200;
    int top_k = 5;
    double loss_stop = 1e-8;
    StepSchedule schedule = StepSchedule::kFixed;
    long pilot_window = 25; // monotone-loss check length
    bool track_full = false; // also keep the full predictor history
};

struct ClassifierRunResult {
    std::vector<double> iterations;
    Eigen::MatrixXd top_values;     // |sigma| (or amplitude) of the tracked indices
    std::vector<int> tracked;       // which coordinates/frequencies are tracked
    Eigen::VectorXd predictor;      // final induced linear predictor sigma
    Eigen::MatrixXd full_history;   // per-log-point sigma (only when track_full)
    double truth_correlation = 0.0; // <sigma, truth> / (|sigma| |truth|)
    double margin_correlation = 0.0; // against the hard-margin direction
    double final_loss = 0.0;
    long steps_run = 0;
};

/// Gradient descent on (w+, w-) for the diagonal model; tracks the largest
/// final |sigma| coordinates.
ClassifierRunResult diag_gd_run(const DiagonalNetSpec& spec, const ClassificationDataset& data,
                                ClassifierLoss loss, const ClassifierRunOptions& opts);

/// Circular-convolution network: depth-1..N-1 kernels plus a dense head.
struct ConvNetSpec {
    int depth = 1; // total layers including the dense head
    int dim = 0;
    std::vector<Eigen::VectorXd> kernels; // N-1 kernels, each length d
    Eigen::VectorXd head;                 // w_N

    ConvNetSpec(int depth_, int dim_);
    static ConvNetSpec random(int depth_, int dim_, double scale, Rng& rng);
};

/// (x (*) w)[i] = sum_k w[k] x[(i+k) mod d].
Eigen::VectorXd circular_correlate(const Eigen::VectorXd& x, const Eigen::VectorXd& w);

double conv_forward(const ConvNetSpec& spec, const Eigen::VectorXd& x);

/// DFT coefficients of the induced predictor:
/// sigma_hat = diag(w1_hat) ... diag(w_{N-1}_hat) wN_hat.
Eigen::VectorXcd induced_frequency_profile(const ConvNetSpec& spec);

/// Spatial predictor recovered from the frequency profile (inverse DFT).
Eigen::VectorXd induced_predictor(const ConvNetSpec& spec);

/// Unnormalized DFT / inverse DFT (direct O(d^2); desk scale).
Eigen::VectorXcd dft(const Eigen::VectorXd& x);
Eigen::VectorXd idft_real(const Eigen::VectorXcd& xh);

ClassifierRunResult conv_gd_run(ConvNetSpec spec, const ClassificationDataset& data,
                                ClassifierLoss loss, const ClassifierRunOptions& opts);

/// Hard-margin separator via dual coordinate ascent, feasibility-certified.
struct MaxMarginResult {
    Eigen::VectorXd direction; // unit normal
    double margin = 0.0;       // geometric margin of the returned direction
    long sweeps = 0;
    bool certified = false;
};

MaxMarginResult max_margin_solve(const Eigen::MatrixXd& examples, const Eigen::VectorXd& labels,
                                 long max_sweeps = 20000, double kkt_tol = 1e-9);

}  // namespace incdyn
