#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "incdyn/rng.hpp"

namespace incdyn {

/// Exact sparse-recovery instance: target = dictionary * truth coefficients,
/// dictionary columns unit-normalized.
struct PursuitProblem {
    Eigen::MatrixXd dictionary; // d x n, unit columns
    Eigen::VectorXd target;     // in R^d
    int sparsity = 0;
    Eigen::VectorXd truth_coefficients; // length n

    PursuitProblem(Eigen::MatrixXd dictionary_, Eigen::VectorXd truth_coefficients_, int sparsity_);
};

/// Gaussian dictionary with unit columns and an s-sparse coefficient vector
/// with magnitudes in [0.5, 2] and random signs.
PursuitProblem make_pursuit_problem(int dim, int atoms, int sparsity, Rng& rng);

struct SelectionRecord {
    std::vector<int> indices;           // selection order
    std::vector<double> residual_norms; // after each selection
    bool completed = true;              // false if the run ended early
    bool conditioning_warning = false;  // rank-deficient least squares hit
    std::string note;
};

/// Classic orthogonal matching pursuit for k steps (k <= d): greedy
/// max-correlation pick, least-squares refit, residual update.
SelectionRecord omp_select(const PursuitProblem& problem, int k);

struct DeepSelectOptions {
    int depth = 5;
    double init_scale = 1e-4;
    double eta = 3e-3;
    double threshold = 0.0;   // 0 -> 1e-2 * max |truth coefficient|
    long max_steps = 200000;
    int max_selections = 0;   // 0 -> run to convergence or max_steps
    double loss_tol = 1e-10;  // squared-loss convergence stop
};

/// Gradient descent on the signed power parameterization over the squared
/// loss; a feature counts as chosen when |sigma_i| first crosses the
/// threshold. Selection order is the record.
SelectionRecord deep_select(const PursuitProblem& problem, const DeepSelectOptions& opts);

struct AgreementStats {
    int sparsity = 0;
    double mean = 0.0;
    double stddev = 0.0;
    int trials = 0;
    int flagged = 0; // trials scored on a shorter prefix
};

/// Fraction |first-s(OMP) intersect first-s(deep)| / s per sparsity level.
std::vector<AgreementStats> agreement_curve(
    const std::vector<std::vector<PursuitProblem>>& problems_per_sparsity,
    const std::vector<int>& sparsities, const DeepSelectOptions& opts, unsigned threads = 0);

}  // namespace incdyn
