#pragma once

#include "incdyn/incremental.hpp"
#include "incdyn/toy_model.hpp"

namespace incdyn {

/// Discrete-time configuration. The learning rate is usually set through
/// the dimensionless factor c via eta = c * (1/sigma*_1)^{2-2/N}, with
/// sigma*_1 the largest optimal value.
struct GDConfig {
    ToyModelSpec spec;
    double learning_rate = 0.0;
    double c = 0.0;
    long max_steps = 100000;

    GDConfig(ToyModelSpec spec_, double learning_rate_, long max_steps_);
    /// Builds the config from the dimensionless rate factor.
    static GDConfig from_rate_factor(ToyModelSpec spec, double c, long max_steps);
};

/// Largest learning rate for which depth >= 2 iterates never overshoot
/// their optima: (1/sigma*_1)^{2-2/N}.
double max_no_overshoot_rate(const ToyModelSpec& spec);

/// One step of the induced-value recurrence
///   sigma <- sigma (1 + (eta/N) sigma^{1-2/N} (sigma* - sigma))^N.
Eigen::VectorXd gd_step(const GDConfig& config, const Eigen::VectorXd& sigma);

/// Iterates gd_step, logging every `log_every` iterations (always includes
/// iteration 0 and the final one). Aborts with an error if any coordinate
/// exceeds 10 * sigma*_1 (divergence guard).
Trajectory gd_run(const GDConfig& config, long steps, long log_every = 1);

/// The exponents of the depth-2 discrete threshold bounds, with the four
/// log arguments kept for diagnostics.
struct GDThresholdExponents {
    double a = 0.0;
    double b = 0.0;
    double a_num_arg = 0.0, a_den_arg = 0.0, b_num_arg = 0.0, b_den_arg = 0.0;
};

/// Admissible range bound on c: 2(sqrt(2) - 1).
double gd_rate_factor_limit();

/// Depth-2 discrete-time threshold bounds. sigma*_i = ratio * sigma*_j must
/// not exceed sigma*_1.
ThresholdBounds gd_threshold_bounds(const IncrementalQuery& query, double sigma_star_small,
                                    double sigma_star_max, double c,
                                    GDThresholdExponents* exponents = nullptr);

struct EmpiricalGdThresholdOptions {
    double rel_width = 1e-3;
    long max_steps = 50'000'000;
};

/// Bisects the initialization for the discrete depth-2 dynamics; the
/// witness is measured on iteration counts. Candidates violating
/// sigma*_j >= 2 sigma_0 are rejected.
EmpiricalThresholdResult empirical_gd_threshold(const ThresholdProblem& problem, double c,
                                                double lo, double hi,
                                                const EmpiricalGdThresholdOptions& opts = {});

/// Discrete witness property at one initialization (exposed for tests).
bool gd_incremental_at_sigma0(const ThresholdProblem& problem, double c, double sigma0,
                              const EmpiricalGdThresholdOptions& opts = {});

/// First-iterate approximation of the ratio dynamics at small rate factor
/// and small initialization, plus the relative step factor r^{(N-1)/N}.
struct FirstStepApprox {
    double ri1 = 0.0;        // approximate r_i after one step
    double rj1 = 0.0;        // approximate r_j after one step
    double step_factor = 0.0; // r^{(N-1)/N}
};

FirstStepApprox first_step_depth_ratio(int depth, double ratio, double c, double r_large,
                                       double r_init);

}  // namespace incdyn
