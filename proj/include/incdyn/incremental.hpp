#pragma once

#include <optional>
#include <string>
#include <vector>

#include "incdyn/toy_model.hpp"

namespace incdyn {

/// Window parameters of the two-value incremental-learning criterion:
/// coordinate j still below s*sigma*_j while coordinate i already above
/// f*sigma*_i.
struct IncrementalQuery {
    double s = 0.1;   // in (0, 1/4)
    double f = 0.9;   // in (3/4, 1)
    int index_large = 0;
    int index_small = 1;
    double ratio = 0.0; // sigma*_i / sigma*_j > 1

    IncrementalQuery(double s_, double f_, int index_large_, int index_small_, double ratio_);
};

enum class ThresholdRegime { kFlowN2, kFlowDeep, kGdN2 };

std::string to_string(ThresholdRegime r);

/// Analytic lower/upper bounds on the critical initialization scale, plus
/// the empirically bisected value when available.
struct ThresholdBounds {
    double lower = 0.0;
    double upper = 0.0;
    std::optional<double> empirical;
    ThresholdRegime regime = ThresholdRegime::kFlowN2;

    ThresholdBounds(double lower_, double upper_, ThresholdRegime regime_);
};

/// Time for coordinate i to reach alpha * sigma*_i.
struct AlphaTime {
    double time = 0.0;
    bool degenerate = false; // alpha*sigma* <= sigma_0: already past the target
};

/// Quadrature of the separable flow integral from sigma_0 to alpha*sigma*_i.
AlphaTime alpha_time(const ToyModelSpec& spec, int i, double alpha, double rel_tol = 1e-10);

/// Earliest sampled time at which both window conditions hold.
struct IncrementalWitness {
    bool incremental = false;
    double witness_time = 0.0;
};

/// Grid-witness detector on a single trajectory's coordinate pair.
IncrementalWitness is_incremental(const Trajectory& traj, const IncrementalQuery& query);

/// Two-series variant; the time grids must match exactly.
IncrementalWitness is_incremental(const std::vector<double>& times_i,
                                  const Eigen::VectorXd& sigma_i, double sigma_star_i,
                                  const std::vector<double>& times_j,
                                  const Eigen::VectorXd& sigma_j, double sigma_star_j,
                                  const IncrementalQuery& query);

/// Analytic flow bounds on the threshold initialization (depth >= 2).
ThresholdBounds flow_threshold_bounds(const IncrementalQuery& query, double sigma_star_small,
                                      int depth);

/// Two-coordinate threshold problem: sigma* = (r * sigma_star_small, sigma_star_small).
struct ThresholdProblem {
    int depth = 2;
    double sigma_star_small = 1.0;
    IncrementalQuery query;

    ThresholdProblem(int depth_, double sigma_star_small_, IncrementalQuery query_);
    ToyModelSpec make_spec(double sigma0) const;
};

struct EmpiricalThresholdOptions {
    double rel_width = 1e-3;   // bisection stop rule on (hi-lo)/lo
    int grid_samples = 1500;   // trajectory samples per candidate
    double rtol = 1e-8;
    int scan_points = 8;       // monotonicity diagnostic scan; 0 disables
};

struct EmpiricalThresholdResult {
    double value = 0.0;
    bool monotone_scan_ok = true;
    std::vector<double> scan_sigma0;   // diagnostic scan grid (log-spaced)
    std::vector<bool> scan_incremental;
};

/// Bisects the initialization scale between a bracket where the property
/// holds at `lo` and fails at `hi`. The property is evaluated with the
/// grid-witness detector on an integrated trajectory whose horizon comes
/// from the alpha-time quadrature.
EmpiricalThresholdResult empirical_threshold(const ThresholdProblem& problem, double lo, double hi,
                                             const EmpiricalThresholdOptions& opts = {});

/// Property evaluation used by the bisection (exposed for tests).
bool incremental_at_sigma0(const ThresholdProblem& problem, double sigma0,
                           const EmpiricalThresholdOptions& opts = {});

}  // namespace incdyn
