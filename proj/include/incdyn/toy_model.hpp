#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "incdyn/ode.hpp"

namespace incdyn {

/// Depth value encoding the infinite-depth law (sigma^2 damping).
inline constexpr int kInfiniteDepth = 0;

/// Deep toy model: d non-negative weights, each parameterized as the Nth
/// power of a scalar and initialized so that every induced value starts at
/// init_scale.
struct ToyModelSpec {
    int depth = 1;               // N >= 1, or kInfiniteDepth
    double init_scale = 0.0;     // sigma_0 > 0
    Eigen::VectorXd optimal;     // sigma^*, componentwise >= 0

    ToyModelSpec() = default;
    ToyModelSpec(int depth_, double init_scale_, Eigen::VectorXd optimal_);

    int dim() const { return static_cast<int>(optimal.size()); }
    bool infinite_depth() const { return depth == kInfiniteDepth; }

    /// Exponent of the damping factor in the flow law, 2 - 2/N.
    double damping_exponent() const;
};

enum class TrajectoryMethod { kClosedForm, kOde, kGd };

std::string to_string(TrajectoryMethod m);

/// Time-stamped evolution of the induced values. For gradient-descent runs
/// `times` holds iteration indices and `pseudo_times` the learning-rate
/// rescaled clock used when comparing against the flow.
struct Trajectory {
    std::vector<double> times;
    Eigen::MatrixXd values; // row k = sigma(times[k])
    ToyModelSpec spec;
    TrajectoryMethod method = TrajectoryMethod::kOde;
    std::vector<double> pseudo_times; // empty unless method == kGd

    Eigen::Index samples() const { return values.rows(); }
    /// Column view of one coordinate's history.
    Eigen::VectorXd coordinate(int i) const { return values.col(i); }
};

/// Theorem-style closed forms. Supported depths: 1, 2 and the infinite
/// sentinel (solved by inverting the implicit time relation). Depths
/// 3 <= N < infinity have no tractable explicit solution; use
/// integrate_flow for those.
double closed_form_sigma(const ToyModelSpec& spec, int i, double t);

/// Time as a function of the value under the infinite-depth law; the
/// implicit relation that closed_form_sigma inverts.
double infinite_depth_time_of_sigma(double sigma, double sigma0, double sigma_star);

/// Right-hand side of the gradient flow: sigma_i^{2-2/N} (sigma*_i - sigma_i),
/// with sigma_i^2 (sigma*_i - sigma_i) at the infinite-depth sentinel.
Eigen::VectorXd flow_rhs(const ToyModelSpec& spec, const Eigen::VectorXd& sigma);

/// Integrates the flow from the spec's initialization to t_end, sampling a
/// uniform grid of `samples` points (t_end <= 0 yields the single-point
/// trajectory at the initialization). Coordinates with sigma*_i = 0 decay
/// and are clamped at zero after each step.
Trajectory integrate_flow(const ToyModelSpec& spec, double t_end, const StepControl& ctrl,
                          int samples = 201);

/// As above but with explicit sample times (strictly increasing, first
/// element 0).
Trajectory integrate_flow_at(const ToyModelSpec& spec, const std::vector<double>& sample_times,
                             const StepControl& ctrl);

}  // namespace incdyn
