#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace incdyn {

/// Tolerances and limits for the adaptive integrator.
struct StepControl {
    double rtol = 1e-9;
    double atol = 0.0;         // 0 -> derived from rtol and the initial state
    double initial_step = 0.0; // 0 -> auto
    long max_steps = 50'000'000;
};

/// Thrown when the adaptive step size underflows; carries the failing time.
struct StepUnderflowError : std::runtime_error {
    double time;
    explicit StepUnderflowError(double t)
        : std::runtime_error("ODE step size underflow at t = " + std::to_string(t)),
          time(t) {}
};

using OdeRhs = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Solution samples of an autonomous ODE at caller-requested times.
struct OdeSamples {
    std::vector<double> times;
    Eigen::MatrixXd states; // row k = y(times[k])
};

/// Dormand-Prince 5(4) with PI step control. Integrates an autonomous
/// system from times.front() (must equal 0 with y0 as the state there is
/// not required; the first sample is taken at times.front()) through
/// times.back(), landing exactly on every requested sample time.
/// `post_step`, when set, is applied to the state after each accepted step
/// (used to clamp coordinates that are non-negative by construction).
OdeSamples integrate_rk45(const OdeRhs& rhs, const Eigen::VectorXd& y0,
                          const std::vector<double>& sample_times,
                          const StepControl& ctrl,
                          const std::function<void(Eigen::VectorXd&)>& post_step = nullptr);

}  // namespace incdyn
