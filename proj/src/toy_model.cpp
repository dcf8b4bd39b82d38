#include "incdyn/toy_model.hpp"

#include <cmath>
#include <stdexcept>

namespace incdyn {

ToyModelSpec::ToyModelSpec(int depth_, double init_scale_, Eigen::VectorXd optimal_)
    : depth(depth_), init_scale(init_scale_), optimal(std::move(optimal_)) {
    if (depth < 0) throw std::invalid_argument("ToyModelSpec: depth must be >= 1 or the infinite sentinel (0)");
    if (!(init_scale > 0.0) || !std::isfinite(init_scale))
        throw std::invalid_argument("ToyModelSpec: init_scale must be positive and finite");
    if (optimal.size() == 0) throw std::invalid_argument("ToyModelSpec: empty optimal vector");
    for (Eigen::Index i = 0; i < optimal.size(); ++i)
        if (!(optimal[i] >= 0.0) || !std::isfinite(optimal[i]))
            throw std::invalid_argument("ToyModelSpec: optimal values must be finite and >= 0");
}

double ToyModelSpec::damping_exponent() const {
    if (infinite_depth()) return 2.0;
    return 2.0 - 2.0 / static_cast<double>(depth);
}

std::string to_string(TrajectoryMethod m) {
    switch (m) {
        case TrajectoryMethod::kClosedForm: return "closed-form";
        case TrajectoryMethod::kOde: return "ode";
        case TrajectoryMethod::kGd: return "gd";
    }
    return "?";
}

double infinite_depth_time_of_sigma(double sigma, double sigma0, double sigma_star) {
    // t = (1/s*^2) log( sigma (sigma0 - s*) / (sigma0 (sigma - s*)) )
    //     - (1/s*) (1/sigma - 1/sigma0)
    const double ss = sigma_star;
    double log_arg = sigma * (sigma0 - ss) / (sigma0 * (sigma - ss));
    return std::log(log_arg) / (ss * ss) - (1.0 / sigma - 1.0 / sigma0) / ss;
}

double closed_form_sigma(const ToyModelSpec& spec, int i, double t) {
    if (i < 0 || i >= spec.dim()) throw std::out_of_range("closed_form_sigma: index");
    if (!std::isfinite(t) || t < 0.0)
        throw std::invalid_argument("closed_form_sigma: time must be finite and >= 0");
    const double s0 = spec.init_scale;
    const double ss = spec.optimal[i];
    if (!(ss > 0.0)) throw std::invalid_argument("closed_form_sigma: requires sigma*_i > 0");

    if (spec.depth == 1) {
        return ss + (s0 - ss) * std::exp(-t);
    }
    if (spec.depth == 2) {
        // sigma0 sigma* e^{s* t} / (sigma0 (e^{s* t} - 1) + sigma*), written
        // with e^{-s* t} so large t cannot overflow.
        double em = std::exp(-ss * t);
        return s0 * ss / (s0 * (1.0 - em) + ss * em);
    }
    if (spec.infinite_depth()) {
        if (t == 0.0) return s0;
        if (s0 == ss) return s0;
        if (s0 > ss) throw std::invalid_argument("closed_form_sigma: infinite-depth inversion assumes sigma0 < sigma*");
        // invert the implicit relation by bisection in log sigma
        double lo = std::log(s0), hi = std::log(ss * (1.0 - 1e-16));
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            double tm = infinite_depth_time_of_sigma(std::exp(mid), s0, ss);
            if (tm < t)
                lo = mid;
            else
                hi = mid;
        }
        return std::exp(0.5 * (lo + hi));
    }
    throw std::invalid_argument(
        "closed_form_sigma: no explicit solution for depth " + std::to_string(spec.depth) +
        "; use integrate_flow");
}

Eigen::VectorXd flow_rhs(const ToyModelSpec& spec, const Eigen::VectorXd& sigma) {
    if (sigma.size() != spec.optimal.size())
        throw std::invalid_argument("flow_rhs: dimension mismatch");
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
        if (sigma[i] < 0.0)
            throw std::invalid_argument("flow_rhs: negative sigma (fractional power undefined)");
    const double p = spec.damping_exponent();
    Eigen::VectorXd out(sigma.size());
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        double damp = (p == 0.0) ? 1.0 : std::pow(sigma[i], p);
        out[i] = damp * (spec.optimal[i] - sigma[i]);
    }
    return out;
}

Trajectory integrate_flow_at(const ToyModelSpec& spec, const std::vector<double>& sample_times,
                             const StepControl& ctrl) {
    if (sample_times.empty() || sample_times.front() != 0.0)
        throw std::invalid_argument("integrate_flow: sample times must start at 0");
    Trajectory traj;
    traj.spec = spec;
    traj.method = TrajectoryMethod::kOde;
    Eigen::VectorXd y0 = Eigen::VectorXd::Constant(spec.dim(), spec.init_scale);
    if (sample_times.size() == 1) {
        traj.times = sample_times;
        traj.values.resize(1, spec.dim());
        traj.values.row(0) = y0.transpose();
        return traj;
    }
    const double p = spec.damping_exponent();
    const Eigen::VectorXd& opt = spec.optimal;
    auto rhs = [p, &opt](const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            double s = std::max(y[i], 0.0);
            double damp = (p == 0.0) ? 1.0 : std::pow(s, p);
            dy[i] = damp * (opt[i] - s);
        }
    };
    auto clamp = [](Eigen::VectorXd& y) {
        for (Eigen::Index i = 0; i < y.size(); ++i)
            if (y[i] < 0.0) y[i] = 0.0;
    };
    OdeSamples sol = integrate_rk45(rhs, y0, sample_times, ctrl, clamp);
    traj.times = std::move(sol.times);
    traj.values = std::move(sol.states);
    return traj;
}

Trajectory integrate_flow(const ToyModelSpec& spec, double t_end, const StepControl& ctrl,
                          int samples) {
    if (t_end <= 0.0) return integrate_flow_at(spec, {0.0}, ctrl);
    if (samples < 2) samples = 2;
    std::vector<double> ts(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k)
        ts[static_cast<std::size_t>(k)] = t_end * static_cast<double>(k) / (samples - 1);
    return integrate_flow_at(spec, ts, ctrl);
}

}  // namespace incdyn
