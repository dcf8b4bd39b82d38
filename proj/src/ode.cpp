#include "incdyn/ode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace incdyn {

namespace {

// Dormand-Prince RK5(4)7M coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// embedded 4th order minus 5th order weights (error estimator)
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

OdeSamples integrate_rk45(const OdeRhs& rhs, const Eigen::VectorXd& y0,
                          const std::vector<double>& sample_times,
                          const StepControl& ctrl,
                          const std::function<void(Eigen::VectorXd&)>& post_step) {
    if (sample_times.empty()) throw std::invalid_argument("integrate_rk45: no sample times");
    for (std::size_t k = 1; k < sample_times.size(); ++k)
        if (!(sample_times[k] > sample_times[k - 1]))
            throw std::invalid_argument("integrate_rk45: sample times must be strictly increasing");
    if (!(ctrl.rtol > 0)) throw std::invalid_argument("integrate_rk45: rtol must be positive");

    const Eigen::Index n = y0.size();
    OdeSamples out;
    out.times = sample_times;
    out.states.resize(static_cast<Eigen::Index>(sample_times.size()), n);

    double atol = ctrl.atol;
    if (atol <= 0.0) {
        double scale = y0.cwiseAbs().maxCoeff();
        atol = ctrl.rtol * std::max(scale, 1e-30) * 1e-3;
    }

    double t = sample_times.front();
    Eigen::VectorXd y = y0;
    out.states.row(0) = y.transpose();

    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
    Eigen::VectorXd ytmp(n), ynew(n), yerr(n);

    rhs(y, k1);

    double h = ctrl.initial_step;
    if (h <= 0.0) {
        double d0 = y.cwiseAbs().maxCoeff() + atol;
        double d1 = k1.cwiseAbs().maxCoeff() + 1e-30;
        h = std::min(1e-2 * d0 / d1, sample_times.back() - t);
        h = std::max(h, 1e-12);
    }

    long steps = 0;
    const double t_end = sample_times.back();
    std::size_t next_sample = 1;
    double err_prev = 1.0;

    while (next_sample < sample_times.size()) {
        if (++steps > ctrl.max_steps)
            throw std::runtime_error("integrate_rk45: max step count exceeded");
        bool hit_sample = false;
        double t_target = sample_times[next_sample];
        if (t + h >= t_target) {
            h = t_target - t;
            hit_sample = true;
        }
        if (h < 1e-14 * std::max(1.0, std::abs(t)) && !hit_sample)
            throw StepUnderflowError(t);

        // FSAL: k1 holds f(y)
        ytmp = y + h * (a21 * k1);
        rhs(ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        rhs(ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(ytmp, k6);
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(ynew, k7);
        yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double err = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double sc = atol + ctrl.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            double e = yerr[i] / sc;
            err += e * e;
        }
        err = std::sqrt(err / static_cast<double>(n));

        if (err <= 1.0) {
            t += h;
            y = ynew;
            if (post_step) post_step(y);
            rhs(y, k1); // refresh FSAL slope (post_step may have clamped)
            if (hit_sample) {
                out.states.row(static_cast<Eigen::Index>(next_sample)) = y.transpose();
                ++next_sample;
            }
            // PI controller (Gustafsson)
            double fac = 0.9 * std::pow(err + 1e-30, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
            fac = std::clamp(fac, 0.2, 5.0);
            h = std::min(h * fac, t_end - t + 1e-30);
            err_prev = std::max(err, 1e-4);
        } else {
            double fac = std::max(0.2, 0.9 * std::pow(err, -1.0 / 5.0));
            h *= fac;
            if (h < 1e-15 * std::max(1.0, std::abs(t))) throw StepUnderflowError(t);
        }
        if (h <= 0.0) h = 1e-14;
    }
    return out;
}

}  // namespace incdyn
