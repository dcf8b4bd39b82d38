#include "incdyn/gd.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace incdyn {

GDConfig::GDConfig(ToyModelSpec spec_, double learning_rate_, long max_steps_)
    : spec(std::move(spec_)), learning_rate(learning_rate_), max_steps(max_steps_) {
    if (spec.infinite_depth())
        throw std::invalid_argument("GDConfig: discrete dynamics require a finite depth");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("GDConfig: learning rate must be positive");
    if (max_steps < 1) throw std::invalid_argument("GDConfig: max_steps must be >= 1");
    double top = spec.optimal.maxCoeff();
    if (top > 0.0) c = learning_rate * std::pow(top, spec.damping_exponent());
}

GDConfig GDConfig::from_rate_factor(ToyModelSpec spec, double c, long max_steps) {
    if (!(c > 0.0)) throw std::invalid_argument("GDConfig: rate factor must be positive");
    double top = spec.optimal.maxCoeff();
    if (!(top > 0.0)) throw std::invalid_argument("GDConfig: sigma* must have a positive entry");
    double eta = c * std::pow(1.0 / top, spec.damping_exponent());
    return GDConfig(std::move(spec), eta, max_steps);
}

double max_no_overshoot_rate(const ToyModelSpec& spec) {
    if (spec.infinite_depth() || spec.depth < 2)
        throw std::invalid_argument("max_no_overshoot_rate: lemma covers finite depth >= 2");
    double top = spec.optimal.maxCoeff();
    if (!(top > 0.0)) throw std::invalid_argument("max_no_overshoot_rate: sigma* must have a positive entry");
    return std::pow(1.0 / top, spec.damping_exponent());
}

Eigen::VectorXd gd_step(const GDConfig& config, const Eigen::VectorXd& sigma) {
    const ToyModelSpec& spec = config.spec;
    if (sigma.size() != spec.optimal.size()) throw std::invalid_argument("gd_step: dimension mismatch");
    const int n = spec.depth;
    const double inner_exp = 1.0 - 2.0 / static_cast<double>(n);
    Eigen::VectorXd out(sigma.size());
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        double s = sigma[i];
        if (s < 0.0) throw std::invalid_argument("gd_step: negative sigma");
        double damp;
        if (inner_exp == 0.0)
            damp = 1.0;
        else if (s == 0.0)
            damp = (inner_exp > 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
        else
            damp = std::pow(s, inner_exp);
        double base = 1.0 + (config.learning_rate / n) * damp * (spec.optimal[i] - s);
        if (base < 0.0)
            throw std::runtime_error("gd_step: learning rate too large, update base went negative");
        out[i] = s * std::pow(base, n);
    }
    return out;
}

Trajectory gd_run(const GDConfig& config, long steps, long log_every) {
    if (steps < 0) throw std::invalid_argument("gd_run: steps must be >= 0");
    if (log_every < 1) log_every = 1;
    const ToyModelSpec& spec = config.spec;
    const double guard = 10.0 * spec.optimal.maxCoeff();

    std::vector<double> times;
    std::vector<Eigen::VectorXd> rows;
    Eigen::VectorXd sigma = Eigen::VectorXd::Constant(spec.dim(), spec.init_scale);
    times.push_back(0.0);
    rows.push_back(sigma);
    for (long k = 1; k <= steps; ++k) {
        sigma = gd_step(config, sigma);
        if (guard > 0.0 && sigma.maxCoeff() > guard)
            throw std::runtime_error("gd_run: divergence detected at iteration " + std::to_string(k) +
                                     " (value exceeded 10 * sigma*_1)");
        if (k % log_every == 0 || k == steps) {
            times.push_back(static_cast<double>(k));
            rows.push_back(sigma);
        }
    }
    Trajectory traj;
    traj.spec = spec;
    traj.method = TrajectoryMethod::kGd;
    traj.times = std::move(times);
    traj.values.resize(static_cast<Eigen::Index>(rows.size()), spec.dim());
    for (std::size_t r = 0; r < rows.size(); ++r)
        traj.values.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
    traj.pseudo_times.reserve(traj.times.size());
    for (double it : traj.times) traj.pseudo_times.push_back(it * config.learning_rate);
    return traj;
}

double gd_rate_factor_limit() { return 2.0 * (std::sqrt(2.0) - 1.0); }

ThresholdBounds gd_threshold_bounds(const IncrementalQuery& query, double sigma_star_small,
                                    double sigma_star_max, double c,
                                    GDThresholdExponents* exponents) {
    if (!(sigma_star_small > 0.0) || !(sigma_star_max > 0.0))
        throw std::invalid_argument("gd_threshold_bounds: sigma* values must be positive");
    const double r = query.ratio;
    const double sigma_star_large = r * sigma_star_small;
    if (sigma_star_large > sigma_star_max * (1.0 + 1e-12))
        throw std::invalid_argument("gd_threshold_bounds: sigma*_i exceeds the stated maximum sigma*_1");
    if (!(c > 0.0) || c >= gd_rate_factor_limit())
        throw std::invalid_argument("gd_threshold_bounds: rate factor must lie in (0, 2(sqrt(2)-1))");

    const double ri = sigma_star_large / sigma_star_max;
    const double rj = sigma_star_small / sigma_star_max;
    GDThresholdExponents ex;
    ex.a_num_arg = 1.0 - c * ri + c * c * ri * ri;
    ex.a_den_arg = 1.0 - c * rj - 0.25 * c * c * rj * rj;
    ex.b_num_arg = 1.0 - c * ri - 0.25 * c * c * ri * ri;
    ex.b_den_arg = 1.0 - c * rj + c * c * rj * rj;
    for (double arg : {ex.a_num_arg, ex.a_den_arg, ex.b_num_arg, ex.b_den_arg})
        if (!(arg > 0.0))
            throw std::invalid_argument("gd_threshold_bounds: log argument not positive (rate factor too large)");
    ex.a = std::log(ex.a_num_arg) / std::log(ex.a_den_arg);
    ex.b = std::log(ex.b_num_arg) / std::log(ex.b_den_arg);
    if (!(ex.a > 1.0) || !(ex.b > 1.0))
        throw std::domain_error("gd_threshold_bounds: exponents fell below 1; the bound form does not apply");

    const double s = query.s, f = query.f;
    const double s_frac = s / (1.0 - s);
    double lower = 0.5 * s_frac * sigma_star_small *
                   std::pow((1.0 - f) / (2.0 * r * f) * s_frac, 1.0 / (ex.a - 1.0));
    double upper = s_frac * sigma_star_small * std::pow((1.0 - f) / f * s_frac, 1.0 / (ex.b - 1.0));
    if (exponents) *exponents = ex;
    ThresholdBounds bounds(lower, upper, ThresholdRegime::kGdN2);
    return bounds;
}

bool gd_incremental_at_sigma0(const ThresholdProblem& problem, double c, double sigma0,
                              const EmpiricalGdThresholdOptions& opts) {
    if (problem.depth != 2)
        throw std::invalid_argument("gd_incremental_at_sigma0: discrete threshold theory covers depth 2 only");
    if (!(sigma0 > 0.0)) throw std::invalid_argument("gd_incremental_at_sigma0: sigma0 must be positive");
    if (problem.sigma_star_small < 2.0 * sigma0)
        throw std::invalid_argument(
            "gd_incremental_at_sigma0: precondition sigma*_j >= 2 sigma_0 violated at candidate " +
            std::to_string(sigma0));
    ToyModelSpec spec = problem.make_spec(sigma0);
    GDConfig config = GDConfig::from_rate_factor(spec, c, opts.max_steps);
    const double small_cap = problem.query.s * problem.sigma_star_small;
    const double large_floor = problem.query.f * spec.optimal[0];
    if (sigma0 > small_cap) return false;
    Eigen::VectorXd sigma = Eigen::VectorXd::Constant(2, sigma0);
    for (long k = 0; k <= opts.max_steps; ++k) {
        if (sigma[1] > small_cap) return false; // j left the window, monotone from here
        if (sigma[0] >= large_floor) return true;
        sigma = gd_step(config, sigma);
    }
    throw std::runtime_error("gd_incremental_at_sigma0: undecided within max_steps");
}

EmpiricalThresholdResult empirical_gd_threshold(const ThresholdProblem& problem, double c,
                                                double lo, double hi,
                                                const EmpiricalGdThresholdOptions& opts) {
    if (!(lo > 0.0 && hi > lo))
        throw std::invalid_argument("empirical_gd_threshold: need 0 < lo < hi");
    bool lo_ok = gd_incremental_at_sigma0(problem, c, lo, opts);
    bool hi_ok = gd_incremental_at_sigma0(problem, c, hi, opts);
    if (!lo_ok || hi_ok)
        throw std::runtime_error("empirical_gd_threshold: non-bracketing endpoints");
    EmpiricalThresholdResult result;
    double llo = std::log(lo), lhi = std::log(hi);
    while (std::exp(lhi) - std::exp(llo) > opts.rel_width * std::exp(llo)) {
        double mid = 0.5 * (llo + lhi);
        if (gd_incremental_at_sigma0(problem, c, std::exp(mid), opts))
            llo = mid;
        else
            lhi = mid;
    }
    result.value = std::exp(0.5 * (llo + lhi));
    return result;
}

FirstStepApprox first_step_depth_ratio(int depth, double ratio, double c, double r_large,
                                       double r_init) {
    if (depth < 1) throw std::invalid_argument("first_step_depth_ratio: depth must be >= 1");
    if (!(ratio > 1.0)) throw std::invalid_argument("first_step_depth_ratio: ratio must exceed 1");
    if (!(c > 0.0) || !(r_init > 0.0) || !(r_large > 0.0))
        throw std::invalid_argument("first_step_depth_ratio: c, R_i, r_init must be positive");
    const double n = static_cast<double>(depth);
    const double p = 2.0 - 2.0 / n;
    double increment = c * std::pow(r_large, p) * std::pow(r_init, p);
    FirstStepApprox out;
    out.step_factor = std::pow(ratio, (n - 1.0) / n);
    out.ri1 = r_init + increment;
    out.rj1 = ratio * r_init + increment / out.step_factor;
    return out;
}

}  // namespace incdyn
