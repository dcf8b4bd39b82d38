#include "incdyn/incremental.hpp"

#include <cmath>
#include <stdexcept>

#include "incdyn/quadrature.hpp"

namespace incdyn {

IncrementalQuery::IncrementalQuery(double s_, double f_, int index_large_, int index_small_,
                                   double ratio_)
    : s(s_), f(f_), index_large(index_large_), index_small(index_small_), ratio(ratio_) {
    if (!(s > 0.0 && s < 0.25)) throw std::invalid_argument("IncrementalQuery: s must lie in (0, 1/4)");
    if (!(f > 0.75 && f < 1.0)) throw std::invalid_argument("IncrementalQuery: f must lie in (3/4, 1)");
    if (index_large == index_small)
        throw std::invalid_argument("IncrementalQuery: indices must differ");
    if (!(ratio > 1.0)) throw std::invalid_argument("IncrementalQuery: ratio must exceed 1");
}

std::string to_string(ThresholdRegime r) {
    switch (r) {
        case ThresholdRegime::kFlowN2: return "flow-N2";
        case ThresholdRegime::kFlowDeep: return "flow-N>=3";
        case ThresholdRegime::kGdN2: return "gd-N2";
    }
    return "?";
}

ThresholdBounds::ThresholdBounds(double lower_, double upper_, ThresholdRegime regime_)
    : lower(lower_), upper(upper_), regime(regime_) {
    if (!(lower > 0.0) || !(upper > 0.0) || lower > upper)
        throw std::invalid_argument("ThresholdBounds: requires 0 < lower <= upper");
}

AlphaTime alpha_time(const ToyModelSpec& spec, int i, double alpha, double rel_tol) {
    if (i < 0 || i >= spec.dim()) throw std::out_of_range("alpha_time: index");
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha_time: alpha must be positive");
    if (alpha >= 1.0)
        throw std::invalid_argument("alpha_time: alpha must be < 1 (the integral diverges)");
    const double s0 = spec.init_scale;
    const double ss = spec.optimal[i];
    const double target = alpha * ss;
    if (target <= s0) return {0.0, true};

    // Integrate in u = log(sigma); the integrand is smooth there and the
    // double-exponential nodes resolve the steep left end when sigma_0 is
    // tiny.
    const double p = spec.damping_exponent();
    auto f = [&](double u) {
        double sig = std::exp(u);
        return std::exp((1.0 - p) * u) / (ss - sig);
    };
    double t = tanh_sinh(f, std::log(s0), std::log(target), rel_tol > 0 ? rel_tol * 1e-2 : 1e-10);
    return {t, false};
}

IncrementalWitness is_incremental(const std::vector<double>& times_i,
                                  const Eigen::VectorXd& sigma_i, double sigma_star_i,
                                  const std::vector<double>& times_j,
                                  const Eigen::VectorXd& sigma_j, double sigma_star_j,
                                  const IncrementalQuery& query) {
    if (times_i.size() != times_j.size() ||
        !std::equal(times_i.begin(), times_i.end(), times_j.begin()))
        throw std::invalid_argument("is_incremental: mismatched time grids");
    if (sigma_i.size() != static_cast<Eigen::Index>(times_i.size()) ||
        sigma_j.size() != static_cast<Eigen::Index>(times_j.size()))
        throw std::invalid_argument("is_incremental: series length mismatch");
    if (!(sigma_star_i > sigma_star_j))
        throw std::invalid_argument("is_incremental: requires sigma*_i > sigma*_j");

    const double small_cap = query.s * sigma_star_j;
    const double large_floor = query.f * sigma_star_i;
    for (std::size_t k = 0; k < times_i.size(); ++k) {
        if (sigma_j[static_cast<Eigen::Index>(k)] <= small_cap &&
            sigma_i[static_cast<Eigen::Index>(k)] >= large_floor)
            return {true, times_i[k]};
    }
    return {false, 0.0};
}

IncrementalWitness is_incremental(const Trajectory& traj, const IncrementalQuery& query) {
    const int i = query.index_large, j = query.index_small;
    if (i < 0 || j < 0 || i >= traj.spec.dim() || j >= traj.spec.dim())
        throw std::out_of_range("is_incremental: coordinate index");
    return is_incremental(traj.times, traj.values.col(i), traj.spec.optimal[i], traj.times,
                          traj.values.col(j), traj.spec.optimal[j], query);
}

ThresholdBounds flow_threshold_bounds(const IncrementalQuery& query, double sigma_star_small,
                                      int depth) {
    if (depth == 1) throw std::invalid_argument("flow_threshold_bounds: no threshold exists at depth 1");
    if (depth < 2) throw std::invalid_argument("flow_threshold_bounds: depth must be a finite integer >= 2");
    if (!(sigma_star_small > 0.0))
        throw std::invalid_argument("flow_threshold_bounds: sigma*_j must be positive");
    const double s = query.s, f = query.f, r = query.ratio;
    const double scale = s * sigma_star_small;
    if (depth == 2) {
        double base = s / (r * f); // < 1
        double lower = scale * std::pow(base, 1.0 / ((1.0 - f) * (r - 1.0)));
        double upper = scale * std::pow(base, (1.0 - s) / (r - 1.0));
        return ThresholdBounds(lower, upper, ThresholdRegime::kFlowN2);
    }
    double exponent = static_cast<double>(depth) / (depth - 2.0);
    double lo_base = (1.0 - f) * (r - 1.0) / (1.0 + (1.0 - f) * (r - 1.0));
    double hi_base = (r - 1.0) / (r - s);
    return ThresholdBounds(scale * std::pow(lo_base, exponent), scale * std::pow(hi_base, exponent),
                           ThresholdRegime::kFlowDeep);
}

ThresholdProblem::ThresholdProblem(int depth_, double sigma_star_small_, IncrementalQuery query_)
    : depth(depth_), sigma_star_small(sigma_star_small_), query(std::move(query_)) {
    if (!(sigma_star_small > 0.0))
        throw std::invalid_argument("ThresholdProblem: sigma*_j must be positive");
    if (query.index_large != 0 || query.index_small != 1)
        throw std::invalid_argument("ThresholdProblem: query must address coordinates (0, 1)");
}

ToyModelSpec ThresholdProblem::make_spec(double sigma0) const {
    Eigen::VectorXd opt(2);
    opt << query.ratio * sigma_star_small, sigma_star_small;
    return ToyModelSpec(depth, sigma0, opt);
}

bool incremental_at_sigma0(const ThresholdProblem& problem, double sigma0,
                           const EmpiricalThresholdOptions& opts) {
    if (!(sigma0 > 0.0)) throw std::invalid_argument("incremental_at_sigma0: sigma0 must be positive");
    const double small_target = problem.query.s * problem.sigma_star_small;
    if (sigma0 >= small_target) return false; // coordinate j starts past the window
    ToyModelSpec spec = problem.make_spec(sigma0);
    // Horizon: a grid slightly past the time at which coordinate j leaves the
    // window; after that no witness can exist.
    AlphaTime ts = alpha_time(spec, 1, problem.query.s);
    double horizon = ts.time * 1.15;
    StepControl ctrl;
    ctrl.rtol = opts.rtol;
    ctrl.atol = opts.rtol * sigma0;
    Trajectory traj = integrate_flow(spec, horizon, ctrl, opts.grid_samples);
    return is_incremental(traj, problem.query).incremental;
}

EmpiricalThresholdResult empirical_threshold(const ThresholdProblem& problem, double lo, double hi,
                                             const EmpiricalThresholdOptions& opts) {
    if (!(lo > 0.0 && hi > lo))
        throw std::invalid_argument("empirical_threshold: need 0 < lo < hi");
    bool lo_ok = incremental_at_sigma0(problem, lo, opts);
    bool hi_ok = incremental_at_sigma0(problem, hi, opts);
    if (!lo_ok || hi_ok)
        throw std::runtime_error(
            "empirical_threshold: non-bracketing endpoints (need incremental at lo, "
            "non-incremental at hi); lo=" + std::to_string(lo) + " gives " +
            (lo_ok ? "true" : "false") + ", hi=" + std::to_string(hi) + " gives " +
            (hi_ok ? "true" : "false"));

    EmpiricalThresholdResult result;
    if (opts.scan_points > 0) {
        // log-spaced interior scan; the property must flip exactly once
        int flips = 0;
        bool prev = true;
        double llo = std::log(lo), lhi = std::log(hi);
        for (int k = 0; k < opts.scan_points; ++k) {
            double x = std::exp(llo + (lhi - llo) * (k + 1.0) / (opts.scan_points + 1.0));
            bool inc = incremental_at_sigma0(problem, x, opts);
            result.scan_sigma0.push_back(x);
            result.scan_incremental.push_back(inc);
            if (inc != prev) ++flips;
            prev = inc;
        }
        if (!prev) {
            // final value false; flip count to the hi endpoint already counted
        } else {
            ++flips; // still true at the last scan point; flips at hi
        }
        result.monotone_scan_ok = (flips == 1);
    }

    // bisection in log space (thresholds span orders of magnitude)
    double llo = std::log(lo), lhi = std::log(hi);
    while (std::exp(lhi) - std::exp(llo) > opts.rel_width * std::exp(llo)) {
        double mid = 0.5 * (llo + lhi);
        if (incremental_at_sigma0(problem, std::exp(mid), opts))
            llo = mid;
        else
            lhi = mid;
    }
    result.value = std::exp(0.5 * (llo + lhi));
    return result;
}

}  // namespace incdyn
