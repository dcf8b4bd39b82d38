#include "incdyn/matrix_sensing.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

#include "incdyn/toy_model.hpp"

namespace incdyn {

namespace {

void check_psd(const Eigen::MatrixXd& w) {
    if (w.rows() != w.cols()) throw std::invalid_argument("SensingProblem: ground truth must be square");
    double asym = (w - w.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * std::max(1.0, w.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("SensingProblem: ground truth must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w);
    if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, es.eigenvalues().maxCoeff()))
        throw std::invalid_argument("SensingProblem: ground truth must be PSD");
}

}  // namespace

SensingProblem::SensingProblem(int depth_, Eigen::MatrixXd ground_truth_, IdentityInit init)
    : dim(static_cast<int>(ground_truth_.rows())), depth(depth_),
      ground_truth(std::move(ground_truth_)), identity_init(init) {
    if (depth < 1) throw std::invalid_argument("SensingProblem: depth must be >= 1");
    if (!(init.sigma0 > 0.0)) throw std::invalid_argument("SensingProblem: sigma0 must be positive");
    check_psd(ground_truth);
}

SensingProblem::SensingProblem(int depth_, Eigen::MatrixXd ground_truth_, GaussianInit init)
    : dim(static_cast<int>(ground_truth_.rows())), depth(depth_),
      ground_truth(std::move(ground_truth_)), gaussian_init(init) {
    if (depth < 1) throw std::invalid_argument("SensingProblem: depth must be >= 1");
    if (!(init.target_top_singular > 0.0))
        throw std::invalid_argument("SensingProblem: init target must be positive");
    check_psd(ground_truth);
}

std::vector<Eigen::MatrixXd> gaussian_measurements(int dim, int count, Rng& rng) {
    std::vector<Eigen::MatrixXd> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int m = 0; m < count; ++m) {
        Eigen::MatrixXd a(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) a(i, j) = rng.normal();
        out.push_back(std::move(a));
    }
    return out;
}

SpectrumTrajectory sensing_flow_spectrum(const SensingProblem& problem, double t_end,
                                         const StepControl& ctrl, int samples) {
    if (!problem.identity_init)
        throw std::invalid_argument("sensing_flow_spectrum: requires the identity-scaled initialization");
    if (!problem.measurements.empty())
        throw std::invalid_argument("sensing_flow_spectrum: population loss only");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(problem.ground_truth);
    // eigenvalues ascending from Eigen; flip to descending
    Eigen::VectorXd lambda = es.eigenvalues().reverse();
    Eigen::MatrixXd u = es.eigenvectors().rowwise().reverse();
    for (Eigen::Index i = 0; i < lambda.size(); ++i) lambda[i] = std::max(lambda[i], 0.0);

    ToyModelSpec spec(problem.depth, problem.identity_init->sigma0, lambda);
    Trajectory traj = integrate_flow(spec, t_end, ctrl, samples);

    SpectrumTrajectory out;
    out.times = traj.times;
    out.singular_values = traj.values;
    out.alignment = Eigen::MatrixXd::Zero(traj.values.rows(), problem.dim);
    Eigen::VectorXd last = traj.values.row(traj.values.rows() - 1).transpose();
    out.final_matrix = u * last.asDiagonal() * u.transpose();
    out.final_loss =
        (out.final_matrix - problem.ground_truth).squaredNorm() / (2.0 * problem.depth);
    return out;
}

double calibrate_gaussian_factor_stddev(int dim, int depth, double target, Rng& rng) {
    if (depth == 1) {
        // Gaussian d x d with entry stddev v has expected top singular value
        // close to the bulk edge 2 sqrt(d) v.
        return target / (2.0 * std::sqrt(static_cast<double>(dim)));
    }
    const int pilots = 100;
    double mean_top = 0.0;
    for (int p = 0; p < pilots; ++p) {
        Eigen::MatrixXd prod = Eigen::MatrixXd::Identity(dim, dim);
        for (int n = 0; n < depth; ++n) {
            Eigen::MatrixXd w(dim, dim);
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) w(i, j) = rng.normal();
            prod = w * prod;
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(prod);
        mean_top += svd.singularValues()[0];
    }
    mean_top /= pilots;
    // entries scale linearly per factor; the product's top value scales as v^N
    return std::pow(target / mean_top, 1.0 / static_cast<double>(depth));
}

SpectrumTrajectory sensing_gd_run(const SensingProblem& problem, const SensingGdOptions& opts) {
    const int d = problem.dim;
    const int depth = problem.depth;
    const double inv_n = 1.0 / static_cast<double>(depth);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(problem.ground_truth);
    Eigen::VectorXd lambda = es.eigenvalues().reverse();
    Eigen::MatrixXd u_star = es.eigenvectors().rowwise().reverse();
    const double top = std::max(lambda[0], 1e-12);

    double eta = opts.eta;
    if (eta <= 0.0) eta = 0.25 * std::pow(1.0 / top, 2.0 - 2.0 * inv_n);

    // initialize factors
    std::vector<Eigen::MatrixXd> w(static_cast<std::size_t>(depth));
    if (problem.identity_init) {
        double s = std::pow(problem.identity_init->sigma0, inv_n);
        for (auto& wi : w) wi = s * Eigen::MatrixXd::Identity(d, d);
    } else {
        Rng rng = Rng::substream(opts.seed, 0xA11CE);
        double v = calibrate_gaussian_factor_stddev(d, depth, problem.gaussian_init->target_top_singular, rng);
        for (auto& wi : w) {
            wi.resize(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) wi(i, j) = rng.normal(0.0, v);
        }
    }

    const bool population = problem.measurements.empty();
    const double m_count = static_cast<double>(problem.measurements.size());

    auto product_of = [&](const std::vector<Eigen::MatrixXd>& ws) {
        Eigen::MatrixXd prod = ws[0];
        for (int n = 1; n < depth; ++n) prod = ws[static_cast<std::size_t>(n)] * prod;
        return prod; // W_N ... W_1 with w[k] = W_{k+1}
    };

    SpectrumTrajectory out;
    std::vector<Eigen::VectorXd> spectra;
    std::vector<Eigen::VectorXd> angles;
    std::vector<double> times;

    const int k_log = (opts.top_k > 0) ? std::min(opts.top_k, d) : d;
    auto log_state = [&](long iter, const Eigen::MatrixXd& prod, double loss) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(prod, Eigen::ComputeThinU);
        Eigen::VectorXd sv = svd.singularValues().head(k_log);
        Eigen::VectorXd ang(k_log);
        for (int i = 0; i < k_log; ++i) {
            double c = std::abs(u_star.col(i).dot(svd.matrixU().col(i)));
            ang[i] = std::acos(std::min(1.0, c));
        }
        times.push_back(static_cast<double>(iter));
        spectra.push_back(sv);
        angles.push_back(ang);
        out.final_loss = loss;
    };

    Eigen::MatrixXd prod = product_of(w);
    Eigen::MatrixXd grad_w(d, d);
    double loss = 0.0;

    auto compute_grad = [&](const Eigen::MatrixXd& wprod) {
        Eigen::MatrixXd delta = wprod - problem.ground_truth;
        if (population) {
            loss = delta.squaredNorm() * 0.5 * inv_n;
            grad_w = inv_n * delta;
        } else {
            loss = 0.0;
            grad_w.setZero();
            for (const auto& a : problem.measurements) {
                double r = (delta.array() * a.array()).sum();
                loss += r * r;
                grad_w += r * a;
            }
            loss *= 0.5 * inv_n / m_count;
            grad_w *= inv_n / m_count;
        }
    };

    compute_grad(prod);
    log_state(0, prod, loss);

    std::vector<Eigen::MatrixXd> left(static_cast<std::size_t>(depth)),
        right(static_cast<std::size_t>(depth));
    const double guard = 10.0 * top;

    long iter = 0;
    for (iter = 1; iter <= opts.steps; ++iter) {
        // prefix products: right[k] = W_k ... W_1 applied before layer k+1
        Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(d, d);
        for (int n = 0; n < depth; ++n) {
            right[static_cast<std::size_t>(n)] = acc;
            acc = w[static_cast<std::size_t>(n)] * acc;
        }
        acc = Eigen::MatrixXd::Identity(d, d);
        for (int n = depth - 1; n >= 0; --n) {
            left[static_cast<std::size_t>(n)] = acc;
            acc = acc * w[static_cast<std::size_t>(n)];
        }
        for (int n = 0; n < depth; ++n) {
            Eigen::MatrixXd g = left[static_cast<std::size_t>(n)].transpose() * grad_w *
                                right[static_cast<std::size_t>(n)].transpose();
            w[static_cast<std::size_t>(n)] -= eta * g;
        }
        prod = product_of(w);
        compute_grad(prod);
        if (!std::isfinite(loss) || prod.cwiseAbs().maxCoeff() > guard + 10.0)
            throw std::runtime_error("sensing_gd_run: divergence detected at iteration " +
                                     std::to_string(iter));
        if (iter % opts.log_every == 0 || iter == opts.steps) log_state(iter, prod, loss);
        if (loss < opts.loss_tol) {
            if (iter % opts.log_every != 0 && iter != opts.steps) log_state(iter, prod, loss);
            break;
        }
    }

    out.times = std::move(times);
    out.singular_values.resize(static_cast<Eigen::Index>(spectra.size()), k_log);
    out.alignment.resize(static_cast<Eigen::Index>(angles.size()), k_log);
    for (std::size_t r = 0; r < spectra.size(); ++r) {
        out.singular_values.row(static_cast<Eigen::Index>(r)) = spectra[r].transpose();
        out.alignment.row(static_cast<Eigen::Index>(r)) = angles[r].transpose();
    }
    out.final_matrix = prod;
    return out;
}

int effective_rank(const Eigen::VectorXd& spectrum, double threshold_frac) {
    if (spectrum.size() == 0) throw std::invalid_argument("effective_rank: empty spectrum");
    for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
        if (spectrum[i] < 0.0) throw std::invalid_argument("effective_rank: negative entry");
        if (i > 0 && spectrum[i] > spectrum[i - 1] + 1e-12 * std::max(1.0, spectrum[i]))
            throw std::invalid_argument("effective_rank: spectrum must be sorted descending");
    }
    double top = spectrum[0];
    if (top <= 0.0) return 0;
    int count = 0;
    for (Eigen::Index i = 0; i < spectrum.size(); ++i)
        if (spectrum[i] >= threshold_frac * top) ++count;
    return count;
}

}  // namespace incdyn
