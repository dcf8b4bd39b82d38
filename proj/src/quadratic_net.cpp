#include "incdyn/quadratic_net.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>
#include <stdexcept>

#include "incdyn/toy_model.hpp"

namespace incdyn {

QuadraticNetSpec::QuadraticNetSpec(double sigma0_, Eigen::MatrixXd ground_truth_, bool has_bias_,
                                   double bias_truth_)
    : dim(static_cast<int>(ground_truth_.rows())), sigma0(sigma0_),
      ground_truth(std::move(ground_truth_)), bias_truth(bias_truth_), has_bias(has_bias_) {
    if (ground_truth.rows() != ground_truth.cols())
        throw std::invalid_argument("QuadraticNetSpec: W* must be square");
    if (!(sigma0 > 0.0)) throw std::invalid_argument("QuadraticNetSpec: sigma0 must be positive");
}

Eigen::MatrixXd QuadraticNetSpec::initial_weights(Rng& rng) const {
    Eigen::MatrixXd g(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    // fix the sign convention so the draw is Haar distributed
    Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < dim; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return std::sqrt(sigma0) * q;
}

QuadraticDataset make_quadratic_dataset(const QuadraticNetSpec& spec, int count, Rng& rng) {
    QuadraticDataset data;
    data.inputs.reserve(static_cast<std::size_t>(count));
    data.labels.resize(count);
    Eigen::MatrixXd gram_star = spec.ground_truth.transpose() * spec.ground_truth;
    for (int k = 0; k < count; ++k) {
        Eigen::VectorXd x(spec.dim);
        for (int i = 0; i < spec.dim; ++i) x[i] = rng.normal();
        data.labels[k] = x.dot(gram_star * x) + spec.bias_truth;
        data.inputs.push_back(std::move(x));
    }
    return data;
}

double variance_loss(const Eigen::MatrixXd& w, const Eigen::MatrixXd& w_star) {
    if (w.rows() != w_star.rows() || w.cols() != w_star.cols())
        throw std::invalid_argument("variance_loss: dimension mismatch");
    Eigen::MatrixXd delta = w_star.transpose() * w_star - w.transpose() * w;
    return delta.squaredNorm() / 8.0;
}

double variance_loss(const Eigen::MatrixXd& w, const Eigen::MatrixXd& w_star,
                     const std::vector<Eigen::VectorXd>& inputs) {
    if (w.rows() != w_star.rows() || w.cols() != w_star.cols())
        throw std::invalid_argument("variance_loss: dimension mismatch");
    if (inputs.size() < 2) throw std::invalid_argument("variance_loss: need at least 2 samples");
    Eigen::MatrixXd gram = w.transpose() * w;
    Eigen::MatrixXd gram_star = w_star.transpose() * w_star;
    const double m = static_cast<double>(inputs.size());
    double mean = 0.0, mean_sq = 0.0;
    for (const auto& x : inputs) {
        double err = x.dot(gram_star * x) - x.dot(gram * x);
        mean += err;
        mean_sq += err * err;
    }
    mean /= m;
    double var = (mean_sq - m * mean * mean) / (m - 1.0);
    return var / 16.0;
}

SpectrumTrajectory variance_flow_spectrum(const QuadraticNetSpec& spec, double t_end,
                                          const StepControl& ctrl, int samples) {
    Eigen::MatrixXd gram_star = spec.ground_truth.transpose() * spec.ground_truth;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_star);
    Eigen::VectorXd lambda = es.eigenvalues().reverse();
    Eigen::MatrixXd u = es.eigenvectors().rowwise().reverse();
    for (Eigen::Index i = 0; i < lambda.size(); ++i) lambda[i] = std::max(lambda[i], 0.0);

    ToyModelSpec toy(2, spec.sigma0, lambda);
    Trajectory traj = integrate_flow(toy, t_end, ctrl, samples);

    SpectrumTrajectory out;
    out.times = traj.times;
    out.singular_values = traj.values;
    out.alignment = Eigen::MatrixXd::Zero(traj.values.rows(), spec.dim);
    Eigen::VectorXd last = traj.values.row(traj.values.rows() - 1).transpose();
    out.final_matrix = u * last.asDiagonal() * u.transpose();
    out.final_loss = (out.final_matrix - gram_star).squaredNorm() / 8.0;
    return out;
}

SpectrumTrajectory variance_flow_matrix(const QuadraticNetSpec& spec, double t_end, Rng& rng,
                                        const StepControl& ctrl, int samples) {
    const int d = spec.dim;
    Eigen::MatrixXd gram_star = spec.ground_truth.transpose() * spec.ground_truth;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es0(gram_star);
    Eigen::MatrixXd u_star = es0.eigenvectors().rowwise().reverse();

    Eigen::MatrixXd w0 = spec.initial_weights(rng);
    Eigen::VectorXd y0 = Eigen::Map<const Eigen::VectorXd>(w0.data(), d * d);

    auto rhs = [&](const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        Eigen::Map<const Eigen::MatrixXd> w(y.data(), d, d);
        Eigen::MatrixXd delta = gram_star - w.transpose() * w;
        Eigen::MatrixXd dw = 0.5 * w * delta;
        dy = Eigen::Map<const Eigen::VectorXd>(dw.data(), d * d);
    };

    if (samples < 2) samples = 2;
    std::vector<double> ts(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) ts[static_cast<std::size_t>(k)] = t_end * k / (samples - 1.0);
    OdeSamples sol = integrate_rk45(rhs, y0, ts, ctrl);

    SpectrumTrajectory out;
    out.times = sol.times;
    out.singular_values.resize(sol.states.rows(), d);
    out.alignment.resize(sol.states.rows(), d);
    for (Eigen::Index r = 0; r < sol.states.rows(); ++r) {
        Eigen::VectorXd y = sol.states.row(r).transpose();
        Eigen::Map<const Eigen::MatrixXd> w(y.data(), d, d);
        Eigen::MatrixXd gram = w.transpose() * w;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        out.singular_values.row(r) = es.eigenvalues().reverse().transpose();
        for (int i = 0; i < d; ++i) {
            double c = std::abs(u_star.col(i).dot(es.eigenvectors().col(d - 1 - i)));
            out.alignment(r, i) = std::acos(std::min(1.0, c));
        }
        if (r == sol.states.rows() - 1) {
            out.final_matrix = gram;
            out.final_loss = (gram - gram_star).squaredNorm() / 8.0;
        }
    }
    return out;
}

Eigen::VectorXd squared_flow_rhs(const Eigen::VectorXd& sigma, const Eigen::VectorXd& sigma_star) {
    if (sigma.size() != sigma_star.size())
        throw std::invalid_argument("squared_flow_rhs: dimension mismatch");
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
        if (sigma[i] < 0.0) throw std::invalid_argument("squared_flow_rhs: negative sigma");
    double total = (sigma_star - sigma).sum();
    Eigen::VectorXd out(sigma.size());
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
        out[i] = sigma[i] * (sigma_star[i] - sigma[i] + 0.5 * total);
    return out;
}

Eigen::VectorXd squared_flow_rhs(const Eigen::VectorXd& sigma, const Eigen::VectorXd& sigma_star,
                                 double bias, double bias_star) {
    if (sigma.size() != sigma_star.size())
        throw std::invalid_argument("squared_flow_rhs: dimension mismatch");
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
        if (sigma[i] < 0.0) throw std::invalid_argument("squared_flow_rhs: negative sigma");
    double total = (sigma_star - sigma).sum();
    double gap = bias_star - bias;
    Eigen::VectorXd out(sigma.size() + 1);
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
        out[i] = sigma[i] * (sigma_star[i] - sigma[i] + 0.5 * total + 0.5 * gap);
    out[sigma.size()] = total + gap;
    return out;
}

double optimal_bias(const Eigen::VectorXd& sigma, const Eigen::VectorXd& sigma_star,
                    double bias_star) {
    return (sigma_star - sigma).sum() + bias_star;
}

SpectrumTrajectory quadratic_gd_run(const QuadraticNetSpec& spec, LossKind loss,
                                    const QuadraticDataset& dataset,
                                    const QuadraticGdOptions& opts) {
    const int d = spec.dim;
    const auto& xs = dataset.inputs;
    const double m = static_cast<double>(xs.size());
    if (xs.empty()) throw std::invalid_argument("quadratic_gd_run: empty dataset");
    if (loss == LossKind::kSquaredWithBias && !spec.has_bias)
        throw std::invalid_argument("quadratic_gd_run: spec has no bias parameter");

    Eigen::MatrixXd gram_star = spec.ground_truth.transpose() * spec.ground_truth;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es0(gram_star);
    Eigen::VectorXd lambda = es0.eigenvalues().reverse();
    Eigen::MatrixXd u_star = es0.eigenvectors().rowwise().reverse();
    const double top = std::max(lambda[0], 1e-12);

    double eta = opts.eta;
    if (eta <= 0.0) eta = 0.3 / top;

    Rng rng = Rng::substream(opts.seed, 0x9uLL);
    Eigen::MatrixXd w = spec.initial_weights(rng);
    double bias = 0.0;
    if (loss == LossKind::kSquaredWithBias)
        bias = optimal_bias(Eigen::VectorXd::Constant(d, spec.sigma0), lambda, spec.bias_truth);

    const int k_log = (opts.top_k > 0) ? std::min(opts.top_k, d) : d;
    SpectrumTrajectory out;
    std::vector<double> times;
    std::vector<Eigen::VectorXd> spectra, angles;

    auto log_state = [&](long iter, double current_loss) {
        Eigen::MatrixXd gram = w.transpose() * w;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        Eigen::VectorXd sv = es.eigenvalues().reverse().head(k_log);
        Eigen::VectorXd ang(k_log);
        for (int i = 0; i < k_log; ++i) {
            double c = std::abs(u_star.col(i).dot(es.eigenvectors().col(d - 1 - i)));
            ang[i] = std::acos(std::min(1.0, c));
        }
        times.push_back(static_cast<double>(iter));
        spectra.push_back(sv);
        angles.push_back(ang);
        out.final_loss = current_loss;
        out.final_matrix = gram;
    };

    Eigen::VectorXd err(xs.size());
    Eigen::MatrixXd weighted(d, d);
    const double guard = 10.0 * top;

    auto eval = [&](double& loss_out, Eigen::MatrixXd& grad_w, double& grad_b) {
        Eigen::MatrixXd gram = w.transpose() * w;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            double pred = xs[k].dot(gram * xs[k]);
            if (loss == LossKind::kSquaredWithBias) pred += bias;
            err[static_cast<Eigen::Index>(k)] = dataset.labels[static_cast<Eigen::Index>(k)] - pred;
        }
        if (loss == LossKind::kVariance) {
            double mean = err.mean();
            double var = (err.array() - mean).square().sum() / (m - 1.0);
            loss_out = var / 16.0;
            weighted.setZero();
            for (std::size_t k = 0; k < xs.size(); ++k) {
                double c = err[static_cast<Eigen::Index>(k)] - mean;
                weighted.noalias() += c * (xs[k] * xs[k].transpose());
            }
            grad_w = -(0.25 / (m - 1.0)) * (w * weighted);
            grad_b = 0.0;
        } else {
            loss_out = err.squaredNorm() / (16.0 * m);
            weighted.setZero();
            for (std::size_t k = 0; k < xs.size(); ++k)
                weighted.noalias() += err[static_cast<Eigen::Index>(k)] * (xs[k] * xs[k].transpose());
            grad_w = -(0.25 / m) * (w * weighted);
            grad_b = (loss == LossKind::kSquaredWithBias) ? -err.sum() / (8.0 * m) : 0.0;
        }
    };

    double current_loss = 0.0, grad_b = 0.0;
    Eigen::MatrixXd grad_w(d, d);
    eval(current_loss, grad_w, grad_b);
    log_state(0, current_loss);

    // Under the 1/16 loss scaling the raw bias gradient is (1/8) of the
    // coupled-flow normalization db/dt = sum(sigma* - sigma) + (b* - b) that
    // the Gram spectrum obeys; the factor 8 keeps the discrete run on that
    // flow's clock.
    const double bias_rate = 8.0 * eta;
    for (long iter = 1; iter <= opts.steps; ++iter) {
        w -= eta * grad_w;
        if (loss == LossKind::kSquaredWithBias) bias -= bias_rate * grad_b;
        eval(current_loss, grad_w, grad_b);
        if (!std::isfinite(current_loss))
            throw std::runtime_error("quadratic_gd_run: loss diverged at iteration " + std::to_string(iter));
        if (iter % opts.log_every == 0 || iter == opts.steps) {
            log_state(iter, current_loss);
            if (spectra.back().maxCoeff() > guard)
                throw std::runtime_error("quadratic_gd_run: divergence detected at iteration " +
                                         std::to_string(iter));
        }
        if (current_loss < opts.loss_tol) {
            if (iter % opts.log_every != 0 && iter != opts.steps) log_state(iter, current_loss);
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
    return out;
}

}  // namespace incdyn
