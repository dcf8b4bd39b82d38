#include "incdyn/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace incdyn {

namespace {

double normalized_min_margin(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& truth) {
    Eigen::VectorXd scores = x * truth;
    double mn = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < y.size(); ++k) mn = std::min(mn, y[k] * scores[k]);
    return mn / truth.norm();
}

}  // namespace

ClassificationDataset make_sparse_dataset(int dim, int count, int sparsity, Rng& rng,
                                          double min_margin) {
    if (sparsity < 1 || sparsity > dim)
        throw std::invalid_argument("make_sparse_dataset: bad sparsity");
    for (int attempt = 0; attempt < 200; ++attempt) {
        ClassificationDataset data;
        data.truth = Eigen::VectorXd::Zero(dim);
        std::vector<int> idx(static_cast<std::size_t>(dim));
        std::iota(idx.begin(), idx.end(), 0);
        for (int k = 0; k < sparsity; ++k) {
            int pick = k + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(dim - k)));
            std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(pick)]);
            data.support.push_back(idx[static_cast<std::size_t>(k)]);
        }
        for (int s : data.support) data.truth[s] = rng.uniform(0.5, 2.0) * rng.sign();
        data.examples.resize(count, dim);
        for (int r = 0; r < count; ++r)
            for (int c = 0; c < dim; ++c) data.examples(r, c) = rng.normal();
        Eigen::VectorXd scores = data.examples * data.truth;
        data.labels.resize(count);
        for (int r = 0; r < count; ++r) data.labels[r] = scores[r] >= 0.0 ? 1.0 : -1.0;
        if (normalized_min_margin(data.examples, data.labels, data.truth) > min_margin) {
            std::sort(data.support.begin(), data.support.end());
            return data;
        }
    }
    throw std::runtime_error("make_sparse_dataset: could not reach the margin guard");
}

ClassificationDataset make_frequency_sparse_dataset(int dim, int count, int pairs, Rng& rng,
                                                    double min_margin) {
    if (pairs < 1 || 2 * pairs >= dim)
        throw std::invalid_argument("make_frequency_sparse_dataset: bad pair count");
    const double two_pi = 6.283185307179586476925286766559;
    for (int attempt = 0; attempt < 200; ++attempt) {
        ClassificationDataset data;
        std::vector<int> freqs;
        while (static_cast<int>(freqs.size()) < pairs) {
            int f = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(dim / 2 - 1)));
            if (std::find(freqs.begin(), freqs.end(), f) == freqs.end()) freqs.push_back(f);
        }
        data.truth = Eigen::VectorXd::Zero(dim);
        for (int f : freqs) {
            double amp = rng.uniform(0.5, 2.0);
            double phase = rng.uniform(0.0, two_pi);
            for (int n = 0; n < dim; ++n)
                data.truth[n] += amp * std::cos(two_pi * f * n / dim + phase);
            data.frequency_support.push_back(f);
            data.frequency_support.push_back(dim - f);
        }
        data.examples.resize(count, dim);
        for (int r = 0; r < count; ++r)
            for (int c = 0; c < dim; ++c) data.examples(r, c) = rng.normal();
        Eigen::VectorXd scores = data.examples * data.truth;
        data.labels.resize(count);
        for (int r = 0; r < count; ++r) data.labels[r] = scores[r] >= 0.0 ? 1.0 : -1.0;
        if (normalized_min_margin(data.examples, data.labels, data.truth) > min_margin) {
            std::sort(data.frequency_support.begin(), data.frequency_support.end());
            return data;
        }
    }
    throw std::runtime_error("make_frequency_sparse_dataset: could not reach the margin guard");
}

DiagonalNetSpec::DiagonalNetSpec(int depth_, int dim_, double init_scale_)
    : depth(depth_), dim(dim_), init_scale(init_scale_) {
    if (depth < 1) throw std::invalid_argument("DiagonalNetSpec: depth must be >= 1");
    if (dim < 1) throw std::invalid_argument("DiagonalNetSpec: dim must be >= 1");
    if (!(init_scale > 0.0)) throw std::invalid_argument("DiagonalNetSpec: init scale must be positive");
}

namespace {

struct LossEval {
    double loss;
    Eigen::VectorXd grad_sigma; // d loss / d sigma
};

LossEval eval_linear_loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& sigma, ClassifierLoss loss) {
    const double m = static_cast<double>(y.size());
    Eigen::VectorXd scores = x * sigma;
    Eigen::VectorXd coeff(y.size());
    double total = 0.0;
    if (loss == ClassifierLoss::kExponential) {
        for (Eigen::Index k = 0; k < y.size(); ++k) {
            double e = std::exp(-y[k] * scores[k]);
            total += e;
            coeff[k] = -y[k] * e;
        }
    } else {
        for (Eigen::Index k = 0; k < y.size(); ++k) {
            double z = -y[k] * scores[k];
            // stable log(1 + e^z)
            total += (z > 0.0) ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
            double sig = 1.0 / (1.0 + std::exp(-z));
            coeff[k] = -y[k] * sig;
        }
    }
    LossEval ev;
    ev.loss = total / m;
    ev.grad_sigma = (x.transpose() * coeff) / m;
    return ev;
}

std::vector<int> top_indices(const Eigen::VectorXd& magnitudes, int k) {
    std::vector<int> idx(static_cast<std::size_t>(magnitudes.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + std::min<std::size_t>(idx.size(), static_cast<std::size_t>(k)),
                      idx.end(), [&](int a, int b) { return magnitudes[a] > magnitudes[b]; });
    idx.resize(static_cast<std::size_t>(std::min<int>(k, static_cast<int>(magnitudes.size()))));
    return idx;
}

double direction_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return a.dot(b) / (na * nb);
}

}  // namespace

ClassifierRunResult diag_gd_run(const DiagonalNetSpec& spec, const ClassificationDataset& data,
                                ClassifierLoss loss, const ClassifierRunOptions& opts) {
    const int d = spec.dim;
    if (data.examples.cols() != d) throw std::invalid_argument("diag_gd_run: dimension mismatch");
    const int n = spec.depth;
    const double root = std::pow(spec.init_scale, 1.0 / n);

    Eigen::VectorXd wp = Eigen::VectorXd::Constant(d, root);
    Eigen::VectorXd wm = Eigen::VectorXd::Constant(d, root);
    auto induced = [&]() {
        Eigen::VectorXd sigma(d);
        for (int i = 0; i < d; ++i) sigma[i] = std::pow(wp[i], n) - std::pow(wm[i], n);
        return sigma;
    };

    double eta = opts.eta;
    if (eta <= 0.0) eta = 0.05 / std::max(1.0, data.examples.cwiseAbs().maxCoeff());

    Eigen::VectorXd sigma = induced();
    LossEval ev = eval_linear_loss(data.examples, data.labels, sigma, loss);

    std::vector<double> iter_log;
    std::vector<Eigen::VectorXd> sigma_log;
    iter_log.push_back(0.0);
    sigma_log.push_back(sigma);

    double prev_loss = ev.loss;
    long k = 0;
    for (k = 1; k <= opts.max_steps; ++k) {
        double step = eta;
        if (opts.schedule == StepSchedule::kLossScaled) step = eta / std::max(ev.loss, 1e-300);
        if (n == 1) {
            // linear reparameterization; the factors may cross zero freely
            wp -= step * ev.grad_sigma;
            wm += step * ev.grad_sigma;
        } else {
            for (int i = 0; i < d; ++i) {
                double g = ev.grad_sigma[i];
                wp[i] -= step * g * n * std::pow(wp[i], n - 1);
                wm[i] += step * g * n * std::pow(wm[i], n - 1);
                // w = 0 is a fixed point of the multiplicative dynamics;
                // project back if a discrete step overshoots it
                if (wp[i] < 0.0) wp[i] = 0.0;
                if (wm[i] < 0.0) wm[i] = 0.0;
            }
        }
        sigma = induced();
        ev = eval_linear_loss(data.examples, data.labels, sigma, loss);
        if (k <= opts.pilot_window && ev.loss > prev_loss * (1.0 + 1e-12))
            throw std::runtime_error(
                "diag_gd_run: loss increased during the pilot window; retry with eta <= " +
                std::to_string(eta / 4.0));
        prev_loss = ev.loss;
        if (k % opts.log_every == 0 || k == opts.max_steps) {
            iter_log.push_back(static_cast<double>(k));
            sigma_log.push_back(sigma);
        }
        if (ev.loss < opts.loss_stop) {
            if (k % opts.log_every != 0) {
                iter_log.push_back(static_cast<double>(k));
                sigma_log.push_back(sigma);
            }
            break;
        }
    }

    ClassifierRunResult res;
    res.steps_run = std::min(k, opts.max_steps);
    res.final_loss = ev.loss;
    res.predictor = sigma;
    res.tracked = top_indices(sigma.cwiseAbs(), opts.top_k);
    res.iterations = std::move(iter_log);
    res.top_values.resize(static_cast<Eigen::Index>(res.iterations.size()),
                          static_cast<Eigen::Index>(res.tracked.size()));
    for (std::size_t r = 0; r < sigma_log.size(); ++r)
        for (std::size_t c = 0; c < res.tracked.size(); ++c)
            res.top_values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                std::abs(sigma_log[r][res.tracked[c]]);
    if (opts.track_full) {
        res.full_history.resize(static_cast<Eigen::Index>(sigma_log.size()), d);
        for (std::size_t r = 0; r < sigma_log.size(); ++r)
            res.full_history.row(static_cast<Eigen::Index>(r)) = sigma_log[r].transpose();
    }
    res.truth_correlation = direction_correlation(sigma, data.truth);
    MaxMarginResult mm = max_margin_solve(data.examples, data.labels);
    res.margin_correlation = direction_correlation(sigma, mm.direction);
    return res;
}

ConvNetSpec::ConvNetSpec(int depth_, int dim_) : depth(depth_), dim(dim_) {
    if (depth < 1) throw std::invalid_argument("ConvNetSpec: depth must be >= 1");
    if (dim < 2) throw std::invalid_argument("ConvNetSpec: dim must be >= 2");
    kernels.assign(static_cast<std::size_t>(depth - 1), Eigen::VectorXd::Zero(dim));
    head = Eigen::VectorXd::Zero(dim);
}

ConvNetSpec ConvNetSpec::random(int depth_, int dim_, double scale, Rng& rng) {
    ConvNetSpec spec(depth_, dim_);
    for (auto& w : spec.kernels)
        for (int i = 0; i < dim_; ++i) w[i] = rng.normal(0.0, scale);
    for (int i = 0; i < dim_; ++i) spec.head[i] = rng.normal(0.0, scale);
    return spec;
}

Eigen::VectorXd circular_correlate(const Eigen::VectorXd& x, const Eigen::VectorXd& w) {
    if (x.size() != w.size()) throw std::invalid_argument("circular_correlate: length mismatch");
    const int d = static_cast<int>(x.size());
    Eigen::VectorXd out(d);
    for (int i = 0; i < d; ++i) {
        double acc = 0.0;
        for (int k = 0; k < d; ++k) acc += w[k] * x[(i + k) % d];
        out[i] = acc;
    }
    return out;
}

double conv_forward(const ConvNetSpec& spec, const Eigen::VectorXd& x) {
    if (x.size() != spec.dim) throw std::invalid_argument("conv_forward: length mismatch");
    Eigen::VectorXd h = x;
    for (const auto& w : spec.kernels) h = circular_correlate(h, w);
    return h.dot(spec.head);
}

Eigen::VectorXcd dft(const Eigen::VectorXd& x) {
    const int d = static_cast<int>(x.size());
    const double two_pi = 6.283185307179586476925286766559;
    Eigen::VectorXcd out(d);
    for (int f = 0; f < d; ++f) {
        std::complex<double> acc(0.0, 0.0);
        for (int k = 0; k < d; ++k) {
            double a = -two_pi * f * k / d;
            acc += x[k] * std::complex<double>(std::cos(a), std::sin(a));
        }
        out[f] = acc;
    }
    return out;
}

Eigen::VectorXd idft_real(const Eigen::VectorXcd& xh) {
    const int d = static_cast<int>(xh.size());
    const double two_pi = 6.283185307179586476925286766559;
    Eigen::VectorXd out(d);
    for (int k = 0; k < d; ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (int f = 0; f < d; ++f) {
            double a = two_pi * f * k / d;
            acc += xh[f] * std::complex<double>(std::cos(a), std::sin(a));
        }
        out[k] = acc.real() / d;
    }
    return out;
}

Eigen::VectorXcd induced_frequency_profile(const ConvNetSpec& spec) {
    Eigen::VectorXcd prof = dft(spec.head);
    for (const auto& w : spec.kernels) prof = dft(w).cwiseProduct(prof);
    return prof;
}

Eigen::VectorXd induced_predictor(const ConvNetSpec& spec) {
    return idft_real(induced_frequency_profile(spec));
}

ClassifierRunResult conv_gd_run(ConvNetSpec spec, const ClassificationDataset& data,
                                ClassifierLoss loss, const ClassifierRunOptions& opts) {
    const int d = spec.dim;
    if (data.examples.cols() != d) throw std::invalid_argument("conv_gd_run: dimension mismatch");
    const int layers = spec.depth - 1;
    const long m = data.examples.rows();

    double eta = opts.eta;
    if (eta <= 0.0) eta = 0.05;

    auto loss_of_predictor = [&](const Eigen::VectorXd& sigma) {
        return eval_linear_loss(data.examples, data.labels, sigma, loss);
    };

    std::vector<double> iter_log;
    std::vector<Eigen::VectorXcd> freq_log;

    Eigen::VectorXd sigma = induced_predictor(spec);
    LossEval ev = loss_of_predictor(sigma);
    iter_log.push_back(0.0);
    freq_log.push_back(induced_frequency_profile(spec));

    // forward activations per example are recomputed each step (desk scale)
    std::vector<Eigen::VectorXd> h(static_cast<std::size_t>(layers + 1));
    std::vector<Eigen::VectorXd> grad_kernels(static_cast<std::size_t>(layers));
    Eigen::VectorXd grad_head(d);

    double prev_loss = ev.loss;
    long k = 0;
    for (k = 1; k <= opts.max_steps; ++k) {
        double step = eta;
        if (opts.schedule == StepSchedule::kLossScaled) step = eta / std::max(ev.loss, 1e-300);

        for (auto& g : grad_kernels) g = Eigen::VectorXd::Zero(d);
        grad_head.setZero();

        for (long e = 0; e < m; ++e) {
            h[0] = data.examples.row(e).transpose();
            for (int l = 0; l < layers; ++l)
                h[static_cast<std::size_t>(l + 1)] =
                    circular_correlate(h[static_cast<std::size_t>(l)], spec.kernels[static_cast<std::size_t>(l)]);
            double score = h[static_cast<std::size_t>(layers)].dot(spec.head);
            double coeff;
            if (loss == ClassifierLoss::kExponential) {
                coeff = -data.labels[e] * std::exp(-data.labels[e] * score) / static_cast<double>(m);
            } else {
                double z = -data.labels[e] * score;
                coeff = -data.labels[e] / (1.0 + std::exp(-z)) / static_cast<double>(m);
            }
            grad_head += coeff * h[static_cast<std::size_t>(layers)];
            // backprop: g_l = d f / d h_l
            Eigen::VectorXd g = spec.head;
            for (int l = layers - 1; l >= 0; --l) {
                // d f / d w_l[k] = sum_i g[i] h_l[(i+k) mod d]
                grad_kernels[static_cast<std::size_t>(l)] +=
                    coeff * circular_correlate(h[static_cast<std::size_t>(l)], g);
                // d f / d h_l[j] = sum_i g[i] w_l[(j-i) mod d] (circular convolution)
                Eigen::VectorXd gprev(d);
                const Eigen::VectorXd& w = spec.kernels[static_cast<std::size_t>(l)];
                for (int j = 0; j < d; ++j) {
                    double acc = 0.0;
                    for (int i = 0; i < d; ++i) acc += g[i] * w[(j - i + d) % d];
                    gprev[j] = acc;
                }
                g = gprev;
            }
        }

        for (int l = 0; l < layers; ++l)
            spec.kernels[static_cast<std::size_t>(l)] -= step * grad_kernels[static_cast<std::size_t>(l)];
        spec.head -= step * grad_head;

        sigma = induced_predictor(spec);
        ev = loss_of_predictor(sigma);
        if (k <= opts.pilot_window && ev.loss > prev_loss * (1.0 + 1e-12))
            throw std::runtime_error(
                "conv_gd_run: loss increased during the pilot window; retry with eta <= " +
                std::to_string(eta / 4.0));
        prev_loss = ev.loss;
        if (k % opts.log_every == 0 || k == opts.max_steps) {
            iter_log.push_back(static_cast<double>(k));
            freq_log.push_back(induced_frequency_profile(spec));
        }
        if (ev.loss < opts.loss_stop) {
            if (k % opts.log_every != 0) {
                iter_log.push_back(static_cast<double>(k));
                freq_log.push_back(induced_frequency_profile(spec));
            }
            break;
        }
    }

    ClassifierRunResult res;
    res.steps_run = std::min(k, opts.max_steps);
    res.final_loss = ev.loss;
    res.predictor = sigma;

    Eigen::VectorXcd final_prof = freq_log.back();
    Eigen::VectorXd amps = final_prof.cwiseAbs();
    res.tracked = top_indices(amps, opts.top_k);
    res.iterations = std::move(iter_log);
    res.top_values.resize(static_cast<Eigen::Index>(res.iterations.size()),
                          static_cast<Eigen::Index>(res.tracked.size()));
    for (std::size_t r = 0; r < freq_log.size(); ++r)
        for (std::size_t c = 0; c < res.tracked.size(); ++c)
            res.top_values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                std::abs(freq_log[r][res.tracked[c]]);

    // correlations in the frequency domain against the truth profile
    Eigen::VectorXd truth_amp = dft(data.truth).cwiseAbs();
    res.truth_correlation = direction_correlation(amps, truth_amp);
    MaxMarginResult mm = max_margin_solve(data.examples, data.labels);
    res.margin_correlation = direction_correlation(sigma, mm.direction);
    return res;
}

MaxMarginResult max_margin_solve(const Eigen::MatrixXd& examples, const Eigen::VectorXd& labels,
                                 long max_sweeps, double kkt_tol) {
    const long m = examples.rows();
    const int d = static_cast<int>(examples.cols());
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd sqnorm(m);
    for (long k = 0; k < m; ++k) sqnorm[k] = examples.row(k).squaredNorm();

    MaxMarginResult res;
    for (long sweep = 0; sweep < max_sweeps; ++sweep) {
        double worst = 0.0;
        for (long k = 0; k < m; ++k) {
            double margin_k = labels[k] * examples.row(k).dot(beta);
            double delta = (1.0 - margin_k) / sqnorm[k];
            double new_alpha = std::max(0.0, alpha[k] + delta);
            double change = new_alpha - alpha[k];
            if (change != 0.0) {
                beta += change * labels[k] * examples.row(k).transpose();
                alpha[k] = new_alpha;
            }
            double violation = (alpha[k] > 0.0) ? std::abs(1.0 - margin_k)
                                                : std::max(0.0, 1.0 - margin_k);
            worst = std::max(worst, violation);
        }
        res.sweeps = sweep + 1;
        if (worst < kkt_tol) {
            res.certified = true;
            break;
        }
    }
    // feasibility certificate: every margin >= 1 - tol
    double min_margin = std::numeric_limits<double>::infinity();
    for (long k = 0; k < m; ++k)
        min_margin = std::min(min_margin, labels[k] * examples.row(k).dot(beta));
    if (min_margin < 1.0 - 1e-6) res.certified = false;
    double nb = beta.norm();
    if (nb == 0.0) throw std::runtime_error("max_margin_solve: zero separator (data not separable?)");
    res.direction = beta / nb;
    res.margin = min_margin / nb;
    return res;
}

}  // namespace incdyn
