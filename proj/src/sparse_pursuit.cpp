#include "incdyn/sparse_pursuit.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "incdyn/parallel.hpp"

namespace incdyn {

PursuitProblem::PursuitProblem(Eigen::MatrixXd dictionary_, Eigen::VectorXd truth_coefficients_,
                               int sparsity_)
    : dictionary(std::move(dictionary_)), sparsity(sparsity_),
      truth_coefficients(std::move(truth_coefficients_)) {
    if (dictionary.cols() != truth_coefficients.size())
        throw std::invalid_argument("PursuitProblem: coefficient length mismatch");
    for (Eigen::Index j = 0; j < dictionary.cols(); ++j) {
        double n = dictionary.col(j).norm();
        if (std::abs(n - 1.0) > 1e-8)
            throw std::invalid_argument("PursuitProblem: dictionary columns must be unit-normalized");
    }
    target = dictionary * truth_coefficients;
}

PursuitProblem make_pursuit_problem(int dim, int atoms, int sparsity, Rng& rng) {
    if (sparsity > dim) throw std::invalid_argument("make_pursuit_problem: sparsity exceeds dim");
    Eigen::MatrixXd d(dim, atoms);
    for (int j = 0; j < atoms; ++j) {
        for (int i = 0; i < dim; ++i) d(i, j) = rng.normal();
        d.col(j).normalize();
    }
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(atoms);
    std::set<int> chosen;
    while (static_cast<int>(chosen.size()) < sparsity)
        chosen.insert(static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(atoms))));
    for (int j : chosen) alpha[j] = rng.uniform(0.5, 2.0) * rng.sign();
    return PursuitProblem(std::move(d), std::move(alpha), sparsity);
}

SelectionRecord omp_select(const PursuitProblem& problem, int k) {
    const Eigen::MatrixXd& d = problem.dictionary;
    const int dim = static_cast<int>(d.rows());
    if (k < 0 || k > dim) throw std::invalid_argument("omp_select: need 0 <= k <= dim");

    SelectionRecord rec;
    Eigen::VectorXd residual = problem.target;
    if (k == 0) {
        rec.residual_norms.push_back(residual.norm());
        return rec;
    }
    std::vector<char> used(static_cast<std::size_t>(d.cols()), 0);
    Eigen::MatrixXd selected(dim, k);
    for (int step = 0; step < k; ++step) {
        Eigen::VectorXd corr = d.transpose() * residual;
        int best = -1;
        double best_val = -1.0;
        for (Eigen::Index j = 0; j < corr.size(); ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            double v = std::abs(corr[j]);
            if (v > best_val) {
                best_val = v;
                best = static_cast<int>(j);
            }
        }
        used[static_cast<std::size_t>(best)] = 1;
        rec.indices.push_back(best);
        selected.col(step) = d.col(best);

        auto block = selected.leftCols(step + 1);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(block);
        if (qr.rank() < step + 1) rec.conditioning_warning = true;
        Eigen::VectorXd coeffs = qr.solve(problem.target);
        residual = problem.target - block * coeffs;
        rec.residual_norms.push_back(residual.norm());
        if (rec.residual_norms.back() < 1e-12 * std::max(1.0, problem.target.norm())) {
            rec.note = "exact recovery";
            break;
        }
    }
    return rec;
}

SelectionRecord deep_select(const PursuitProblem& problem, const DeepSelectOptions& opts) {
    const Eigen::MatrixXd& d = problem.dictionary;
    const int atoms = static_cast<int>(d.cols());
    const int n = opts.depth;
    if (n < 1) throw std::invalid_argument("deep_select: depth must be >= 1");

    double threshold = opts.threshold;
    if (threshold <= 0.0) threshold = 1e-2 * problem.truth_coefficients.cwiseAbs().maxCoeff();
    const int want = (opts.max_selections > 0) ? opts.max_selections : atoms;

    const double root = std::pow(opts.init_scale, 1.0 / n);
    Eigen::VectorXd wp = Eigen::VectorXd::Constant(atoms, root);
    Eigen::VectorXd wm = Eigen::VectorXd::Constant(atoms, root);
    Eigen::VectorXd sigma = Eigen::VectorXd::Zero(atoms);

    SelectionRecord rec;
    std::vector<char> selected(static_cast<std::size_t>(atoms), 0);
    const double target_norm = problem.target.norm();

    Eigen::VectorXd residual = -problem.target; // D*sigma - x at sigma = 0
    double loss = 0.5 * residual.squaredNorm();
    long k = 0;
    for (k = 1; k <= opts.max_steps; ++k) {
        Eigen::VectorXd grad = d.transpose() * residual;
        if (n == 1) {
            wp -= opts.eta * grad;
            wm += opts.eta * grad;
        } else {
            for (int i = 0; i < atoms; ++i) {
                double g = grad[i] * n;
                wp[i] -= opts.eta * g * std::pow(wp[i], n - 1);
                wm[i] += opts.eta * g * std::pow(wm[i], n - 1);
                if (wp[i] < 0.0) wp[i] = 0.0;
                if (wm[i] < 0.0) wm[i] = 0.0;
            }
        }
        for (int i = 0; i < atoms; ++i) sigma[i] = std::pow(wp[i], n) - std::pow(wm[i], n);
        residual = d * sigma - problem.target;
        loss = 0.5 * residual.squaredNorm();

        for (int i = 0; i < atoms; ++i) {
            if (!selected[static_cast<std::size_t>(i)] && std::abs(sigma[i]) >= threshold) {
                selected[static_cast<std::size_t>(i)] = 1;
                rec.indices.push_back(i);
                rec.residual_norms.push_back(residual.norm());
            }
        }
        if (static_cast<int>(rec.indices.size()) >= want) break;
        if (loss < opts.loss_tol * std::max(1.0, target_norm * target_norm)) break;
    }
    if (k > opts.max_steps) {
        rec.completed = false;
        rec.note = "max_steps reached before convergence";
    }
    if (rec.indices.empty()) {
        rec.completed = false;
        rec.note = "threshold never crossed (threshold too large?)";
        rec.residual_norms.push_back(residual.norm());
    }
    return rec;
}

std::vector<AgreementStats> agreement_curve(
    const std::vector<std::vector<PursuitProblem>>& problems_per_sparsity,
    const std::vector<int>& sparsities, const DeepSelectOptions& opts, unsigned threads) {
    if (problems_per_sparsity.size() != sparsities.size())
        throw std::invalid_argument("agreement_curve: grid size mismatch");
    for (const auto& group : problems_per_sparsity)
        if (group.size() < 2)
            throw std::invalid_argument("agreement_curve: need at least 2 problems per sparsity level");

    std::vector<AgreementStats> out(sparsities.size());
    for (std::size_t g = 0; g < sparsities.size(); ++g) {
        const auto& group = problems_per_sparsity[g];
        const int s = sparsities[g];
        std::vector<double> scores(group.size(), 0.0);
        std::vector<char> flagged(group.size(), 0);
        parallel_for(group.size(), [&](std::size_t t) {
            const PursuitProblem& prob = group[t];
            SelectionRecord omp = omp_select(prob, s);
            DeepSelectOptions local = opts;
            local.max_selections = s;
            SelectionRecord deep = deep_select(prob, local);
            std::size_t prefix = std::min({static_cast<std::size_t>(s), omp.indices.size(),
                                           deep.indices.size()});
            if (prefix < static_cast<std::size_t>(s)) flagged[t] = 1;
            if (prefix == 0) {
                scores[t] = 0.0;
                return;
            }
            std::set<int> a(omp.indices.begin(), omp.indices.begin() + static_cast<long>(prefix));
            int inter = 0;
            for (std::size_t i = 0; i < prefix; ++i)
                if (a.count(deep.indices[i])) ++inter;
            scores[t] = static_cast<double>(inter) / static_cast<double>(prefix);
        }, threads);

        AgreementStats st;
        st.sparsity = s;
        st.trials = static_cast<int>(group.size());
        double mean = 0.0;
        for (double v : scores) mean += v;
        mean /= static_cast<double>(scores.size());
        double var = 0.0;
        for (double v : scores) var += (v - mean) * (v - mean);
        st.mean = mean;
        st.stddev = std::sqrt(var / static_cast<double>(scores.size()));
        for (char f : flagged) st.flagged += f;
        out[g] = st;
    }
    return out;
}

}  // namespace incdyn
