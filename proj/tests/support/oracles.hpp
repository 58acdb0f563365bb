#pragma once

// Slow, independent reference implementations used only by the tests.
// Each one deliberately takes a different route than the library:
// dense covariance assembly instead of factorized identities, O(n^2)
// risk-set enumeration instead of cumulative sums, and so on.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------- mixed model

/// Marginal Gaussian log-likelihood with the per-subject covariance
/// V_i = Z_i D Z_i' + sigma^2 I built densely.
inline double lmm_marginal_loglik(const std::vector<Eigen::MatrixXd>& W,
                                  const std::vector<Eigen::MatrixXd>& Z,
                                  const std::vector<Eigen::VectorXd>& y,
                                  const Eigen::VectorXd& beta, const Eigen::MatrixXd& D,
                                  double sigma2) {
    double loglik = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const auto m = y[i].size();
        Eigen::MatrixXd V = Z[i] * D * Z[i].transpose();
        V.diagonal().array() += sigma2;
        Eigen::LLT<Eigen::MatrixXd> llt(V);
        Eigen::VectorXd r = y[i] - W[i] * beta;
        double logdet = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) logdet += 2.0 * std::log(llt.matrixLLT()(j, j));
        double quad = r.dot(llt.solve(r));
        loglik += -0.5 * (m * std::log(2.0 * M_PI) + logdet + quad);
    }
    return loglik;
}

/// Conditional mean of the random effects through Henderson's mixed-model
/// equations: (D^{-1} + Z'Z/sigma^2)^{-1} Z'(y - W beta)/sigma^2.
inline Eigen::VectorXd blup_henderson(const Eigen::MatrixXd& W, const Eigen::MatrixXd& Z,
                                      const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                                      const Eigen::MatrixXd& D, double sigma2) {
    Eigen::MatrixXd lhs = D.inverse() + Z.transpose() * Z / sigma2;
    return lhs.ldlt().solve(Z.transpose() * (y - W * beta)) / sigma2;
}

// ------------------------------------------------------------- Nelder-Mead

/// Plain Nelder-Mead minimizer; used to confirm that a reported optimum
/// cannot be improved. Returns the best value found, with x updated.
inline double nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                          Eigen::VectorXd& x, double step = 0.05, int max_iter = 5000) {
    const int n = static_cast<int>(x.size());
    std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(n) + 1, x);
    std::vector<double> value(static_cast<std::size_t>(n) + 1);
    for (int j = 0; j < n; ++j) simplex[static_cast<std::size_t>(j) + 1][j] += step;
    for (std::size_t k = 0; k < simplex.size(); ++k) value[k] = f(simplex[k]);

    auto order = [&]() {
        std::vector<std::size_t> idx(simplex.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
        std::vector<Eigen::VectorXd> s2;
        std::vector<double> v2;
        for (std::size_t k : idx) {
            s2.push_back(simplex[k]);
            v2.push_back(value[k]);
        }
        simplex.swap(s2);
        value.swap(v2);
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        order();
        if (std::fabs(value.back() - value.front()) < 1e-13 * (std::fabs(value.front()) + 1.0)) break;
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (std::size_t k = 0; k + 1 < simplex.size(); ++k) centroid += simplex[k];
        centroid /= static_cast<double>(n);

        Eigen::VectorXd reflected = centroid + (centroid - simplex.back());
        double fr = f(reflected);
        if (fr < value.front()) {
            Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex.back());
            double fe = f(expanded);
            if (fe < fr) {
                simplex.back() = expanded;
                value.back() = fe;
            } else {
                simplex.back() = reflected;
                value.back() = fr;
            }
        } else if (fr < value[value.size() - 2]) {
            simplex.back() = reflected;
            value.back() = fr;
        } else {
            Eigen::VectorXd contracted = centroid + 0.5 * (simplex.back() - centroid);
            double fc = f(contracted);
            if (fc < value.back()) {
                simplex.back() = contracted;
                value.back() = fc;
            } else {
                for (std::size_t k = 1; k < simplex.size(); ++k) {
                    simplex[k] = simplex.front() + 0.5 * (simplex[k] - simplex.front());
                    value[k] = f(simplex[k]);
                }
            }
        }
    }
    order();
    x = simplex.front();
    return value.front();
}

// ------------------------------------------------------------ penalized Cox

struct CoxData {
    Eigen::MatrixXd x;
    std::vector<double> time;
    std::vector<int> event;
};

/// Breslow partial log-likelihood by direct risk-set enumeration, O(n^2 d).
inline double cox_partial_loglik(const CoxData& data, const Eigen::VectorXd& beta) {
    const auto n = static_cast<std::size_t>(data.x.rows());
    Eigen::VectorXd eta = data.x * beta;
    double loglik = 0.0;
    // one Breslow term per event time, with multiplicity = deaths at that time
    std::vector<double> event_times;
    for (std::size_t i = 0; i < n; ++i)
        if (data.event[i] == 1) event_times.push_back(data.time[i]);
    std::sort(event_times.begin(), event_times.end());
    event_times.erase(std::unique(event_times.begin(), event_times.end()), event_times.end());
    for (double u : event_times) {
        double log_denominator;
        double max_eta = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j)
            if (data.time[j] >= u) max_eta = std::max(max_eta, eta[static_cast<Eigen::Index>(j)]);
        double denom = 0.0;
        int deaths = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (data.time[j] >= u) denom += std::exp(eta[static_cast<Eigen::Index>(j)] - max_eta);
            if (data.time[j] == u && data.event[j] == 1) {
                loglik += eta[static_cast<Eigen::Index>(j)];
                ++deaths;
            }
        }
        log_denominator = max_eta + std::log(denom);
        loglik -= deaths * log_denominator;
    }
    return loglik;
}

inline Eigen::VectorXd cox_gradient_fd(const CoxData& data, const Eigen::VectorXd& beta,
                                       double h = 1e-6) {
    Eigen::VectorXd g(beta.size());
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        Eigen::VectorXd up = beta, down = beta;
        up[j] += h;
        down[j] -= h;
        g[j] = (cox_partial_loglik(data, up) - cox_partial_loglik(data, down)) / (2.0 * h);
    }
    return g;
}

/// Exact penalized Cox solution found independently: projected Newton for the
/// smooth part plus subgradient handling of the l1 part through coordinate
/// bisection on the stationarity conditions. For the tests we instead use a
/// simple and extremely robust scheme: minimize the objective with repeated
/// coordinate line searches by golden-section (derivative-free), which makes
/// no use of the library's gradient/Hessian code.
inline Eigen::VectorXd penalized_cox_coordinate_search(const CoxData& data, double lambda_l1,
                                                       double lambda_l2,
                                                       Eigen::VectorXd beta,
                                                       int sweeps = 400) {
    auto objective = [&](const Eigen::VectorXd& b) {
        double penalty = lambda_l1 * b.template lpNorm<1>() + 0.5 * lambda_l2 * b.squaredNorm();
        return -cox_partial_loglik(data, b) + penalty;
    };
    auto golden = [&](Eigen::VectorXd b, Eigen::Index j, double lo, double hi) {
        const double phi = 0.6180339887498949;
        double a = lo, c = hi;
        double x1 = c - phi * (c - a), x2 = a + phi * (c - a);
        b[j] = x1;
        double f1 = objective(b);
        b[j] = x2;
        double f2 = objective(b);
        for (int it = 0; it < 120; ++it) {
            if (f1 < f2) {
                c = x2;
                x2 = x1;
                f2 = f1;
                x1 = c - phi * (c - a);
                b[j] = x1;
                f1 = objective(b);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (c - a);
                b[j] = x2;
                f2 = objective(b);
            }
        }
        return 0.5 * (a + c);
    };
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        Eigen::VectorXd before = beta;
        for (Eigen::Index j = 0; j < beta.size(); ++j) {
            double center = beta[j];
            double width = std::max(0.5, std::fabs(center));
            double candidate = golden(beta, j, center - width, center + width);
            // snap tiny values onto the l1 kink and keep whichever is better
            Eigen::VectorXd trial = beta;
            trial[j] = candidate;
            Eigen::VectorXd snapped = beta;
            snapped[j] = 0.0;
            beta = objective(snapped) <= objective(trial) ? snapped : trial;
        }
        if ((beta - before).cwiseAbs().maxCoeff() < 1e-10) break;
    }
    return beta;
}

/// Breslow cumulative baseline hazard by direct summation.
inline std::vector<std::pair<double, double>> breslow_cumhazard(const CoxData& data,
                                                                const Eigen::VectorXd& beta) {
    const auto n = static_cast<std::size_t>(data.x.rows());
    Eigen::VectorXd eta = data.x * beta;
    std::vector<double> event_times;
    for (std::size_t i = 0; i < n; ++i)
        if (data.event[i] == 1) event_times.push_back(data.time[i]);
    std::sort(event_times.begin(), event_times.end());
    event_times.erase(std::unique(event_times.begin(), event_times.end()), event_times.end());
    std::vector<std::pair<double, double>> out;
    double cumulative = 0.0;
    for (double u : event_times) {
        double denom = 0.0;
        int deaths = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (data.time[j] >= u) denom += std::exp(eta[static_cast<Eigen::Index>(j)]);
            if (data.time[j] == u && data.event[j] == 1) ++deaths;
        }
        cumulative += deaths / denom;
        out.emplace_back(u, cumulative);
    }
    return out;
}

// ----------------------------------------------------------------- metrics

/// Harrell's C by direct pair counting.
inline double concordance_pairs(const std::vector<double>& risk, const std::vector<double>& time,
                                const std::vector<int>& event) {
    double concordant = 0.0, tied = 0.0, comparable = 0.0;
    const std::size_t n = risk.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (event[i] == 1 && time[i] < time[j]) {
                comparable += 1.0;
                if (risk[i] > risk[j]) concordant += 1.0;
                else if (risk[i] == risk[j]) tied += 1.0;
            }
        }
    }
    return (concordant + 0.5 * tied) / comparable;
}

/// Empirical AUC with half-weight ties; equals the time-dependent AUC when
/// there is no censoring and cases are {time <= tau, event}.
inline double auc_pairs(const std::vector<double>& score, const std::vector<int>& is_case) {
    double wins = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < score.size(); ++i) {
        if (is_case[i] != 1) continue;
        for (std::size_t j = 0; j < score.size(); ++j) {
            if (is_case[j] != 0) continue;
            pairs += 1.0;
            if (score[i] > score[j]) wins += 1.0;
            else if (score[i] == score[j]) wins += 0.5;
        }
    }
    return wins / pairs;
}

}  // namespace oracle
