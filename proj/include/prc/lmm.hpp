#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "prc/csv.hpp"
#include "prc/data_model.hpp"
#include "prc/errors.hpp"
#include "prc/optim.hpp"
#include "prc/threads.hpp"

namespace prc {

/// One univariate mixed model: response ~ intercept + fixed terms, with a
/// random intercept and random slopes on the listed terms, per subject.
/// A term is either a regressor name or the literal "fuptime".
struct LmmSpec {
    std::string response;
    std::vector<std::string> fixed_terms;
    std::vector<std::string> random_terms;
};

struct TTableRow {
    std::string term;
    double estimate = 0.0;
    double std_error = 0.0;
    double df = 0.0;
    double t_value = 0.0;
    double p_value = 0.0;
};

struct LmmFit {
    LmmSpec spec;
    std::vector<std::string> fixed_names;   // "(Intercept)", then fixed terms
    std::vector<std::string> random_names;  // "(Intercept)", then random terms
    int response_index = -1;                // into Dataset::covariate_names
    std::vector<int> fixed_regressor_idx;   // -1 encodes fuptime
    std::vector<int> random_regressor_idx;
    Eigen::VectorXd beta;
    Eigen::MatrixXd D;  // random-effect covariance, q x q
    double sigma2 = 0.0;
    double loglik = 0.0;
    int n_obs = 0;
    int n_subjects = 0;
    bool converged = false;
    bool boundary = false;
    int iterations = 0;
    double grad_norm = std::numeric_limits<double>::quiet_NaN();
    std::vector<TTableRow> t_table;
};

namespace detail {

inline int resolve_term(const Dataset& data, const std::string& term) {
    if (data.regressor_index(term) >= 0) return data.regressor_index(term);
    if (term == "fuptime") return -1;
    std::string available = "fuptime";
    for (const auto& name : data.regressor_names) available += ", " + name;
    throw config_error("unknown model term '" + term + "' (available: " + available + ")");
}

inline double term_value(const LongitudinalRecord& rec, int regressor_idx) {
    return regressor_idx < 0 ? rec.fuptime : rec.regressors[static_cast<std::size_t>(regressor_idx)];
}

struct SubjectBlock {
    std::string id;
    Eigen::MatrixXd W, Z;
    Eigen::VectorXd y;
};

// Rows of one subject with a non-missing response, ordered by fuptime so the
// result does not depend on the input row order.
inline SubjectBlock build_subject_block(const Dataset& data, const std::vector<std::size_t>& row_idx,
                                        int response_idx, const std::vector<int>& fixed_idx,
                                        const std::vector<int>& random_idx, const std::string& id) {
    std::vector<std::size_t> usable;
    for (std::size_t r : row_idx)
        if (!std::isnan(data.longitudinal[r].covariates[static_cast<std::size_t>(response_idx)]))
            usable.push_back(r);
    std::stable_sort(usable.begin(), usable.end(), [&](std::size_t a, std::size_t b) {
        return data.longitudinal[a].fuptime < data.longitudinal[b].fuptime;
    });
    SubjectBlock block;
    block.id = id;
    const auto m = static_cast<Eigen::Index>(usable.size());
    block.W.resize(m, static_cast<Eigen::Index>(fixed_idx.size()) + 1);
    block.Z.resize(m, static_cast<Eigen::Index>(random_idx.size()) + 1);
    block.y.resize(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto& rec = data.longitudinal[usable[static_cast<std::size_t>(k)]];
        block.y[k] = rec.covariates[static_cast<std::size_t>(response_idx)];
        block.W(k, 0) = 1.0;
        for (std::size_t j = 0; j < fixed_idx.size(); ++j)
            block.W(k, static_cast<Eigen::Index>(j) + 1) = term_value(rec, fixed_idx[j]);
        block.Z(k, 0) = 1.0;
        for (std::size_t j = 0; j < random_idx.size(); ++j)
            block.Z(k, static_cast<Eigen::Index>(j) + 1) = term_value(rec, random_idx[j]);
    }
    return block;
}

// Per-subject cross-products; everything the likelihood needs, so the raw
// rows are only touched once.
struct BlockProducts {
    Eigen::MatrixXd WtW, WtZ, ZtZ;
    Eigen::VectorXd Wty, Zty;
    double yty = 0.0;
    int m = 0;
};

inline Eigen::MatrixXd lambda_from_theta(const Eigen::VectorXd& theta, int q) {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(q, q);
    int k = 0;
    for (int c = 0; c < q; ++c) {
        L(c, c) = std::exp(theta[k++]);
        for (int r = c + 1; r < q; ++r) L(r, c) = theta[k++];
    }
    return L;
}

/// Marginal likelihood of the mixed model, profiled over the fixed effects
/// and the residual variance. The random-effect scale is parameterized by the
/// log-Cholesky factor L of Psi = D / sigma^2, which keeps the search space
/// unconstrained. Per-subject work is O(q^3 + q^2 pW) through the identity
/// (I + Z Psi Z')^{-1} = I - Z L (I + L'Z'Z L)^{-1} L'Z'.
class MarginalLikelihood {
public:
    MarginalLikelihood(const std::vector<SubjectBlock>& blocks, int n_fixed, int n_random)
        : p_(n_fixed), q_(n_random) {
        products_.reserve(blocks.size());
        for (const auto& b : blocks) {
            BlockProducts bp;
            bp.WtW = b.W.transpose() * b.W;
            bp.WtZ = b.W.transpose() * b.Z;
            bp.ZtZ = b.Z.transpose() * b.Z;
            bp.Wty = b.W.transpose() * b.y;
            bp.Zty = b.Z.transpose() * b.y;
            bp.yty = b.y.squaredNorm();
            bp.m = static_cast<int>(b.y.size());
            n_obs_ += bp.m;
            yty_total_ += bp.yty;
            products_.push_back(std::move(bp));
        }
        sigma2_floor_ = 1e-12 * (yty_total_ / std::max(1, n_obs_) + 1.0);
    }

    int n_obs() const { return n_obs_; }
    int n_subjects() const { return static_cast<int>(products_.size()); }
    int n_fixed() const { return p_; }
    int n_random() const { return q_; }
    int n_theta() const { return q_ * (q_ + 1) / 2; }

    struct ProfiledState {
        Eigen::VectorXd beta;
        double sigma2 = 0.0;
        bool floored = false;
        Eigen::MatrixXd gls_information;  // sum of W' Sigma^{-1} W
    };

    /// Negative profiled log-likelihood and (optionally) its gradient in
    /// theta. beta and sigma^2 are maximized out in closed form, so the
    /// gradient only needs the partial derivative at the optimum.
    double profiled_negloglik(const Eigen::VectorXd& theta, Eigen::VectorXd* grad,
                              ProfiledState* state) const {
        const double inf = std::numeric_limits<double>::infinity();
        if (!theta.allFinite()) return inf;
        for (int k = 0, c = 0; c < q_; ++c) {
            if (theta[k] > 250.0) return inf;  // exp would overflow
            k += q_ - c;
        }
        Eigen::MatrixXd L = lambda_from_theta(theta, q_);

        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p_, p_);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(p_);
        double c_total = 0.0;
        double logdet_total = 0.0;
        std::vector<Eigen::LLT<Eigen::MatrixXd>> factors;
        factors.reserve(products_.size());
        for (const auto& bp : products_) {
            Eigen::MatrixXd M = Eigen::MatrixXd::Identity(q_, q_) + L.transpose() * bp.ZtZ * L;
            Eigen::LLT<Eigen::MatrixXd> llt(M);
            if (llt.info() != Eigen::Success) return inf;
            const auto& chol = llt.matrixLLT();
            for (int j = 0; j < q_; ++j) logdet_total += 2.0 * std::log(chol(j, j));
            Eigen::MatrixXd WtZL = bp.WtZ * L;                 // p x q
            Eigen::VectorXd LtZty = L.transpose() * bp.Zty;    // q
            Eigen::MatrixXd Minv_WtZLt = llt.solve(WtZL.transpose());  // q x p
            Eigen::VectorXd Minv_LtZty = llt.solve(LtZty);
            A.noalias() += bp.WtW - WtZL * Minv_WtZLt;
            b.noalias() += bp.Wty - WtZL * Minv_LtZty;
            c_total += bp.yty - LtZty.dot(Minv_LtZty);
            factors.push_back(std::move(llt));
        }

        Eigen::LDLT<Eigen::MatrixXd> gls(A);
        if (gls.info() != Eigen::Success) return inf;
        Eigen::VectorXd beta = gls.solve(b);
        if (!beta.allFinite()) return inf;
        double rss = std::max(0.0, c_total - beta.dot(b));
        bool floored = rss / n_obs_ < sigma2_floor_;
        double sigma2 = std::max(rss / n_obs_, sigma2_floor_);

        double negll = 0.5 * (n_obs_ * std::log(2.0 * M_PI * sigma2) + logdet_total + rss / sigma2);
        if (!std::isfinite(negll)) return inf;

        if (state != nullptr) {
            state->beta = beta;
            state->sigma2 = sigma2;
            state->floored = floored;
            state->gls_information = A;
        }
        if (grad != nullptr) {
            // d(-l)/d theta via C = L' (Q - S / sigma^2) with
            // Q = sum Z'Sigma^{-1}Z and S = sum (Z'Sigma^{-1}r)(Z'Sigma^{-1}r)'.
            Eigen::MatrixXd QS = Eigen::MatrixXd::Zero(q_, q_);
            for (std::size_t i = 0; i < products_.size(); ++i) {
                const auto& bp = products_[i];
                const auto& llt = factors[i];
                Eigen::MatrixXd ZtZL = bp.ZtZ * L;  // q x q
                Eigen::MatrixXd P = bp.ZtZ - ZtZL * llt.solve(ZtZL.transpose());
                Eigen::VectorXd Ztr = bp.Zty - bp.WtZ.transpose() * beta;
                Eigen::VectorXd a = Ztr - ZtZL * llt.solve(L.transpose() * Ztr);
                QS.noalias() += P;
                QS.noalias() -= (a * a.transpose()) / sigma2;
            }
            Eigen::MatrixXd C = L.transpose() * QS;
            grad->resize(n_theta());
            int k = 0;
            for (int c = 0; c < q_; ++c) {
                (*grad)[k++] = L(c, c) * C(c, c);
                for (int r = c + 1; r < q_; ++r) (*grad)[k++] = C(c, r);
            }
        }
        return negll;
    }

    /// Log-likelihood (not profiled, not negated) and gradient in the full
    /// parameter vector [beta, theta, log sigma^2]. Used to cross-check the
    /// analytic gradient against finite differences.
    double full_loglik(const Eigen::VectorXd& params, Eigen::VectorXd* grad) const {
        const int ntheta = n_theta();
        Eigen::VectorXd beta = params.head(p_);
        Eigen::VectorXd theta = params.segment(p_, ntheta);
        double sigma2 = std::exp(params[p_ + ntheta]);
        Eigen::MatrixXd L = lambda_from_theta(theta, q_);

        double logdet_total = 0.0;
        double quad_total = 0.0;
        Eigen::VectorXd score_beta = Eigen::VectorXd::Zero(p_);
        Eigen::MatrixXd QS = Eigen::MatrixXd::Zero(q_, q_);
        for (const auto& bp : products_) {
            Eigen::MatrixXd M = Eigen::MatrixXd::Identity(q_, q_) + L.transpose() * bp.ZtZ * L;
            Eigen::LLT<Eigen::MatrixXd> llt(M);
            if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
            const auto& chol = llt.matrixLLT();
            for (int j = 0; j < q_; ++j) logdet_total += 2.0 * std::log(chol(j, j));

            // r'Sigma^{-1}r, W'Sigma^{-1}r and the pieces reused by the
            // theta-gradient, all through the q x q factorization.
            Eigen::VectorXd Ztr = bp.Zty - bp.WtZ.transpose() * beta;
            Eigen::VectorXd Wtr = bp.Wty - bp.WtW * beta;
            double rtr = bp.yty - 2.0 * beta.dot(bp.Wty) + beta.dot(bp.WtW * beta);
            Eigen::VectorXd LtZtr = L.transpose() * Ztr;
            Eigen::VectorXd Minv_LtZtr = llt.solve(LtZtr);
            quad_total += rtr - LtZtr.dot(Minv_LtZtr);
            if (grad != nullptr) {
                Eigen::MatrixXd WtZL = bp.WtZ * L;
                score_beta.noalias() += Wtr - WtZL * Minv_LtZtr;
                Eigen::MatrixXd ZtZL = bp.ZtZ * L;
                Eigen::MatrixXd P = bp.ZtZ - ZtZL * llt.solve(ZtZL.transpose());
                Eigen::VectorXd a = Ztr - ZtZL * llt.solve(LtZtr);
                QS.noalias() += P;
                QS.noalias() -= (a * a.transpose()) / sigma2;
            }
        }
        double loglik =
            -0.5 * (n_obs_ * std::log(2.0 * M_PI * sigma2) + logdet_total + quad_total / sigma2);
        if (grad != nullptr) {
            grad->resize(params.size());
            grad->head(p_) = score_beta / sigma2;
            Eigen::MatrixXd C = L.transpose() * QS;
            int k = p_;
            for (int c = 0; c < q_; ++c) {
                (*grad)[k++] = -L(c, c) * C(c, c);
                for (int r = c + 1; r < q_; ++r) (*grad)[k++] = -C(c, r);
            }
            (*grad)[p_ + ntheta] = -0.5 * n_obs_ + 0.5 * quad_total / sigma2;
        }
        return loglik;
    }

    // Column scales of Z over all rows, used to pick starting values.
    Eigen::VectorXd z_column_scales() const {
        Eigen::VectorXd scale = Eigen::VectorXd::Ones(q_);
        Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(q_);
        for (const auto& bp : products_) sumsq += bp.ZtZ.diagonal();
        for (int j = 0; j < q_; ++j) {
            double rms = std::sqrt(sumsq[j] / std::max(1, n_obs_));
            scale[j] = rms > 1e-8 ? rms : 1.0;
        }
        return scale;
    }

    double sigma2_floor() const { return sigma2_floor_; }

private:
    int p_;
    int q_;
    int n_obs_ = 0;
    double yty_total_ = 0.0;
    double sigma2_floor_ = 0.0;
    std::vector<BlockProducts> products_;
};

inline std::vector<SubjectBlock> build_blocks(const Dataset& data, int response_idx,
                                              const std::vector<int>& fixed_idx,
                                              const std::vector<int>& random_idx) {
    auto rows = rows_by_subject(data);
    std::vector<SubjectBlock> blocks;
    blocks.reserve(data.survival.size());
    for (std::size_t i = 0; i < data.survival.size(); ++i) {
        SubjectBlock block = build_subject_block(data, rows[i], response_idx, fixed_idx, random_idx,
                                                 data.survival[i].id);
        if (block.y.size() > 0) blocks.push_back(std::move(block));
    }
    return blocks;
}

}  // namespace detail

/// Fits one linear mixed model by maximum likelihood. Starts the search from
/// several random-effect scales and keeps the best optimum. Non-convergence
/// and boundary fits (vanishing variance components) are flagged on the
/// result, not thrown.
inline LmmFit fit_lmm(const LmmSpec& spec, const Dataset& data) {
    LmmFit fit;
    fit.spec = spec;
    fit.response_index = data.covariate_index(spec.response);
    if (fit.response_index < 0)
        throw config_error("unknown longitudinal covariate '" + spec.response + "'");
    for (const auto& term : spec.fixed_terms)
        fit.fixed_regressor_idx.push_back(detail::resolve_term(data, term));
    for (const auto& term : spec.random_terms)
        fit.random_regressor_idx.push_back(detail::resolve_term(data, term));
    fit.fixed_names = {"(Intercept)"};
    fit.fixed_names.insert(fit.fixed_names.end(), spec.fixed_terms.begin(), spec.fixed_terms.end());
    fit.random_names = {"(Intercept)"};
    fit.random_names.insert(fit.random_names.end(), spec.random_terms.begin(),
                            spec.random_terms.end());

    auto blocks = detail::build_blocks(data, fit.response_index, fit.fixed_regressor_idx,
                                       fit.random_regressor_idx);
    const int p = static_cast<int>(fit.fixed_names.size());
    const int q = static_cast<int>(fit.random_names.size());
    if (blocks.size() < 2)
        throw fit_error("covariate '" + spec.response + "': fewer than 2 subjects have observations");
    detail::MarginalLikelihood lik(blocks, p, q);
    const int n_params = p + lik.n_theta() + 1;
    if (lik.n_obs() <= n_params)
        throw fit_error("covariate '" + spec.response + "': only " + std::to_string(lik.n_obs()) +
                        " observations for " + std::to_string(n_params) + " parameters");

    Eigen::VectorXd z_scale = lik.z_column_scales();
    auto objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
        return lik.profiled_negloglik(theta, &grad, nullptr);
    };

    OptimOptions opts;
    opts.max_iterations = 200;
    opts.rel_tolerance = 1e-8;
    std::optional<OptimResult> best;
    const double start_scales[] = {0.7, 0.15, 2.0};
    for (double w : start_scales) {
        Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(lik.n_theta());
        int k = 0;
        for (int c = 0; c < q; ++c) {
            theta0[k++] = std::log(w / z_scale[c]);
            for (int r = c + 1; r < q; ++r) theta0[k++] = 0.0;
        }
        OptimResult run = bfgs_minimize(objective, theta0, opts);
        if (!std::isfinite(run.value)) continue;
        if (!best.has_value() || run.value < best->value - 1e-10) best = run;
    }
    if (!best.has_value())
        throw fit_error("covariate '" + spec.response + "': likelihood evaluation failed from all starts");

    detail::MarginalLikelihood::ProfiledState state;
    Eigen::VectorXd grad_final(lik.n_theta());
    double negll = lik.profiled_negloglik(best->x, &grad_final, &state);

    Eigen::MatrixXd L = detail::lambda_from_theta(best->x, q);
    fit.beta = state.beta;
    fit.sigma2 = state.sigma2;
    fit.D = state.sigma2 * (L * L.transpose());
    fit.loglik = -negll;
    fit.n_obs = lik.n_obs();
    fit.n_subjects = lik.n_subjects();
    fit.converged = best->converged;
    fit.iterations = best->iterations;
    fit.grad_norm = best->grad_norm;
    fit.boundary = state.floored;
    for (int k = 0, c = 0; c < q; ++c) {
        if (best->x[k] < std::log(1e-6)) fit.boundary = true;  // vanishing scale
        k += q - c;
    }

    // Wald t-table for the fixed effects: Var(beta) = sigma^2 (sum W'Sigma^{-1}W)^{-1},
    // df = N - n_subjects - (p - 1).
    Eigen::MatrixXd cov_beta =
        fit.sigma2 * state.gls_information.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    double df = fit.n_obs - fit.n_subjects - (p - 1);
    for (int j = 0; j < p; ++j) {
        TTableRow row;
        row.term = fit.fixed_names[static_cast<std::size_t>(j)];
        row.estimate = fit.beta[j];
        row.std_error = std::sqrt(std::max(0.0, cov_beta(j, j)));
        row.df = df;
        row.t_value = row.std_error > 0.0 ? row.estimate / row.std_error
                                          : std::numeric_limits<double>::quiet_NaN();
        if (df > 0.0 && std::isfinite(row.t_value)) {
            boost::math::students_t dist(df);
            row.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(row.t_value)));
        } else {
            row.p_value = std::numeric_limits<double>::quiet_NaN();
        }
        fit.t_table.push_back(row);
    }
    return fit;
}

/// Result slot for one covariate: either a fit or the error it raised.
struct LmmFitOutcome {
    std::string covariate;
    std::optional<LmmFit> fit;
    std::string error;
};

/// Fits one mixed model per longitudinal covariate, in parallel across
/// covariates. Failures are captured per covariate so the remaining fits are
/// still returned.
inline std::vector<LmmFitOutcome> fit_all_lmms(const Dataset& data,
                                               const std::vector<std::string>& covariates,
                                               const std::vector<std::string>& fixed_terms,
                                               const std::vector<std::string>& random_terms,
                                               int workers = 1) {
    std::vector<LmmFitOutcome> outcomes(covariates.size());
    parallel_for(covariates.size(), workers, [&](std::size_t i) {
        outcomes[i].covariate = covariates[i];
        try {
            LmmSpec spec{covariates[i], fixed_terms, random_terms};
            outcomes[i].fit = fit_lmm(spec, data);
        } catch (const Error& e) {
            outcomes[i].error = e.what();
        }
    });
    return outcomes;
}

/// Unwraps fit_all_lmms outcomes; throws if any covariate failed, listing all
/// failures at once.
inline std::vector<LmmFit> require_all_fits(const std::vector<LmmFitOutcome>& outcomes) {
    std::string failures;
    std::vector<LmmFit> fits;
    for (const auto& outcome : outcomes) {
        if (outcome.fit.has_value())
            fits.push_back(*outcome.fit);
        else
            failures += (failures.empty() ? "" : "; ") + outcome.error;
    }
    if (!failures.empty()) throw fit_error(failures);
    return fits;
}

/// Predicted (empirical-Bayes) random effects for one subject:
/// u_hat = D Z' V^{-1} (y - W beta) with V = Z D Z' + sigma^2 I, computed from
/// the subject's rows with a non-missing response. Row order does not matter.
inline Eigen::VectorXd predict_random_effects(const LmmFit& fit,
                                              const std::vector<LongitudinalRecord>& records) {
    const int q = static_cast<int>(fit.random_names.size());
    std::vector<const LongitudinalRecord*> usable;
    for (const auto& rec : records)
        if (!std::isnan(rec.covariates[static_cast<std::size_t>(fit.response_index)]))
            usable.push_back(&rec);
    if (usable.empty())
        throw fit_error("covariate '" + fit.spec.response +
                        "': no non-missing measurements to predict random effects from");
    std::stable_sort(usable.begin(), usable.end(),
                     [](const LongitudinalRecord* a, const LongitudinalRecord* b) {
                         return a->fuptime < b->fuptime;
                     });
    const auto m = static_cast<Eigen::Index>(usable.size());
    const int p = static_cast<int>(fit.fixed_names.size());
    Eigen::MatrixXd W(m, p), Z(m, q);
    Eigen::VectorXd y(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto& rec = *usable[static_cast<std::size_t>(k)];
        y[k] = rec.covariates[static_cast<std::size_t>(fit.response_index)];
        W(k, 0) = 1.0;
        for (std::size_t j = 0; j < fit.fixed_regressor_idx.size(); ++j)
            W(k, static_cast<Eigen::Index>(j) + 1) = detail::term_value(rec, fit.fixed_regressor_idx[j]);
        Z(k, 0) = 1.0;
        for (std::size_t j = 0; j < fit.random_regressor_idx.size(); ++j)
            Z(k, static_cast<Eigen::Index>(j) + 1) = detail::term_value(rec, fit.random_regressor_idx[j]);
    }
    Eigen::VectorXd residual = y - W * fit.beta;
    Eigen::MatrixXd V = Z * fit.D * Z.transpose();
    V.diagonal().array() += fit.sigma2;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(V);
    Eigen::VectorXd d = ldlt.vectorD();
    double dmin = d.minCoeff();
    double dmax = d.maxCoeff();
    if (ldlt.info() != Eigen::Success || dmin <= 0.0 || dmax / dmin > 1e14)
        throw fit_error("covariate '" + fit.spec.response + "' (subject id=" + usable[0]->id +
                        "): marginal covariance is numerically singular");
    return fit.D * (Z.transpose() * ldlt.solve(residual));
}

/// Predicted random effects for every subject, stacked into an n x sum(q_s)
/// matrix aligned with the survival rows. Columns are named
/// "<covariate>_b_int" and "<covariate>_b_<term>". Subjects without any
/// usable measurement of a covariate get zeros (the population mean) and a
/// warning.
struct RandomEffectSummary {
    std::vector<std::string> subject_ids;
    std::vector<std::string> column_names;
    Eigen::MatrixXd values;
};

inline RandomEffectSummary summarize_lmms(const std::vector<LmmFit>& fits, const Dataset& data,
                                          WarningSink warnings = nullptr) {
    RandomEffectSummary summary;
    for (const auto& rec : data.survival) summary.subject_ids.push_back(rec.id);
    int total_cols = 0;
    for (const auto& fit : fits) {
        summary.column_names.push_back(fit.spec.response + "_b_int");
        for (std::size_t j = 1; j < fit.random_names.size(); ++j)
            summary.column_names.push_back(fit.spec.response + "_b_" + fit.random_names[j]);
        total_cols += static_cast<int>(fit.random_names.size());
    }
    auto rows = rows_by_subject(data);
    summary.values.setZero(static_cast<Eigen::Index>(data.survival.size()), total_cols);
    for (std::size_t i = 0; i < data.survival.size(); ++i) {
        std::vector<LongitudinalRecord> records;
        for (std::size_t r : rows[i]) records.push_back(data.longitudinal[r]);
        int col = 0;
        for (const auto& fit : fits) {
            const int q = static_cast<int>(fit.random_names.size());
            bool any = false;
            for (const auto& rec : records)
                if (!std::isnan(rec.covariates[static_cast<std::size_t>(fit.response_index)])) any = true;
            if (!any) {
                warn(warnings, "subject id=" + data.survival[i].id + " has no measurements of '" +
                                   fit.spec.response + "'; its predicted random effects are set to 0");
            } else {
                summary.values.row(static_cast<Eigen::Index>(i)).segment(col, q) =
                    predict_random_effects(fit, records).transpose();
            }
            col += q;
        }
    }
    return summary;
}

/// Fixed-effect estimates of all fitted models as one table.
inline CsvTable lmm_estimates_csv(const std::vector<LmmFit>& fits) {
    CsvTable table;
    table.header = {"covariate", "term", "estimate", "std_error", "df", "t_value", "p_value"};
    for (const auto& fit : fits) {
        for (const auto& row : fit.t_table) {
            table.rows.push_back({fit.spec.response, row.term, format_double(row.estimate),
                                  format_double(row.std_error), format_double(row.df),
                                  format_double(row.t_value), format_double(row.p_value)});
        }
    }
    return table;
}

}  // namespace prc
