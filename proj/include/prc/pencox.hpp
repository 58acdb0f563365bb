#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prc/data_model.hpp"
#include "prc/design.hpp"
#include "prc/errors.hpp"
#include "prc/rng.hpp"
#include "prc/step_function.hpp"
#include "prc/threads.hpp"

namespace prc {

enum class PenaltyKind { ridge, lasso, elnet };

struct PenaltySpec {
    PenaltyKind kind = PenaltyKind::ridge;
    std::vector<double> alpha_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    int n_lambda = 100;
    int n_folds = 10;
    int n_folds_elnet = 5;
    std::uint64_t seed = 1;
};

inline std::string penalty_kind_name(PenaltyKind kind) {
    switch (kind) {
        case PenaltyKind::ridge: return "ridge";
        case PenaltyKind::lasso: return "lasso";
        default: return "elnet";
    }
}

inline PenaltyKind penalty_kind_from_name(const std::string& name) {
    if (name == "ridge") return PenaltyKind::ridge;
    if (name == "lasso") return PenaltyKind::lasso;
    if (name == "elnet") return PenaltyKind::elnet;
    throw config_error("unknown penalty kind '" + name + "' (expected ridge, lasso or elnet)");
}

struct CvPoint {
    double lambda = 0.0;
    double deviance = 0.0;
};

struct CoxFit {
    std::vector<std::string> column_names;
    Eigen::VectorXd coef;         // original scale
    Eigen::VectorXd coef_scaled;  // standardized scale, used for prediction
    ColumnScaling scaling;
    PenaltyKind kind = PenaltyKind::ridge;
    double alpha = 0.0;
    double lambda = 0.0;
    double cv_deviance = 0.0;
    std::vector<CvPoint> cv_curve;                       // at the final alpha
    std::vector<std::pair<double, double>> alpha_curve;  // (alpha, best deviance)
    StepFunction baseline_cumhazard;                     // paired with standardized eta
    double eta_offset = 0.0;  // raw_row . coef - eta_offset == standardized eta
    std::optional<double> landmark;
    int n_subjects = 0;
    int n_events = 0;
    double partial_loglik = 0.0;
};

/// Breslow partial log-likelihood, gradient and negative Hessian in one
/// descending-time sweep with running sums; O(n d^2) per evaluation.
/// Thread-safe for concurrent const calls.
class CoxLikelihood {
public:
    CoxLikelihood(const Eigen::MatrixXd& design_rows, std::vector<double> time,
                  std::vector<int> event)
        : xt_(design_rows.transpose()), time_(std::move(time)), event_(std::move(event)) {
        const auto n = static_cast<std::size_t>(xt_.cols());
        if (time_.size() != n || event_.size() != n)
            throw data_error("cox likelihood: design and survival sizes differ");
        order_.resize(n);
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        std::sort(order_.begin(), order_.end(),
                  [&](std::size_t a, std::size_t b) { return time_[a] > time_[b]; });
        n_events_ = 0;
        for (int e : event_) n_events_ += e;
    }

    int n() const { return static_cast<int>(xt_.cols()); }
    int d() const { return static_cast<int>(xt_.rows()); }
    int n_events() const { return n_events_; }

    double loglik(const Eigen::VectorXd& beta) const { return eval(beta, nullptr, nullptr); }

    double eval(const Eigen::VectorXd& beta, Eigen::VectorXd* grad,
                Eigen::MatrixXd* neg_hessian) const {
        const int d = this->d();
        Eigen::VectorXd eta = xt_.transpose() * beta;
        const double eta_max = eta.size() > 0 ? eta.maxCoeff() : 0.0;

        double loglik = 0.0;
        double s0 = 0.0;
        Eigen::VectorXd s1;
        Eigen::MatrixXd s2;
        if (grad != nullptr) {
            grad->setZero(d);
            s1.setZero(d);
        }
        if (neg_hessian != nullptr) {
            neg_hessian->setZero(d, d);
            s2.setZero(d, d);
        }

        std::size_t i = 0;
        const std::size_t n = order_.size();
        while (i < n) {
            const double u = time_[order_[i]];
            std::size_t j = i;
            int deaths = 0;
            // everyone with this time enters the risk set before the event terms
            while (j < n && time_[order_[j]] == u) {
                const std::size_t idx = order_[j];
                const double w = std::exp(eta[static_cast<Eigen::Index>(idx)] - eta_max);
                s0 += w;
                if (grad != nullptr) s1 += w * xt_.col(static_cast<Eigen::Index>(idx));
                if (neg_hessian != nullptr)
                    s2.selfadjointView<Eigen::Lower>().rankUpdate(
                        xt_.col(static_cast<Eigen::Index>(idx)), w);
                if (event_[idx] == 1) {
                    ++deaths;
                    loglik += eta[static_cast<Eigen::Index>(idx)];
                    if (grad != nullptr) *grad += xt_.col(static_cast<Eigen::Index>(idx));
                }
                ++j;
            }
            if (deaths > 0) {
                loglik -= deaths * (eta_max + std::log(s0));
                if (grad != nullptr) *grad -= (deaths / s0) * s1;
                if (neg_hessian != nullptr) {
                    Eigen::VectorXd xbar = s1 / s0;
                    neg_hessian->selfadjointView<Eigen::Lower>().rankUpdate(xbar, -deaths);
                    neg_hessian->triangularView<Eigen::Lower>() += (deaths / s0) * s2;
                }
            }
            i = j;
        }
        if (neg_hessian != nullptr)
            *neg_hessian = neg_hessian->selfadjointView<Eigen::Lower>();
        return loglik;
    }

    /// Breslow cumulative baseline hazard at the given coefficients:
    /// jumps d_k / sum_{at risk} exp(eta) at each distinct event time.
    StepFunction breslow_cumhazard(const Eigen::VectorXd& beta) const {
        Eigen::VectorXd eta = xt_.transpose() * beta;
        const double eta_max = eta.size() > 0 ? eta.maxCoeff() : 0.0;
        double s0 = 0.0;
        std::vector<std::pair<double, double>> jumps;  // (time, increment), descending
        std::size_t i = 0;
        const std::size_t n = order_.size();
        while (i < n) {
            const double u = time_[order_[i]];
            std::size_t j = i;
            int deaths = 0;
            while (j < n && time_[order_[j]] == u) {
                s0 += std::exp(eta[static_cast<Eigen::Index>(order_[j])] - eta_max);
                deaths += event_[order_[j]];
                ++j;
            }
            if (deaths > 0) jumps.emplace_back(u, deaths * std::exp(-eta_max) / s0);
            i = j;
        }
        StepFunction hazard;
        hazard.value_before = 0.0;
        double cumulative = 0.0;
        for (auto it = jumps.rbegin(); it != jumps.rend(); ++it) {
            cumulative += it->second;
            hazard.knots.push_back(it->first);
            hazard.values.push_back(cumulative);
        }
        return hazard;
    }

private:
    Eigen::MatrixXd xt_;  // d x n, one contiguous column per subject
    std::vector<double> time_;
    std::vector<int> event_;
    std::vector<std::size_t> order_;
    int n_events_ = 0;
};

namespace detail {

inline double soft(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

/// Max-norm of the penalized-likelihood stationarity residual; exact KKT
/// certificate for the elastic-net Cox objective.
inline double kkt_residual(const Eigen::VectorXd& grad, const Eigen::VectorXd& beta, double l1,
                           double ridge) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        double r;
        if (beta[j] != 0.0)
            r = std::fabs(grad[j] - ridge * beta[j] - l1 * (beta[j] > 0.0 ? 1.0 : -1.0));
        else
            r = std::max(0.0, std::fabs(grad[j]) - l1);
        worst = std::max(worst, r);
    }
    return worst;
}

/// One penalized fit at fixed (l1, ridge) = (n lambda alpha, n lambda (1-alpha))
/// by proximal Newton: coordinate descent on the local quadratic model, then a
/// step-halving safeguard on the true objective. Iterates until the exact KKT
/// residual drops below kkt_tol.
inline bool proximal_newton(const CoxLikelihood& lik, double l1, double ridge,
                            Eigen::VectorXd& beta, double kkt_tol, int max_newton = 100) {
    const int d = lik.d();
    Eigen::VectorXd grad(d);
    Eigen::MatrixXd hess(d, d);
    auto penalty = [&](const Eigen::VectorXd& b) {
        return l1 * b.lpNorm<1>() + 0.5 * ridge * b.squaredNorm();
    };

    for (int iter = 0; iter < max_newton; ++iter) {
        double loglik = lik.eval(beta, &grad, &hess);
        if (kkt_residual(grad, beta, l1, ridge) < kkt_tol) return true;
        double objective = -loglik + penalty(beta);

        // coordinate descent on the quadratic model around beta
        Eigen::VectorXd b = beta;
        Eigen::VectorXd hdelta = Eigen::VectorXd::Zero(d);  // H (b - beta)
        for (int sweep = 0; sweep < 1000; ++sweep) {
            double max_change = 0.0;
            for (Eigen::Index j = 0; j < d; ++j) {
                const double denom = hess(j, j) + ridge;
                double bj;
                if (denom <= 1e-300) {
                    bj = 0.0;
                } else {
                    const double z = grad[j] - hdelta[j] + hess(j, j) * b[j];
                    bj = soft(z, l1) / denom;
                }
                const double change = bj - b[j];
                if (change != 0.0) {
                    hdelta += hess.col(j) * change;
                    b[j] = bj;
                    max_change = std::max(max_change, std::fabs(change));
                }
            }
            if (max_change < 1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff())) break;
        }

        // safeguard: back off along the Newton direction until the true
        // penalized objective stops increasing
        Eigen::VectorXd direction = b - beta;
        if (direction.cwiseAbs().maxCoeff() == 0.0) return false;  // no progress possible
        double step = 1.0;
        bool accepted = false;
        for (int half = 0; half < 40; ++half) {
            Eigen::VectorXd candidate = beta + step * direction;
            double cand_obj = -lik.loglik(candidate) + penalty(candidate);
            if (cand_obj <= objective + 1e-12 * (std::fabs(objective) + 1.0)) {
                beta = candidate;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) return false;
    }
    Eigen::VectorXd final_grad(d);
    lik.eval(beta, &final_grad, nullptr);
    return kkt_residual(final_grad, beta, l1, ridge) < kkt_tol;
}

inline std::vector<double> lambda_path(double score_max, int n, int d, double alpha,
                                       int n_lambda) {
    const double floored_alpha = std::max(alpha, 1e-3);
    const double lambda_max = score_max / (n * floored_alpha);
    const double min_ratio = n > d ? 1e-3 : 1e-2;
    std::vector<double> path(static_cast<std::size_t>(n_lambda));
    for (int i = 0; i < n_lambda; ++i)
        path[static_cast<std::size_t>(i)] =
            lambda_max * std::exp(std::log(min_ratio) * i / (n_lambda - 1));
    return path;
}

/// Event-stratified fold labels: events and censored subjects are shuffled
/// separately and dealt round-robin, so every fold sees a representative
/// event fraction. Deterministic in the rng state.
inline std::vector<int> stratified_folds(const std::vector<int>& events, int n_folds, Rng rng) {
    std::vector<std::size_t> cases, controls;
    for (std::size_t i = 0; i < events.size(); ++i)
        (events[i] == 1 ? cases : controls).push_back(i);
    rng.shuffle(cases);
    rng.shuffle(controls);
    std::vector<int> fold(events.size(), 0);
    for (std::size_t k = 0; k < cases.size(); ++k)
        fold[cases[k]] = static_cast<int>(k % static_cast<std::size_t>(n_folds));
    for (std::size_t k = 0; k < controls.size(); ++k)
        fold[controls[k]] =
            static_cast<int>((k + cases.size()) % static_cast<std::size_t>(n_folds));
    return fold;
}

struct SurvArrays {
    std::vector<double> time;
    std::vector<int> event;
};

inline SurvArrays surv_arrays(const std::vector<SurvivalRecord>& survival) {
    SurvArrays out;
    out.time.reserve(survival.size());
    out.event.reserve(survival.size());
    for (const auto& rec : survival) {
        out.time.push_back(rec.time);
        out.event.push_back(rec.event);
    }
    return out;
}

/// Cross-validated deviance along a lambda path: for each fold, fit on the
/// complement with warm starts, then score -2 [ l(full) - l(train) ] at each
/// lambda. Fold results land in indexed slots and are reduced in fold order,
/// so the curve is identical for any worker count.
inline std::vector<double> cv_deviance_curve(const Eigen::MatrixXd& x, const SurvArrays& surv,
                                             const CoxLikelihood& full,
                                             const std::vector<int>& fold_of,
                                             int n_folds, const std::vector<double>& lambdas,
                                             double alpha, double kkt_tol, int workers) {
    const auto n = static_cast<std::size_t>(x.rows());
    const auto n_lambda = lambdas.size();
    Eigen::MatrixXd contributions =
        Eigen::MatrixXd::Zero(n_folds, static_cast<Eigen::Index>(n_lambda));
    std::vector<std::string> fold_errors(static_cast<std::size_t>(n_folds));

    parallel_for(static_cast<std::size_t>(n_folds), workers, [&](std::size_t k) {
        try {
            std::vector<Eigen::Index> train_rows;
            std::vector<double> train_time;
            std::vector<int> train_event;
            for (std::size_t i = 0; i < n; ++i) {
                if (fold_of[i] == static_cast<int>(k)) continue;
                train_rows.push_back(static_cast<Eigen::Index>(i));
                train_time.push_back(surv.time[i]);
                train_event.push_back(surv.event[i]);
            }
            if (std::accumulate(train_event.begin(), train_event.end(), 0) == 0)
                throw fit_error("no events in the training split");
            Eigen::MatrixXd train_x(static_cast<Eigen::Index>(train_rows.size()), x.cols());
            for (std::size_t r = 0; r < train_rows.size(); ++r)
                train_x.row(static_cast<Eigen::Index>(r)) = x.row(train_rows[r]);
            CoxLikelihood train(train_x, std::move(train_time), std::move(train_event));

            const double n_train = static_cast<double>(train.n());
            Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
            for (std::size_t l = 0; l < n_lambda; ++l) {
                const double l1 = n_train * lambdas[l] * alpha;
                const double ridge = n_train * lambdas[l] * (1.0 - alpha);
                if (!proximal_newton(train, l1, ridge, beta, kkt_tol))
                    throw fit_error("did not converge at lambda=" + format_double(lambdas[l]));
                contributions(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) =
                    -2.0 * (full.loglik(beta) - train.loglik(beta));
            }
        } catch (const std::exception& e) {
            fold_errors[k] = e.what();
        }
    });
    for (std::size_t k = 0; k < fold_errors.size(); ++k)
        if (!fold_errors[k].empty())
            throw fit_error("cross-validation fold " + std::to_string(k) + ": " + fold_errors[k]);

    std::vector<double> curve(n_lambda, 0.0);
    for (int k = 0; k < n_folds; ++k)
        for (std::size_t l = 0; l < n_lambda; ++l)
            curve[l] += contributions(k, static_cast<Eigen::Index>(l));
    return curve;
}

}  // namespace detail

/// Breslow partial log-likelihood of `coefficients` for the given design and
/// survival outcomes (evaluated on the design's own scale).
inline double cox_partial_loglik(const Eigen::VectorXd& coefficients, const DesignMatrix& design,
                                 const std::vector<SurvivalRecord>& survival) {
    if (static_cast<std::size_t>(design.values.rows()) != survival.size())
        throw data_error("design and survival row counts differ");
    auto surv = detail::surv_arrays(survival);
    CoxLikelihood lik(design.values, surv.time, surv.event);
    return lik.loglik(coefficients);
}

/// Breslow cumulative baseline hazard step function for given coefficients.
inline StepFunction breslow_baseline(const Eigen::VectorXd& coefficients,
                                     const DesignMatrix& design,
                                     const std::vector<SurvivalRecord>& survival) {
    if (static_cast<std::size_t>(design.values.rows()) != survival.size())
        throw data_error("design and survival row counts differ");
    auto surv = detail::surv_arrays(survival);
    CoxLikelihood lik(design.values, surv.time, surv.event);
    return lik.breslow_cumhazard(coefficients);
}

/// Elastic-net penalized Cox regression with cross-validated tuning.
///
/// The penalized objective is l(beta) - n lambda [ alpha |beta|_1 +
/// (1-alpha)/2 |beta|_2^2 ]. lambda is chosen by K-fold cross-validated
/// deviance (Verweij & van Houwelingen), minimizing over a 100-value
/// log-spaced path; for the elnet kind, alpha is first chosen on its own
/// inner folds shared across the alpha grid.
inline CoxFit fit_penalized_cox(const DesignMatrix& design,
                                const std::vector<SurvivalRecord>& survival,
                                const PenaltySpec& penalty, int workers = 1,
                                WarningSink warnings = nullptr,
                                std::optional<double> landmark = std::nullopt) {
    const auto n = static_cast<int>(design.values.rows());
    const auto d = static_cast<int>(design.values.cols());
    if (static_cast<std::size_t>(n) != survival.size())
        throw data_error("design and survival row counts differ");
    for (std::size_t i = 0; i < survival.size(); ++i)
        if (design.subject_ids[i] != survival[i].id)
            throw data_error("design rows are not aligned with the survival rows");
    if (penalty.n_lambda < 2) throw config_error("n_lambda must be at least 2");
    if (penalty.n_folds < 2 || penalty.n_folds_elnet < 2)
        throw config_error("cross-validation needs at least 2 folds");
    if (penalty.kind == PenaltyKind::elnet) {
        if (penalty.alpha_grid.empty()) throw config_error("elnet requires a non-empty alpha grid");
        for (double a : penalty.alpha_grid)
            if (!(a > 0.0) || !(a < 1.0))
                throw config_error("elnet alpha grid values must lie strictly between 0 and 1");
    }

    auto surv = detail::surv_arrays(survival);
    CoxLikelihood full(design.values, surv.time, surv.event);
    if (full.n_events() < 1) throw data_error("no events in the survival data");
    if (n < penalty.n_folds)
        throw data_error("only " + std::to_string(n) + " subjects for " +
                         std::to_string(penalty.n_folds) + " cross-validation folds");
    bool any_varying = false;
    for (int j = 0; j < d && !any_varying; ++j)
        any_varying = design.values.col(j).minCoeff() != design.values.col(j).maxCoeff();
    if (!any_varying) throw data_error("all design columns are constant");

    Eigen::VectorXd score0(d);
    full.eval(Eigen::VectorXd::Zero(d), &score0, nullptr);
    const double score_max = score0.cwiseAbs().maxCoeff();
    if (!(score_max > 0.0))
        throw fit_error("partial-likelihood score vanishes at 0; nothing to fit");
    const double kkt_tol = std::clamp(1e-8 * score_max, 1e-10, 1e-6);

    Rng root(penalty.seed);
    auto outer_folds = detail::stratified_folds(surv.event, penalty.n_folds, root.substream(2));

    CoxFit fit;
    fit.kind = penalty.kind;
    fit.column_names = design.column_names;
    fit.scaling = design.scaling;
    fit.landmark = landmark;
    fit.n_subjects = n;
    fit.n_events = full.n_events();

    double alpha;
    if (penalty.kind == PenaltyKind::ridge) {
        alpha = 0.0;
    } else if (penalty.kind == PenaltyKind::lasso) {
        alpha = 1.0;
    } else {
        auto inner_folds =
            detail::stratified_folds(surv.event, penalty.n_folds_elnet, root.substream(1));
        double best_dev = std::numeric_limits<double>::infinity();
        alpha = penalty.alpha_grid.front();
        for (double a : penalty.alpha_grid) {
            auto lambdas = detail::lambda_path(score_max, n, d, a, penalty.n_lambda);
            auto curve = detail::cv_deviance_curve(design.values, surv, full, inner_folds,
                                                   penalty.n_folds_elnet, lambdas, a, kkt_tol,
                                                   workers);
            double best_here = *std::min_element(curve.begin(), curve.end());
            fit.alpha_curve.emplace_back(a, best_here);
            if (best_here < best_dev) {
                best_dev = best_here;
                alpha = a;
            }
        }
    }
    fit.alpha = alpha;

    auto lambdas = detail::lambda_path(score_max, n, d, alpha, penalty.n_lambda);
    auto curve = detail::cv_deviance_curve(design.values, surv, full, outer_folds, penalty.n_folds,
                                           lambdas, alpha, kkt_tol, workers);
    std::size_t best_idx = 0;
    for (std::size_t l = 1; l < curve.size(); ++l)
        if (curve[l] < curve[best_idx]) best_idx = l;
    fit.cv_curve.reserve(curve.size());
    for (std::size_t l = 0; l < curve.size(); ++l) fit.cv_curve.push_back({lambdas[l], curve[l]});
    fit.lambda = lambdas[best_idx];
    fit.cv_deviance = curve[best_idx];

    // final fit on all data, warm-started down the path to the chosen lambda
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
    for (std::size_t l = 0; l <= best_idx; ++l) {
        const double l1 = n * lambdas[l] * alpha;
        const double ridge = n * lambdas[l] * (1.0 - alpha);
        if (!detail::proximal_newton(full, l1, ridge, beta, kkt_tol))
            throw fit_error("final fit did not converge at lambda=" + format_double(lambdas[l]));
    }
    fit.coef_scaled = beta;
    fit.partial_loglik = full.loglik(beta);
    fit.baseline_cumhazard = full.breslow_cumhazard(beta);

    fit.coef = beta;
    fit.eta_offset = 0.0;
    for (int j = 0; j < d; ++j) {
        if (design.scaling.standardized[static_cast<std::size_t>(j)]) {
            fit.coef[j] = beta[j] / design.scaling.sd[j];
            fit.eta_offset += beta[j] * design.scaling.mean[j] / design.scaling.sd[j];
        }
    }
    if (warnings != nullptr && fit.coef_scaled.cwiseAbs().maxCoeff() == 0.0)
        warn(warnings, "penalized Cox fit shrank every coefficient to exactly 0");
    return fit;
}

/// Standardized linear predictors for raw (original-scale) design rows.
inline Eigen::VectorXd standardized_eta(const CoxFit& fit, const Eigen::MatrixXd& raw_rows) {
    if (raw_rows.cols() != fit.coef.size())
        throw data_error("prediction rows have " + std::to_string(raw_rows.cols()) +
                         " columns, model has " + std::to_string(fit.coef.size()));
    return (raw_rows * fit.coef).array() - fit.eta_offset;
}

/// Conditional survival probabilities S(t | alive at the landmark) for raw
/// design rows at the requested times: exp(-H0(t) exp(eta)).
inline Eigen::MatrixXd predict_survival(const CoxFit& fit, const Eigen::MatrixXd& raw_rows,
                                        const std::vector<double>& times) {
    for (double t : times) {
        if (fit.landmark.has_value() && t < *fit.landmark)
            throw data_error("prediction time " + format_double(t) + " is before the landmark " +
                             format_double(*fit.landmark));
        if (!std::isfinite(t)) throw data_error("prediction time must be finite");
    }
    Eigen::VectorXd eta = standardized_eta(fit, raw_rows);
    Eigen::MatrixXd out(raw_rows.rows(), static_cast<Eigen::Index>(times.size()));
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double h0 = fit.baseline_cumhazard(times[k]);
        for (Eigen::Index i = 0; i < eta.size(); ++i)
            out(i, static_cast<Eigen::Index>(k)) = std::exp(-h0 * std::exp(eta[i]));
    }
    return out;
}

/// Same, but for rows already on the standardized scale (e.g. training rows
/// of the design the model was fit on).
inline Eigen::MatrixXd predict_survival_standardized(const CoxFit& fit,
                                                     const Eigen::MatrixXd& std_rows,
                                                     const std::vector<double>& times) {
    for (double t : times)
        if (fit.landmark.has_value() && t < *fit.landmark)
            throw data_error("prediction time " + format_double(t) + " is before the landmark " +
                             format_double(*fit.landmark));
    Eigen::VectorXd eta = std_rows * fit.coef_scaled;
    Eigen::MatrixXd out(std_rows.rows(), static_cast<Eigen::Index>(times.size()));
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double h0 = fit.baseline_cumhazard(times[k]);
        for (Eigen::Index i = 0; i < eta.size(); ++i)
            out(i, static_cast<Eigen::Index>(k)) = std::exp(-h0 * std::exp(eta[i]));
    }
    return out;
}

}  // namespace prc
