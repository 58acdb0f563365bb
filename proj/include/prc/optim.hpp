#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>

namespace prc {

struct OptimOptions {
    int max_iterations = 200;
    double rel_tolerance = 1e-8;   // on the objective change
    double grad_tolerance = 1e-7;  // on the max-abs gradient entry
};

struct OptimResult {
    Eigen::VectorXd x;
    double value = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    double grad_norm = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
};

/// Quasi-Newton (BFGS) minimizer with Armijo backtracking.
/// `objective(x, grad)` returns f(x) and fills `grad`; it may return +inf
/// for out-of-range points, which the line search backs away from.
inline OptimResult bfgs_minimize(
    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& objective,
    const Eigen::VectorXd& x0, const OptimOptions& options = {}) {
    const int dim = static_cast<int>(x0.size());
    OptimResult result;
    result.x = x0;

    Eigen::VectorXd grad(dim), grad_new(dim);
    double f = objective(result.x, grad);
    result.value = f;
    result.grad_norm = grad.cwiseAbs().maxCoeff();
    if (!std::isfinite(f)) return result;

    Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(dim, dim);
    const double armijo_c1 = 1e-4;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        result.iterations = iter + 1;
        Eigen::VectorXd direction = -(inv_hessian * grad);
        double slope = grad.dot(direction);
        if (slope >= 0.0) {  // not a descent direction: reset to steepest descent
            inv_hessian.setIdentity();
            direction = -grad;
            slope = grad.dot(direction);
        }

        double step = 1.0;
        double f_new = std::numeric_limits<double>::infinity();
        Eigen::VectorXd x_new;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = result.x + step * direction;
            f_new = objective(x_new, grad_new);
            if (std::isfinite(f_new) && f_new <= f + armijo_c1 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {  // line search stalled: treat current point as final
            result.grad_norm = grad.cwiseAbs().maxCoeff();
            result.converged = result.grad_norm <= options.grad_tolerance;
            return result;
        }

        Eigen::VectorXd s = x_new - result.x;
        Eigen::VectorXd y = grad_new - grad;
        double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            // BFGS update of the inverse Hessian.
            Eigen::VectorXd hy = inv_hessian * y;
            double yhy = y.dot(hy);
            double rho = 1.0 / sy;
            inv_hessian += ((sy + yhy) * rho * rho) * (s * s.transpose());
            inv_hessian -= rho * (hy * s.transpose() + s * hy.transpose());
        }

        double f_prev = f;
        result.x = x_new;
        f = f_new;
        grad = grad_new;
        result.value = f;
        result.grad_norm = grad.cwiseAbs().maxCoeff();

        bool small_change = std::fabs(f_prev - f) <= options.rel_tolerance * (std::fabs(f_prev) + 1.0);
        bool small_grad = result.grad_norm <= options.grad_tolerance;
        if (small_change || small_grad) {
            result.converged = true;
            return result;
        }
    }
    return result;
}

}  // namespace prc
