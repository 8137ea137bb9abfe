/*
 * Copyright 2026 The sqf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "sqf/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "sqf/analytic.hpp"
#include "sqf/errors.hpp"

namespace sqf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_weights(const std::vector<WeightedPoint> &points)
{
    for (const auto &p : points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw InvalidInput("fit data must be finite");
        if (!(p.weight > 0.0) || !std::isfinite(p.weight))
            throw InvalidInput("fit weights must be positive and finite");
    }
}

bool inside(const Eigen::VectorXd &p, const LeastSquaresProblem &problem)
{
    for (Eigen::Index j = 0; j < p.size(); ++j) {
        if (!std::isfinite(p(j)))
            return false;
        if (problem.lower.size() && !(p(j) > problem.lower(j)))
            return false;
        if (problem.upper.size() && !(p(j) <= problem.upper(j)))
            return false;
    }
    return true;
}

// |J^T r| relative to |J| |r|: zero at a stationary point regardless of scale.
double gradient_cosine(const Eigen::MatrixXd &jac, const Eigen::VectorXd &r)
{
    const double denom = jac.norm() * r.norm();
    if (denom == 0.0)
        return 0.0;
    return (jac.transpose() * r).lpNorm<Eigen::Infinity>() / denom;
}

double wrap_angle(double a)
{
    constexpr double pi = std::numbers::pi;
    a = std::remainder(a, 2.0 * pi);
    if (a <= -pi)
        a += 2.0 * pi;
    return a;
}

} // namespace

double FitResult::value(const std::string &name) const
{
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name)
            return parameters(static_cast<Eigen::Index>(i));
    throw InvalidInput("unknown fit parameter '" + name + "'");
}

double FitResult::stderr_of(const std::string &name) const
{
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) {
            const auto k = static_cast<Eigen::Index>(i);
            return std::sqrt(covariance(k, k));
        }
    throw InvalidInput("unknown fit parameter '" + name + "'");
}

bool FitResult::has_flag(const std::string &flag) const
{
    return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

FitResult levenberg_marquardt(const LeastSquaresProblem &problem, const Eigen::VectorXd &start,
                              const std::vector<std::string> &names, const FitOptions &options)
{
    if (static_cast<size_t>(start.size()) != names.size())
        throw InvalidInput("parameter names do not match the start vector");
    if (!inside(start, problem))
        throw InvalidInput("start point violates the parameter bounds");

    FitResult result;
    result.names = names;
    Eigen::VectorXd p = start;
    Eigen::VectorXd r = problem.residuals(p);
    double cost = r.squaredNorm();
    result.residual_history.push_back(std::sqrt(cost));

    const auto n = p.size();
    double lambda = -1.0;
    bool converged = false;
    std::string message = "iteration limit reached";
    int iter = 0;

    for (; iter < options.max_iterations; ++iter) {
        const Eigen::MatrixXd jac = problem.jacobian(p);
        if (cost == 0.0 || gradient_cosine(jac, r) <= 1e-12) {
            converged = true;
            message = "stationary point";
            break;
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd grad = jac.transpose() * r;
        Eigen::VectorXd scale = jtj.diagonal();
        for (Eigen::Index j = 0; j < n; ++j)
            if (!(scale(j) > 0.0))
                scale(j) = 1.0;
        if (lambda < 0.0)
            lambda = 1e-3;

        bool accepted = false;
        Eigen::VectorXd step;
        double new_cost = cost;
        Eigen::VectorXd new_r;
        for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
            Eigen::MatrixXd lhs = jtj;
            lhs.diagonal() += lambda * scale;
            step = lhs.ldlt().solve(-grad);
            const Eigen::VectorXd trial = p + step;
            if (step.allFinite() && inside(trial, problem)) {
                new_r = problem.residuals(trial);
                new_cost = new_r.squaredNorm();
                if (std::isfinite(new_cost) && new_cost < cost) {
                    accepted = true;
                    break;
                }
            }
            lambda *= 4.0;
        }
        if (!accepted) {
            converged = gradient_cosine(jac, r) <= 1e-6;
            message = converged ? "no further decrease" : "damping exhausted away from a minimum";
            break;
        }

        const double improvement = cost - new_cost;
        p += step;
        r = new_r;
        cost = new_cost;
        result.residual_history.push_back(std::sqrt(cost));
        lambda = std::max(lambda / 3.0, 1e-12);

        if (improvement <= 1e-15 * (cost + improvement) ||
            step.norm() <= 1e-13 * (p.norm() + 1e-13)) {
            converged = true;
            message = "converged";
            ++iter;
            break;
        }
    }

    result.parameters = p;
    result.residual_norm = std::sqrt(cost);
    result.converged = converged;
    result.iterations = iter;
    result.message = message;

    const Eigen::MatrixXd jac = problem.jacobian(p);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::MatrixXd cov = jtj.completeOrthogonalDecomposition().pseudoInverse();
    cov = 0.5 * (cov + cov.transpose());
    const auto dof = r.size() - n;
    if (options.scale_covariance && dof > 0)
        cov *= cost / static_cast<double>(dof);
    result.covariance = cov;
    return result;
}

FitResult fit_fringe(const std::vector<WeightedPoint> &points, const FitOptions &options)
{
    if (points.size() < 5)
        throw InvalidInput("fringe fit needs at least 5 points");
    require_weights(points);
    double lo = points.front().x;
    double hi = points.front().x;
    for (const auto &p : points) {
        lo = std::min(lo, p.x);
        hi = std::max(hi, p.x);
    }
    const double span = hi - lo;
    if (span + span / static_cast<double>(points.size() - 1) < std::numbers::pi * (1.0 - 1e-9))
        throw InvalidInput("fringe fit data must span one period (pi)");

    const auto m = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd design(m, 3);
    Eigen::VectorXd rhs(m);
    Eigen::VectorXd sw(m);
    double scale = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto &pt = points[static_cast<size_t>(i)];
        sw(i) = std::sqrt(pt.weight);
        design(i, 0) = sw(i);
        design(i, 1) = sw(i) * std::cos(2.0 * pt.x);
        design(i, 2) = sw(i) * std::sin(2.0 * pt.x);
        rhs(i) = sw(i) * pt.y;
        scale = std::max(scale, std::abs(pt.y));
    }
    // Weighted harmonic-2 projection; exact optimum of the linear form.
    const Eigen::Vector3d lin = design.colPivHouseholderQr().solve(rhs);
    const double a0 = lin(0);
    double b0 = std::hypot(lin(1), lin(2));
    double d0 = std::atan2(-lin(2), lin(1));

    const std::vector<std::string> names{"A", "B", "delta"};
    const bool flat = b0 <= 1e-12 * std::max(scale, std::numeric_limits<double>::min());

    if (flat) {
        FitResult result;
        result.names = names;
        result.parameters = Eigen::Vector3d(a0, 0.0, 0.0);
        const Eigen::VectorXd r = design * Eigen::Vector3d(a0, 0.0, 0.0) - rhs;
        result.residual_norm = r.norm();
        result.residual_history = {result.residual_norm};
        Eigen::Matrix3d cov = (design.transpose() * design).inverse();
        const auto dof = m - 3;
        if (options.scale_covariance && dof > 0)
            cov *= r.squaredNorm() / static_cast<double>(dof);
        result.covariance = Eigen::Matrix3d::Zero();
        result.covariance(0, 0) = cov(0, 0);
        result.covariance(1, 1) = std::max(cov(1, 1), cov(2, 2));
        result.covariance(2, 2) = kNaN;
        result.converged = true;
        result.message = "flat data";
        result.flags.push_back("delta_undefined");
        result.derived["visibility"] = 0.0;
        result.derived["visibility_stderr"] =
            a0 != 0.0 ? std::sqrt(result.covariance(1, 1)) / std::abs(a0) : kNaN;
        return result;
    }

    LeastSquaresProblem problem;
    problem.residuals = [&](const Eigen::VectorXd &p) {
        Eigen::VectorXd r(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto &pt = points[static_cast<size_t>(i)];
            r(i) = sw(i) * (p(0) + p(1) * std::cos(2.0 * pt.x + p(2)) - pt.y);
        }
        return r;
    };
    problem.jacobian = [&](const Eigen::VectorXd &p) {
        Eigen::MatrixXd j(m, 3);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double arg = 2.0 * points[static_cast<size_t>(i)].x + p(2);
            j(i, 0) = sw(i);
            j(i, 1) = sw(i) * std::cos(arg);
            j(i, 2) = -sw(i) * p(1) * std::sin(arg);
        }
        return j;
    };

    FitResult result = levenberg_marquardt(problem, Eigen::Vector3d(a0, b0, d0), names, options);
    double &b = result.parameters(1);
    double &d = result.parameters(2);
    if (b < 0.0) {
        b = -b;
        d += std::numbers::pi;
        result.covariance.row(1) *= -1.0;
        result.covariance.col(1) *= -1.0;
    }
    d = wrap_angle(d);

    const double a = result.parameters(0);
    result.derived["visibility"] = b / a;
    const Eigen::Vector3d grad(-b / (a * a), 1.0 / a, 0.0);
    result.derived["visibility_stderr"] = std::sqrt(std::max(0.0, grad.dot(result.covariance * grad)));
    return result;
}

FitResult fit_visibility_vs_gain(const std::vector<WeightedPoint> &points, const FitOptions &options)
{
    if (points.empty())
        throw InvalidInput("visibility fit needs at least one point");
    require_weights(points);
    std::set<double> seen;
    for (const auto &p : points) {
        if (p.x < 0.0)
            throw InvalidInput("gain must be non-negative");
        if (!seen.insert(p.x).second)
            throw InvalidInput("gain values must be distinct");
    }

    double swff = 0.0;
    double swfv = 0.0;
    for (const auto &p : points) {
        const double f = visibility_closed_form(kG11, mean_photons(p.x));
        swff += p.weight * f * f;
        swfv += p.weight * f * p.y;
    }
    const double v_max = swfv / swff;
    double chi2 = 0.0;
    for (const auto &p : points) {
        const double f = visibility_closed_form(kG11, mean_photons(p.x));
        chi2 += p.weight * (p.y - v_max * f) * (p.y - v_max * f);
    }

    FitResult result;
    result.names = {"v_max"};
    result.parameters = Eigen::VectorXd::Constant(1, v_max);
    double var = 1.0 / swff;
    if (options.scale_covariance && points.size() > 1)
        var *= chi2 / static_cast<double>(points.size() - 1);
    result.covariance = Eigen::MatrixXd::Constant(1, 1, var);
    result.residual_norm = std::sqrt(chi2);
    result.residual_history = {result.residual_norm};
    result.converged = true;
    result.iterations = 1;
    result.message = "closed-form linear solution";
    return result;
}

FitResult fit_rate_vs_gain(const std::vector<WeightedPoint> &points, int order, const FitOptions &options)
{
    if (order != 2 && order != 3)
        throw InvalidInput("rate order must be 2 or 3");
    if (points.size() < 3)
        throw InvalidInput("rate fit needs at least 3 points");
    require_weights(points);
    for (const auto &p : points) {
        if (!(p.x > 0.0))
            throw InvalidInput("rate fit gains must be positive");
        if (!(p.y > 0.0))
            throw InvalidInput("rate fit values must be positive");
    }

    const auto m = static_cast<Eigen::Index>(points.size());
    LeastSquaresProblem problem;
    problem.residuals = [&](const Eigen::VectorXd &p) {
        Eigen::VectorXd r(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto &pt = points[static_cast<size_t>(i)];
            const double model = p(1) * rate_polynomial(order, mean_photons(p(0) * pt.x));
            r(i) = std::sqrt(pt.weight) * (std::log(model) - std::log(pt.y));
        }
        return r;
    };
    problem.jacobian = [&](const Eigen::VectorXd &p) {
        Eigen::MatrixXd j(m, 2);
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto &pt = points[static_cast<size_t>(i)];
            const double n = mean_photons(p(0) * pt.x);
            const double dn = pt.x * std::sinh(2.0 * p(0) * pt.x);
            const double sw = std::sqrt(pt.weight);
            j(i, 0) = sw * rate_polynomial_derivative(order, n) / rate_polynomial(order, n) * dn;
            j(i, 1) = sw / p(1);
        }
        return j;
    };
    problem.lower = Eigen::Vector2d(0.0, 0.0);
    problem.upper = Eigen::Vector2d(2.0, std::numeric_limits<double>::infinity());

    const auto lowest = std::min_element(points.begin(), points.end(),
                                         [](const auto &a, const auto &b) { return a.x < b.x; });
    const double sigma0 = lowest->y / rate_polynomial(order, mean_photons(lowest->x));
    return levenberg_marquardt(problem, Eigen::Vector2d(1.0, sigma0), {"alpha", "sigma"}, options);
}

} // namespace sqf
