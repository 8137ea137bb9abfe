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

#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sqf {

struct FitResult {
    std::vector<std::string> names;
    Eigen::VectorXd parameters;
    Eigen::MatrixXd covariance;
    double residual_norm = 0.0; // sqrt of the weighted sum of squared residuals
    bool converged = false;
    int iterations = 0;
    std::string message;
    std::vector<double> residual_history; // one entry per accepted step, starting at the initial point
    std::map<std::string, double> derived;
    std::vector<std::string> flags;

    double value(const std::string &name) const;
    double stderr_of(const std::string &name) const;
    bool has_flag(const std::string &flag) const;
};

struct FitOptions {
    int max_iterations = 100;
    /// Treat weights as relative and rescale the covariance by chi^2 / dof.
    bool scale_covariance = false;
};

/// (x, y, weight); weights act as inverse variances.
struct WeightedPoint {
    double x = 0.0;
    double y = 0.0;
    double weight = 1.0;
};

/**
 * Damped Gauss-Newton (Levenberg-Marquardt) on weighted residuals.
 *
 * residuals(p) returns r_i (already weighted), jacobian(p) returns dr_i/dp_j.
 * Steps leaving [lower, upper] are rejected like cost-increasing ones.
 */
struct LeastSquaresProblem {
    std::function<Eigen::VectorXd(const Eigen::VectorXd &)> residuals;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd &)> jacobian;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

FitResult levenberg_marquardt(const LeastSquaresProblem &problem, const Eigen::VectorXd &start,
                              const std::vector<std::string> &names, const FitOptions &options);

/**
 * Fits value = A + B cos(2 phi + delta).
 *
 * Starts from the weighted harmonic-2 projection, then refines. B >= 0 with
 * its sign absorbed into delta in (-pi, pi]. derived["visibility"] = B / A
 * with first-order uncertainty derived["visibility_stderr"]. Flat data give
 * B = 0 and the flag "delta_undefined".
 */
FitResult fit_fringe(const std::vector<WeightedPoint> &points, const FitOptions &options = {});

/// Linear fit of V = v_max * (n+1)/(5n+1) with n = sinh^2 g.
FitResult fit_visibility_vs_gain(const std::vector<WeightedPoint> &points,
                                 const FitOptions &options = {});

/**
 * Fits rate = excitation_rate(order, sinh^2(alpha g), sigma) on log residuals.
 * Bounds: alpha in (0, 2], sigma > 0. Parameters are reported as (alpha, sigma).
 */
FitResult fit_rate_vs_gain(const std::vector<WeightedPoint> &points, int order,
                           const FitOptions &options = {});

} // namespace sqf
