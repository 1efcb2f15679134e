#pragma once

#include "smoothkit/dataset.hpp"

#include <Eigen/Core>
#include <optional>

namespace smoothkit {

// Penalty request mirroring Bandwidth: a value or GCV selection.
struct Penalty {
    enum class Mode { value, gcv };
    Mode mode = Mode::gcv;
    double value = 0.0;

    static Penalty fixed(double lambda) { return {Mode::value, lambda}; }
    static Penalty auto_gcv() { return {Mode::gcv, 0.0}; }
};

struct SplineSpec {
    int degree = 3;     // power-series order, 1..3
    int num_knots = 10; // ignored when explicit knots are given
    Penalty lambda{};
    std::optional<Eigen::VectorXd> knots; // strictly ascending, inside (min x, max x)
};

struct SplineFit {
    Eigen::VectorXd coeffs; // beta_0..beta_p then one per knot
    double lambda = 0.0;
    double edf = 0.0; // trace of the smoother matrix
    double gcv = 0.0; // score at the chosen lambda
    Eigen::VectorXd knots;
    int degree = 3;
};

// Interior knots at quantiles c/(C+1), c = 1..C, of the unique x values
// (linear interpolation of order statistics). Throws KnotError when
// quantiles collapse.
Eigen::VectorXd spline_knots(const Eigen::VectorXd& x, int num_knots);

// Truncated power basis [1, x, ..., x^p, (x-t_1)_+^p, ..., (x-t_C)_+^p].
Eigen::MatrixXd spline_basis(const Eigen::VectorXd& x, int degree, const Eigen::VectorXd& knots);
Eigen::MatrixXd spline_basis(const Eigen::VectorXd& x, const SplineSpec& spec);

// Value of the fitted spline or one of its derivatives at x.
double spline_eval(const Eigen::VectorXd& coeffs, int degree, const Eigen::VectorXd& knots,
                   double x, int deriv_order = 0);

struct SplineResult {
    FitCurve curve;
    SplineFit fit;
};

// Penalized fit: least squares plus lambda * sum of squared knot
// coefficients (polynomial part unpenalized). Bands by the shared band rule.
SplineResult spline_fit(const Dataset& data, const SplineSpec& spec, const Eigen::VectorXd& grid);

struct GcvResult {
    double lambda_opt = 0.0;
    Eigen::VectorXd scores;
};

// GCV(lambda) = (RSS/n) / (1 - trace/n)^2 over the candidates; ties break
// toward the larger lambda.
GcvResult lambda_gcv(const Dataset& data, const SplineSpec& spec, const Eigen::VectorXd& candidates);

// 40 log-spaced candidates in [1e-4, 1e6].
Eigen::VectorXd default_lambda_grid();

} // namespace smoothkit
