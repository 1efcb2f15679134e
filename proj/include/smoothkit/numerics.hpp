#pragma once

#include <Eigen/Core>
#include <vector>

namespace smoothkit {

// Weighted least-squares solution together with the hat diagnostics every
// smoother in the library needs.
struct WlsSolution {
    Eigen::VectorXd beta;
    Eigen::VectorXd fitted;   // at the design rows
    Eigen::VectorXd hat_diag; // leverage h_ii of the induced linear smoother
    double rss = 0.0;         // weighted residual sum of squares
    // Inverse of the (possibly ridge-stabilized) normal matrix. Lets callers
    // form smoother weight vectors l(x) without re-factorizing.
    Eigen::MatrixXd normal_inv;
};

// Minimizes sum_i w_i (y_i - design_i . beta)^2 + ridge * |beta_penalized|^2
// by normal equations (symmetric eigendecomposition). The ridge applies only
// to columns flagged in `penalized`; an empty mask penalizes nothing. At
// least one weight must be strictly positive; negative weights are allowed
// (sign-indefinite kernels), though the hat-diagonal bounds only hold for
// nonnegative ones.
//
// Throws RankError when the normal matrix is singular to working precision
// (reciprocal condition < 1e-12) and ridge is 0.
WlsSolution wls_solve(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& w, double ridge = 0.0,
                      const std::vector<bool>& penalized = {});

// P(F_{df1,df2} <= f) via the regularized incomplete beta function.
double f_cdf(double f, double df1, double df2);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

// Standard normal quantile, rational approximation (|error| < 1.2e-8).
double normal_quantile(double p);

} // namespace smoothkit
