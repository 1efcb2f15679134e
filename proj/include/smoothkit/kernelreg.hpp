#pragma once

#include "smoothkit/dataset.hpp"
#include "smoothkit/kernels.hpp"

#include <Eigen/Core>

namespace smoothkit {

// Bandwidth request: a concrete value or one of the data-driven selectors.
struct Bandwidth {
    enum class Mode { value, cv, rot };
    Mode mode = Mode::rot;
    double value = 0.0;

    static Bandwidth fixed(double h) { return {Mode::value, h}; }
    static Bandwidth auto_cv() { return {Mode::cv, 0.0}; }
    static Bandwidth auto_rot() { return {Mode::rot, 0.0}; }
};

struct KernelRegSpec {
    KernelSpec kernel{Kernel::gaussian};
    int degree = 1; // local polynomial order, 0..3
    Bandwidth bandwidth{};
};

struct KernelFitResult;

// Local polynomial fit as a linear smoother: for any query x the fitted
// value is l(x).y for a weight vector l(x) with sum 1. Construction runs the
// training pass (fitted values and trace of the smoother matrix).
class LocalPolySmoother {
public:
    LocalPolySmoother(const Dataset& data, const KernelSpec& kernel, int degree, double h);

    // l(x): one weight per training point.
    Eigen::VectorXd weights(double x) const;

    // beta of the local fit at x: beta[0] is the estimate, beta[1] (when
    // degree >= 1) the first-derivative estimate.
    Eigen::VectorXd local_coeffs(double x) const;

    double trace() const { return trace_; }
    const Eigen::VectorXd& fitted() const { return fitted_; }
    const Eigen::VectorXd& x() const { return x_; }
    const Eigen::VectorXd& y() const { return y_; }
    int degree() const { return degree_; }
    double bandwidth() const { return h_; }

private:
    Eigen::VectorXd x_;
    Eigen::VectorXd y_;
    KernelSpec kernel_;
    int degree_;
    double h_;
    Eigen::VectorXd fitted_;
    double trace_ = 0.0;

    struct Local {
        Eigen::VectorXd l;
        Eigen::VectorXd beta;
    };
    Local solve_at(double x) const;

    friend struct KernelFitResult;
    friend KernelFitResult localpoly_fit(const Dataset&, const KernelRegSpec&,
                                         const Eigen::VectorXd&);
};

struct KernelFitResult {
    FitCurve curve;
    LocalPolySmoother smoother;
    double h = 0.0;      // bandwidth actually used
    double sigma2 = 0.0; // residual variance behind the bands
};

// Nadaraya-Watson estimate (kernel-weighted average) on the given grid with
// band-rule standard errors. Grid must be strictly ascending.
FitCurve nw_fit(const Dataset& data, const KernelSpec& kernel, double h,
                const Eigen::VectorXd& grid);

// Local polynomial regression on the grid; resolves cv/rot bandwidth
// requests first. Degree 0 reproduces nw_fit.
KernelFitResult localpoly_fit(const Dataset& data, const KernelRegSpec& spec,
                              const Eigen::VectorXd& grid);

// Rule-of-thumb bandwidth (4 sd(x)^5 / (3n))^(1/5).
double bandwidth_rot(const Dataset& data);

struct CvResult {
    double h_opt = 0.0;
    Eigen::VectorXd scores; // aligned with the candidate list; +inf = infeasible
};

// Exact leave-one-out cross-validation over candidate bandwidths: each score
// refits at every x_i with point i removed. Ties break toward smaller h.
CvResult bandwidth_cv(const Dataset& data, const KernelRegSpec& spec,
                      const Eigen::VectorXd& candidates);

// 30 log-spaced candidates in [0.1 h_rot, 10 h_rot].
Eigen::VectorXd default_bandwidth_grid(double h_rot);

// Residual variance of a linear smoother: rss / (n - trace). Throws
// DegeneracyError when no residual degrees of freedom remain.
double smoother_sigma2(const Eigen::VectorXd& y, const Eigen::VectorXd& fitted, double trace);

} // namespace smoothkit
