#pragma once

#include "smoothkit/dataset.hpp"
#include "smoothkit/kernelreg.hpp"
#include "smoothkit/splinereg.hpp"

#include <Eigen/Core>
#include <string>
#include <vector>

namespace smoothkit {

enum class SmootherKind { spline, kernel };

// Per-term smoother configuration; only one of the two specs is read.
struct SmootherChoice {
    SmootherKind kind = SmootherKind::spline;
    SplineSpec spline{};
    KernelRegSpec kernel{};
};

struct TermSpec {
    std::string name;
    bool smooth = false;
    SmootherChoice smoother{};
};

struct AdditiveSpec {
    std::vector<TermSpec> terms;
    int max_iter = 50;
    // Convergence tolerance on the max absolute change of any component;
    // nonpositive means 1e-6 * sd(y).
    double tol = -1.0;
};

struct AdditiveComponent {
    std::string name;
    Eigen::Index column = 0;
    FitCurve curve;             // centered component on the distinct x values
    double smoothing = 0.0;     // lambda (spline) or bandwidth (kernel) used
    double edf = 0.0;           // trace of the term's smoother, final pass
    Eigen::VectorXd values;     // centered component at the training rows
};

struct AdditiveFit {
    double intercept = 0.0;
    Eigen::VectorXd linear_coeffs;
    std::vector<std::string> linear_names;
    std::vector<Eigen::Index> linear_columns;
    std::vector<AdditiveComponent> components;
    int iterations = 0;
    bool converged = false;
    Eigen::VectorXd fitted; // training rows
};

// Gauss-Seidel backfitting: the linear block by OLS on partial residuals,
// each smooth term by its smoother on its partial residuals, mean-centered
// with the mean absorbed into the intercept. Non-convergence is reported in
// the flag, not thrown.
AdditiveFit backfit(const Dataset& data, const AdditiveSpec& spec);

// intercept + linear part + linearly interpolated smooth components.
// Throws ExtrapolationError when a smooth covariate leaves its training range.
double predict_additive(const AdditiveFit& fit, const Eigen::RowVectorXd& xnew);

} // namespace smoothkit
