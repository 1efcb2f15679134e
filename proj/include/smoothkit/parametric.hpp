#pragma once

#include "smoothkit/dataset.hpp"

#include <Eigen/Core>

namespace smoothkit {

// Ordinary polynomial regression fit with the overall F-test.
struct PolyFit {
    int degree = 1;
    Eigen::VectorXd coeffs; // beta_0 .. beta_degree on the raw x scale
    double r_squared = 0.0;
    double f_stat = 0.0;
    double p_value = 1.0;
    Eigen::VectorXd residuals;
    Eigen::VectorXd fitted;
    double rss = 0.0;
    Eigen::VectorXd hat_diag;

    Eigen::Index n() const { return fitted.size(); }
    double predict(double x) const; // raw-scale polynomial evaluation
};

// OLS fit of y on (1, x, ..., x^degree), degree in 1..8. The basis is
// centered and scaled internally; reported coefficients are raw-scale.
PolyFit fit_poly(const Dataset& data, int degree);

struct FTest {
    double f_stat;
    double p_value;
};

// Partial F-test of a lower-degree fit nested in a higher-degree one.
FTest anova_nested(const PolyFit& small_fit, const PolyFit& big_fit, Eigen::Index n);

// Per-observation residual diagnostics: the data behind residual-vs-fitted
// and normal Q-Q plots. qq_theoretical[i] is the normal quantile at rank
// probability (i+0.5)/n and qq_sample[i] the i-th smallest standardized
// residual.
struct DiagnosticTable {
    Eigen::VectorXd fitted;
    Eigen::VectorXd resid;
    Eigen::VectorXd std_resid;
    Eigen::VectorXd qq_theoretical;
    Eigen::VectorXd qq_sample;
};

DiagnosticTable diagnostics(const PolyFit& fit);

void emit_diagnostics(const DiagnosticTable& table, const std::string& path);

} // namespace smoothkit
