#pragma once

#include "smoothkit/dataset.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <optional>

namespace smoothkit {

struct SimOptions {
    int restarts = 20;        // random starts beyond the OLS direction
    std::uint64_t seed = 1;   // seeds the random starts
    int nm_max_iter = 500;    // Nelder-Mead iteration cap per start
    double nm_tol = 1e-6;     // simplex diameter at convergence
};

struct IndexFit {
    Eigen::VectorXd beta; // unit norm, first nonzero coordinate positive
    FitCurve link;        // fitted link over the index range
    Eigen::VectorXd index_values;
    Eigen::VectorXd fitted;
    double r_squared = 0.0;
    double h_link = 0.0;    // bandwidth of the final link fit
    double link_edf = 0.0;  // trace of the final link smoother
    double objective = 0.0; // leave-one-out criterion at the minimizer
};

// Semiparametric least squares for Y = f(X beta) + e: minimizes the
// leave-one-out local-linear criterion over unit-norm directions
// (Nelder-Mead on a sphere chart, OLS start plus random restarts), then
// refits the link at a cross-validated bandwidth.
IndexFit sim_fit(const Dataset& data, std::optional<Eigen::VectorXd> init = std::nullopt,
                 const SimOptions& opts = {});

// Linear interpolation of the link at xnew . beta.
double sim_predict(const IndexFit& fit, const Eigen::RowVectorXd& xnew);

} // namespace smoothkit
