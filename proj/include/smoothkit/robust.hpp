#pragma once

#include "smoothkit/dataset.hpp"
#include "smoothkit/kernels.hpp"

#include <Eigen/Core>

namespace smoothkit {

enum class ScaleMethod { mad, iqr };

ScaleMethod scale_from_name(const std::string& name);
std::string scale_name(ScaleMethod m);

struct RobustConfig {
    double c = 1.345;  // Huber tuning constant
    int max_iter = 8;  // reweighting iterations
    double bandwidth = 0.0;
    ScaleMethod scale = ScaleMethod::mad;
    KernelSpec kernel{Kernel::gaussian};
};

// Huber psi(r)/r: 1 inside the threshold, c/|r| outside.
double huber_weight(double r_scaled, double c);

// Normal-consistent robust residual scale. mad: median(|r - median|)/0.6745;
// iqr: (Q3 - Q1)/1.349. Quantiles by linear interpolation of order
// statistics. Throws DegeneracyError when the scale is zero.
double robust_scale(const Eigen::VectorXd& residuals, ScaleMethod method);

struct RobustFit {
    FitCurve curve; // at the distinct training x values, ascending
    Eigen::VectorXd robust_weights;      // final Huber weights per observation
    double scale_est = 0.0;              // last scale estimate
    int iterations = 0;                  // reweighting passes actually run
    bool scale_degenerate = false;       // stopped early on zero residual scale
    double edf = 0.0;                    // sum of self-weights l_i(x_i), final pass
    Eigen::VectorXd fitted;              // per observation, final pass
    Eigen::VectorXd rescaled_residuals;  // per observation, final pass
};

// Iteratively reweighted local-linear smoothing: kernel weights (normalized
// to sum 1 at each target) times Huber weights of the rescaled residuals,
// repeated max_iter times or until the weights stop changing. Bands use
// df_err = sum(delta) - sum_i l_i(x_i) and t = 2.
RobustFit robust_fit(const Dataset& data, const RobustConfig& config);

} // namespace smoothkit
