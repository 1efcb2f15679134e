#pragma once

#include <Eigen/Core>
#include <string>

namespace smoothkit {

enum class Kernel { epanechnikov, minvar, gaussian, tricube };

// A named symmetric weight function. Compact kernels live on |d| < 1 and
// return 0 outside; the gaussian has unbounded support.
struct KernelSpec {
    Kernel type = Kernel::gaussian;

    bool compact() const { return type != Kernel::gaussian; }
};

// K(d) at a scaled distance d. Total on finite inputs.
double kernel_eval(const KernelSpec& spec, double d);

// K((center - x_i)/h) for every point, unnormalized. Requires h > 0.
Eigen::VectorXd scaled_weights(const KernelSpec& spec, double center,
                               const Eigen::VectorXd& points, double h);

// Name <-> spec mapping used by CLI flags and JSON summaries.
KernelSpec kernel_from_name(const std::string& name);
std::string kernel_name(const KernelSpec& spec);

} // namespace smoothkit
