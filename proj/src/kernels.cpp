#include "smoothkit/kernels.hpp"

#include "smoothkit/errors.hpp"

#include <cmath>

namespace smoothkit {

namespace {
constexpr double inv_sqrt_2pi = 0.39894228040143267794; // 1/sqrt(2*pi)
} // namespace

double kernel_eval(const KernelSpec& spec, double d) {
    switch (spec.type) {
    case Kernel::epanechnikov:
        return std::abs(d) < 1.0 ? 0.75 * (1.0 - d * d) : 0.0;
    case Kernel::minvar:
        // Note: negative on 0.6 < d^2 < 1; kept in the catalogue but not a
        // probability weight there.
        return std::abs(d) < 1.0 ? 0.375 * (3.0 - 5.0 * d * d) : 0.0;
    case Kernel::gaussian:
        return inv_sqrt_2pi * std::exp(-0.5 * d * d);
    case Kernel::tricube: {
        double a = std::abs(d);
        if (a >= 1.0) return 0.0;
        double u = 1.0 - a * a * a;
        return u * u * u;
    }
    }
    return 0.0;
}

Eigen::VectorXd scaled_weights(const KernelSpec& spec, double center,
                               const Eigen::VectorXd& points, double h) {
    if (!(h > 0.0)) throw DomainError("scaled_weights: bandwidth must be positive, got " + std::to_string(h));
    if (points.size() == 0) throw SizeError("scaled_weights: empty point set");
    Eigen::VectorXd w(points.size());
    for (Eigen::Index i = 0; i < points.size(); ++i)
        w[i] = kernel_eval(spec, (center - points[i]) / h);
    return w;
}

KernelSpec kernel_from_name(const std::string& name) {
    if (name == "epanechnikov") return {Kernel::epanechnikov};
    if (name == "minvar") return {Kernel::minvar};
    if (name == "gaussian") return {Kernel::gaussian};
    if (name == "tricube") return {Kernel::tricube};
    throw UsageError("unknown kernel '" + name +
                     "' (expected epanechnikov, minvar, gaussian, or tricube)");
}

std::string kernel_name(const KernelSpec& spec) {
    switch (spec.type) {
    case Kernel::epanechnikov: return "epanechnikov";
    case Kernel::minvar: return "minvar";
    case Kernel::gaussian: return "gaussian";
    case Kernel::tricube: return "tricube";
    }
    return "?";
}

} // namespace smoothkit
