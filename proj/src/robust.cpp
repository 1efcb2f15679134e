#include "smoothkit/robust.hpp"

#include "smoothkit/errors.hpp"
#include "smoothkit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace smoothkit {

ScaleMethod scale_from_name(const std::string& name) {
    if (name == "mad") return ScaleMethod::mad;
    if (name == "iqr") return ScaleMethod::iqr;
    throw UsageError("unknown scale estimator '" + name + "' (expected mad or iqr)");
}

std::string scale_name(ScaleMethod m) { return m == ScaleMethod::mad ? "mad" : "iqr"; }

double huber_weight(double r_scaled, double c) {
    if (!(c > 0.0)) throw DomainError("huber_weight: tuning constant must be positive");
    double a = std::abs(r_scaled);
    return a <= c ? 1.0 : c / a;
}

namespace {

double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    double pos = q * double(v.size() - 1);
    auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= v.size()) return v.back();
    double frac = pos - double(lo);
    return v[lo] * (1.0 - frac) + v[lo + 1] * frac;
}

} // namespace

double robust_scale(const Eigen::VectorXd& residuals, ScaleMethod method) {
    if (residuals.size() < 2) throw SizeError("robust_scale: need at least 2 residuals");
    std::vector<double> r(residuals.begin(), residuals.end());
    double s;
    if (method == ScaleMethod::mad) {
        double med = quantile(r, 0.5);
        std::vector<double> dev(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) dev[i] = std::abs(r[i] - med);
        s = quantile(dev, 0.5) / 0.6745;
    } else {
        s = (quantile(r, 0.75) - quantile(r, 0.25)) / 1.349;
    }
    if (!(s > 0.0)) throw DegeneracyError("robust_scale: residual scale is zero");
    return s;
}

namespace {

struct LocalLinearPass {
    Eigen::VectorXd fitted;
    Eigen::VectorXd deriv;
    Eigen::VectorXd self_weight; // l_i(x_i)
    Eigen::VectorXd l2sum;       // sum_j l_j(x_i)^2
};

// One weighted local-linear sweep over all targets x_i with combined
// weights: kernel weights normalized to sum 1, times delta.
LocalLinearPass sweep(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      const KernelSpec& kernel, double h, const Eigen::VectorXd& delta) {
    const Eigen::Index n = x.size();
    LocalLinearPass out;
    out.fitted.resize(n);
    out.deriv.resize(n);
    out.self_weight.resize(n);
    out.l2sum.resize(n);

    parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
        const Eigen::Index i = static_cast<Eigen::Index>(ii);
        Eigen::VectorXd kw = scaled_weights(kernel, x[i], x, h);
        double ksum = kw.sum();
        if (!(ksum > 0.0))
            throw NeighborhoodError("robust_fit: no training point within bandwidth of x = " +
                                    format_double(x[i]));
        kw /= ksum;
        Eigen::VectorXd w = kw.cwiseProduct(delta);
        double sw = w.sum();
        double wxbar = w.dot(x) / sw;
        Eigen::VectorXd xc = x.array() - wxbar;
        double wssx = w.dot(xc.cwiseProduct(xc));
        if (!(wssx > 0.0))
            throw NeighborhoodError("robust_fit: no local spread around x = " + format_double(x[i]));

        // closed-form local-linear weight vector at the target
        Eigen::VectorXd l = w / sw + ((x[i] - wxbar) / wssx) * w.cwiseProduct(xc);
        out.fitted[i] = l.dot(y);
        out.deriv[i] = w.cwiseProduct(xc).dot(y) / wssx;
        out.self_weight[i] = l[i];
        out.l2sum[i] = l.squaredNorm();
    });
    return out;
}

} // namespace

RobustFit robust_fit(const Dataset& data, const RobustConfig& config) {
    if (!(config.c > 0.0)) throw DomainError("robust_fit: tuning constant must be positive");
    if (config.max_iter < 1) throw DomainError("robust_fit: max_iter must be at least 1");
    if (!(config.bandwidth > 0.0)) throw DomainError("robust_fit: bandwidth must be positive");

    const Eigen::VectorXd& x = data.x();
    const Eigen::VectorXd& y = data.y();
    const Eigen::Index n = data.n();

    RobustFit fit;
    Eigen::VectorXd delta = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd delta_used = delta; // weights that produced the final curve
    LocalLinearPass pass;

    for (int iter = 1; iter <= config.max_iter; ++iter) {
        delta_used = delta;
        pass = sweep(x, y, config.kernel, config.bandwidth, delta);
        fit.iterations = iter;

        Eigen::VectorXd resid = y - pass.fitted;
        double s;
        try {
            s = robust_scale(resid, config.scale);
        } catch (const DegeneracyError&) {
            fit.scale_degenerate = true;
            fit.rescaled_residuals = Eigen::VectorXd::Zero(n);
            fit.robust_weights = delta;
            break;
        }
        fit.scale_est = s;
        fit.rescaled_residuals = resid / s;

        Eigen::VectorXd next(n);
        for (Eigen::Index j = 0; j < n; ++j)
            next[j] = huber_weight(fit.rescaled_residuals[j], config.c);
        fit.robust_weights = next;

        if ((next - delta).lpNorm<Eigen::Infinity>() < 1e-8) break;
        delta = next;
    }

    fit.fitted = pass.fitted;
    fit.edf = pass.self_weight.sum();

    double df_err = delta_used.sum() - pass.self_weight.sum();
    if (df_err <= 0.0)
        throw DegeneracyError("robust_fit: error degrees of freedom exhausted (bandwidth too small)");
    double sigma2 = delta_used.dot((y - pass.fitted).cwiseAbs2()) / df_err;

    // Curve on the distinct training x, ascending; duplicate x values share
    // the same target fit, keep the first.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return x[a] < x[b]; });
    std::vector<Eigen::Index> keep;
    keep.reserve(order.size());
    for (Eigen::Index idx : order)
        if (keep.empty() || x[idx] > x[keep.back()]) keep.push_back(idx);

    const Eigen::Index m = static_cast<Eigen::Index>(keep.size());
    FitCurve curve;
    curve.grid.resize(m);
    curve.fit.resize(m);
    curve.se.resize(m);
    Eigen::VectorXd deriv(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        Eigen::Index i = keep[static_cast<std::size_t>(k)];
        curve.grid[k] = x[i];
        curve.fit[k] = pass.fitted[i];
        curve.se[k] = std::sqrt(std::max(0.0, sigma2 * pass.l2sum[i]));
        deriv[k] = pass.deriv[i];
    }
    curve.lower = curve.fit - 2.0 * curve.se;
    curve.upper = curve.fit + 2.0 * curve.se;
    curve.deriv = std::move(deriv);
    curve.validate();
    fit.curve = std::move(curve);
    return fit;
}

} // namespace smoothkit
