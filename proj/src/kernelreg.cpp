#include "smoothkit/kernelreg.hpp"

#include "smoothkit/errors.hpp"
#include "smoothkit/numerics.hpp"
#include "smoothkit/parallel.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace smoothkit {

namespace {

void check_grid(const Eigen::VectorXd& grid) {
    if (grid.size() == 0) throw SizeError("query grid is empty");
    for (Eigen::Index i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw DomainError("query grid must be strictly ascending");
}

FitCurve make_curve(Eigen::VectorXd grid, Eigen::VectorXd fit, Eigen::VectorXd l2sum,
                    double sigma2, std::optional<Eigen::VectorXd> deriv) {
    FitCurve c;
    c.grid = std::move(grid);
    c.fit = std::move(fit);
    c.se = (sigma2 * l2sum.array()).sqrt();
    c.lower = c.fit - 2.0 * c.se;
    c.upper = c.fit + 2.0 * c.se;
    c.deriv = std::move(deriv);
    c.validate();
    return c;
}

} // namespace

double smoother_sigma2(const Eigen::VectorXd& y, const Eigen::VectorXd& fitted, double trace) {
    double df_err = double(y.size()) - trace;
    if (df_err <= 0.0)
        throw DegeneracyError("smoother uses all degrees of freedom (trace " +
                              std::to_string(trace) + " >= n " + std::to_string(y.size()) + ")");
    return (y - fitted).squaredNorm() / df_err;
}

FitCurve nw_fit(const Dataset& data, const KernelSpec& kernel, double h,
                const Eigen::VectorXd& grid) {
    if (!(h > 0.0)) throw DomainError("nw_fit: bandwidth must be positive");
    check_grid(grid);
    const Eigen::VectorXd& x = data.x();
    const Eigen::VectorXd& y = data.y();
    const Eigen::Index n = data.n();

    auto local_average = [&](double q, Eigen::VectorXd* l_out) -> double {
        Eigen::VectorXd w = scaled_weights(kernel, q, x, h);
        double sw = w.sum();
        if (!(sw > 0.0))
            throw NeighborhoodError("nw_fit: no training point within bandwidth of x = " +
                                    format_double(q));
        if (l_out) *l_out = w / sw;
        return w.dot(y) / sw;
    };

    // Training pass for the band rule.
    Eigen::VectorXd fitted(n), l(n);
    double trace = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        fitted[i] = local_average(x[i], &l);
        trace += l[i];
    }
    double sigma2 = smoother_sigma2(y, fitted, trace);

    Eigen::VectorXd fit(grid.size()), l2sum(grid.size());
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
        fit[g] = local_average(grid[g], &l);
        l2sum[g] = l.squaredNorm();
    }
    return make_curve(grid, std::move(fit), std::move(l2sum), sigma2, std::nullopt);
}

LocalPolySmoother::LocalPolySmoother(const Dataset& data, const KernelSpec& kernel, int degree,
                                     double h)
    : x_(data.x()), y_(data.y()), kernel_(kernel), degree_(degree), h_(h) {
    if (degree_ < 0 || degree_ > 3)
        throw UsageError("local polynomial degree must be in 0..3, got " + std::to_string(degree_));
    if (!(h_ > 0.0)) throw DomainError("local polynomial bandwidth must be positive");

    const Eigen::Index n = x_.size();
    fitted_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Local loc = solve_at(x_[i]);
        fitted_[i] = loc.beta[0];
        trace_ += loc.l[i];
    }
}

LocalPolySmoother::Local LocalPolySmoother::solve_at(double q) const {
    Eigen::VectorXd w = scaled_weights(kernel_, q, x_, h_);
    Eigen::Index positive = 0;
    for (Eigen::Index i = 0; i < w.size(); ++i)
        if (w[i] > 0.0) ++positive;
    if (positive < degree_ + 1)
        throw NeighborhoodError("local polynomial fit at x = " + format_double(q) + " has only " +
                                std::to_string(positive) + " points with positive weight (needs " +
                                std::to_string(degree_ + 1) + ")");

    Eigen::MatrixXd design(x_.size(), degree_ + 1);
    design.col(0).setOnes();
    for (int j = 1; j <= degree_; ++j)
        design.col(j) = design.col(j - 1).cwiseProduct((x_.array() - q).matrix());

    WlsSolution sol = wls_solve(design, y_, w);
    Local loc;
    loc.beta = std::move(sol.beta);
    // l(x) = W X M^{-1} e0: the row weights reproducing beta[0] from y.
    Eigen::VectorXd me0 = sol.normal_inv.col(0);
    loc.l = w.cwiseProduct(design * me0);
    return loc;
}

Eigen::VectorXd LocalPolySmoother::weights(double x) const { return solve_at(x).l; }

Eigen::VectorXd LocalPolySmoother::local_coeffs(double x) const { return solve_at(x).beta; }

KernelFitResult localpoly_fit(const Dataset& data, const KernelRegSpec& spec,
                              const Eigen::VectorXd& grid) {
    check_grid(grid);

    double h = spec.bandwidth.value;
    switch (spec.bandwidth.mode) {
    case Bandwidth::Mode::value:
        if (!(h > 0.0)) throw DomainError("bandwidth must be positive");
        break;
    case Bandwidth::Mode::rot:
        h = bandwidth_rot(data);
        break;
    case Bandwidth::Mode::cv:
        h = bandwidth_cv(data, spec, default_bandwidth_grid(bandwidth_rot(data))).h_opt;
        break;
    }

    LocalPolySmoother smoother(data, spec.kernel, spec.degree, h);
    double sigma2 = smoother_sigma2(data.y(), smoother.fitted(), smoother.trace());

    const Eigen::Index m = grid.size();
    Eigen::VectorXd fit(m), l2sum(m);
    std::optional<Eigen::VectorXd> deriv;
    if (spec.degree >= 1) deriv = Eigen::VectorXd(m);
    for (Eigen::Index g = 0; g < m; ++g) {
        auto loc = smoother.solve_at(grid[g]);
        fit[g] = loc.beta[0];
        if (deriv) (*deriv)[g] = loc.beta[1];
        l2sum[g] = loc.l.squaredNorm();
    }

    KernelFitResult out{make_curve(grid, std::move(fit), std::move(l2sum), sigma2, std::move(deriv)),
                        std::move(smoother), h, sigma2};
    return out;
}

double bandwidth_rot(const Dataset& data) {
    const Eigen::VectorXd& x = data.x();
    const Eigen::Index n = x.size();
    double mean = x.mean();
    double var = (x.array() - mean).square().sum() / double(n - 1);
    if (!(var > 0.0)) throw DomainError("bandwidth_rot: covariate has zero variance");
    double sd = std::sqrt(var);
    return sd * std::pow(4.0 / (3.0 * double(n)), 0.2);
}

Eigen::VectorXd default_bandwidth_grid(double h_rot) {
    const int count = 30;
    Eigen::VectorXd grid(count);
    double lo = std::log(0.1 * h_rot), hi = std::log(10.0 * h_rot);
    for (int i = 0; i < count; ++i)
        grid[i] = std::exp(lo + (hi - lo) * double(i) / double(count - 1));
    return grid;
}

CvResult bandwidth_cv(const Dataset& data, const KernelRegSpec& spec,
                      const Eigen::VectorXd& candidates) {
    if (candidates.size() == 0) throw SelectionError("bandwidth_cv: no candidates");
    for (Eigen::Index c = 0; c < candidates.size(); ++c)
        if (!(candidates[c] > 0.0))
            throw DomainError("bandwidth_cv: candidates must be positive");

    const Eigen::VectorXd& x = data.x();
    const Eigen::VectorXd& y = data.y();
    const Eigen::Index n = data.n();
    const double inf = std::numeric_limits<double>::infinity();

    CvResult out;
    out.scores = Eigen::VectorXd::Constant(candidates.size(), inf);

    parallel_for(static_cast<std::size_t>(candidates.size()), [&](std::size_t c) {
        double h = candidates[static_cast<Eigen::Index>(c)];
        double score = 0.0;
        try {
            for (Eigen::Index i = 0; i < n && std::isfinite(score); ++i) {
                // Zeroing the deleted point's weight is algebraically the
                // delete-one refit at x_i.
                Eigen::VectorXd w = scaled_weights(spec.kernel, x[i], x, h);
                w[i] = 0.0;
                Eigen::Index positive = 0;
                for (Eigen::Index j = 0; j < n; ++j)
                    if (w[j] > 0.0) ++positive;
                if (positive < spec.degree + 1) {
                    score = inf;
                    break;
                }
                Eigen::MatrixXd design(n, spec.degree + 1);
                design.col(0).setOnes();
                for (int j = 1; j <= spec.degree; ++j)
                    design.col(j) = design.col(j - 1).cwiseProduct((x.array() - x[i]).matrix());
                WlsSolution sol = wls_solve(design, y, w);
                double resid = y[i] - sol.beta[0];
                score += resid * resid;
            }
        } catch (const std::exception&) {
            score = inf; // infeasible candidate, not an error
        }
        out.scores[static_cast<Eigen::Index>(c)] = score;
    });

    // Ties break toward the smaller bandwidth; scores below the floating-
    // point resolution of the response scale count as tied at zero.
    double floor = 1e-24 * (1.0 + y.squaredNorm() / double(n));
    double best = inf, best_h = 0.0;
    bool found = false;
    for (Eigen::Index c = 0; c < candidates.size(); ++c) {
        double s = std::max(out.scores[c], floor), h = candidates[c];
        if (!std::isfinite(s)) continue;
        bool tie = found && std::abs(s - best) <= 1e-12 * std::max(std::abs(s), std::abs(best));
        if (!found || (!tie && s < best) || (tie && h < best_h)) {
            best = s;
            best_h = h;
            found = true;
        }
    }
    if (!found) throw SelectionError("bandwidth_cv: every candidate bandwidth is infeasible");
    out.h_opt = best_h;
    return out;
}

} // namespace smoothkit
