#include "smoothkit/splinereg.hpp"

#include "smoothkit/errors.hpp"
#include "smoothkit/kernelreg.hpp" // smoother_sigma2
#include "smoothkit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace smoothkit {

namespace {

void check_spec(const SplineSpec& spec) {
    if (spec.degree < 1 || spec.degree > 3)
        throw UsageError("spline degree must be in 1..3, got " + std::to_string(spec.degree));
    if (spec.num_knots < 0)
        throw UsageError("knot count must be nonnegative");
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    double pos = q * double(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    double frac = pos - double(lo);
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

} // namespace

Eigen::VectorXd spline_knots(const Eigen::VectorXd& x, int num_knots) {
    if (num_knots == 0) return Eigen::VectorXd();
    std::vector<double> u(x.begin(), x.end());
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    if (u.size() < 2) throw KnotError("cannot place knots: covariate is constant");
    if (static_cast<std::size_t>(num_knots) > u.size() - 1)
        throw KnotError("only " + std::to_string(u.size()) +
                        " distinct covariate values; use fewer knots");

    Eigen::VectorXd knots(num_knots);
    for (int c = 1; c <= num_knots; ++c)
        knots[c - 1] = quantile_sorted(u, double(c) / double(num_knots + 1));
    for (int c = 1; c < num_knots; ++c)
        if (!(knots[c] > knots[c - 1]))
            throw KnotError("knot quantiles collapse (duplicate x values); use fewer knots");
    if (!(knots[0] > u.front()) || !(knots[num_knots - 1] < u.back()))
        throw KnotError("knots fall on the data boundary; use fewer knots");
    return knots;
}

Eigen::MatrixXd spline_basis(const Eigen::VectorXd& x, int degree, const Eigen::VectorXd& knots) {
    const Eigen::Index n = x.size();
    const Eigen::Index c = knots.size();
    Eigen::MatrixXd b(n, degree + 1 + c);
    b.col(0).setOnes();
    for (int j = 1; j <= degree; ++j) b.col(j) = b.col(j - 1).cwiseProduct(x);
    for (Eigen::Index m = 0; m < c; ++m) {
        for (Eigen::Index i = 0; i < n; ++i) {
            double d = x[i] - knots[m];
            b(i, degree + 1 + m) = d > 0.0 ? std::pow(d, degree) : 0.0;
        }
    }
    return b;
}

Eigen::MatrixXd spline_basis(const Eigen::VectorXd& x, const SplineSpec& spec) {
    check_spec(spec);
    Eigen::VectorXd knots = spec.knots ? *spec.knots : spline_knots(x, spec.num_knots);
    return spline_basis(x, spec.degree, knots);
}

double spline_eval(const Eigen::VectorXd& coeffs, int degree, const Eigen::VectorXd& knots,
                   double x, int deriv_order) {
    if (deriv_order < 0) throw UsageError("derivative order must be nonnegative");
    double acc = 0.0;
    // polynomial part: d^o/dx^o x^j = j!/(j-o)! x^(j-o)
    for (int j = deriv_order; j <= degree; ++j) {
        double fac = 1.0;
        for (int m = 0; m < deriv_order; ++m) fac *= double(j - m);
        acc += coeffs[j] * fac * std::pow(x, double(j - deriv_order));
    }
    if (deriv_order <= degree) {
        double fac = 1.0;
        for (int m = 0; m < deriv_order; ++m) fac *= double(degree - m);
        for (Eigen::Index c = 0; c < knots.size(); ++c) {
            double d = x - knots[c];
            if (d > 0.0) acc += coeffs[degree + 1 + c] * fac * std::pow(d, double(degree - deriv_order));
        }
    }
    return acc;
}

namespace {

struct SolvedSpline {
    Eigen::VectorXd coeffs;
    double rss = 0.0;
    double trace = 0.0;
    Eigen::MatrixXd normal_inv;
    Eigen::MatrixXd basis;
};

SolvedSpline solve_spline(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int degree,
                          const Eigen::VectorXd& knots, double lambda) {
    Eigen::MatrixXd b = spline_basis(x, degree, knots);
    std::vector<bool> penalized(static_cast<std::size_t>(b.cols()), false);
    for (Eigen::Index c = 0; c < knots.size(); ++c)
        penalized[static_cast<std::size_t>(degree + 1 + c)] = true;
    WlsSolution sol = wls_solve(b, y, Eigen::VectorXd::Ones(x.size()), lambda, penalized);

    SolvedSpline out;
    out.coeffs = std::move(sol.beta);
    out.rss = (y - sol.fitted).squaredNorm();
    out.trace = sol.hat_diag.sum();
    out.normal_inv = std::move(sol.normal_inv);
    out.basis = std::move(b);
    return out;
}

double gcv_score(double rss, double trace, double n) {
    double denom = 1.0 - trace / n;
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    return (rss / n) / (denom * denom);
}

} // namespace

GcvResult lambda_gcv(const Dataset& data, const SplineSpec& spec,
                     const Eigen::VectorXd& candidates) {
    check_spec(spec);
    if (candidates.size() == 0) throw SelectionError("lambda_gcv: no candidates");
    for (Eigen::Index i = 0; i < candidates.size(); ++i)
        if (candidates[i] < 0.0) throw DomainError("lambda_gcv: candidates must be nonnegative");

    const Eigen::VectorXd& x = data.x();
    Eigen::VectorXd knots = spec.knots ? *spec.knots : spline_knots(x, spec.num_knots);

    GcvResult out;
    out.scores.resize(candidates.size());
    const double inf = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < candidates.size(); ++i) {
        try {
            SolvedSpline s = solve_spline(x, data.y(), spec.degree, knots, candidates[i]);
            out.scores[i] = gcv_score(s.rss, s.trace, double(data.n()));
        } catch (const std::exception&) {
            out.scores[i] = inf;
        }
    }

    // Ties break toward the larger lambda. Scores below the floating-point
    // resolution of the response scale count as tied at zero.
    double floor = 1e-24 * (1.0 + data.y().squaredNorm() / double(data.n()));
    bool found = false;
    double best = inf, best_l = 0.0;
    for (Eigen::Index i = 0; i < candidates.size(); ++i) {
        double s = std::max(out.scores[i], floor), l = candidates[i];
        if (!std::isfinite(s)) continue;
        bool tie = found && std::abs(s - best) <= 1e-12 * std::max(std::abs(s), std::abs(best));
        if (!found || (!tie && s < best) || (tie && l > best_l)) {
            best = s;
            best_l = l;
            found = true;
        }
    }
    if (!found)
        throw SelectionError("lambda_gcv: smoother exhausts the degrees of freedom at every candidate");
    out.lambda_opt = best_l;
    return out;
}

Eigen::VectorXd default_lambda_grid() {
    const int count = 40;
    Eigen::VectorXd grid(count);
    double lo = std::log(1e-4), hi = std::log(1e6);
    for (int i = 0; i < count; ++i)
        grid[i] = std::exp(lo + (hi - lo) * double(i) / double(count - 1));
    return grid;
}

SplineResult spline_fit(const Dataset& data, const SplineSpec& spec, const Eigen::VectorXd& grid) {
    check_spec(spec);
    const Eigen::VectorXd& x = data.x();
    const Eigen::VectorXd& y = data.y();
    const Eigen::Index n = data.n();
    if (spec.num_knots > n - spec.degree - 1)
        throw SizeError("too many knots: need C <= n - p - 1");
    if (grid.size() == 0) throw SizeError("query grid is empty");
    for (Eigen::Index i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw DomainError("query grid must be strictly ascending");

    Eigen::VectorXd knots = spec.knots ? *spec.knots : spline_knots(x, spec.num_knots);
    if (spec.knots) {
        double xmin = x.minCoeff(), xmax = x.maxCoeff();
        for (Eigen::Index c = 0; c < knots.size(); ++c) {
            if (!(knots[c] > xmin) || !(knots[c] < xmax))
                throw KnotError("explicit knots must lie strictly inside the data range");
            if (c > 0 && !(knots[c] > knots[c - 1]))
                throw KnotError("explicit knots must be strictly ascending");
        }
    }

    double lambda = spec.lambda.value;
    if (spec.lambda.mode == Penalty::Mode::gcv) {
        SplineSpec resolved = spec;
        resolved.knots = knots;
        lambda = lambda_gcv(data, resolved, default_lambda_grid()).lambda_opt;
    } else if (lambda < 0.0) {
        throw DomainError("spline penalty must be nonnegative");
    }

    SolvedSpline s = solve_spline(x, y, spec.degree, knots, lambda);
    double sigma2;
    {
        Eigen::VectorXd fitted = s.basis * s.coeffs;
        sigma2 = smoother_sigma2(y, fitted, s.trace);
    }

    // se(x)^2 = sigma2 * b(x)' M^-1 B' B M^-1 b(x)
    Eigen::MatrixXd bg = spline_basis(grid, spec.degree, knots);
    Eigen::MatrixXd btb = s.basis.transpose() * s.basis;
    Eigen::MatrixXd core = s.normal_inv * btb * s.normal_inv;

    FitCurve curve;
    curve.grid = grid;
    curve.fit = bg * s.coeffs;
    curve.se.resize(grid.size());
    Eigen::VectorXd deriv(grid.size());
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
        double l2 = bg.row(g) * core * bg.row(g).transpose();
        curve.se[g] = std::sqrt(std::max(0.0, sigma2 * l2));
        deriv[g] = spline_eval(s.coeffs, spec.degree, knots, grid[g], 1);
    }
    curve.lower = curve.fit - 2.0 * curve.se;
    curve.upper = curve.fit + 2.0 * curve.se;
    curve.deriv = std::move(deriv);
    curve.validate();

    SplineFit fit;
    fit.coeffs = s.coeffs;
    fit.lambda = lambda;
    fit.edf = s.trace;
    fit.gcv = gcv_score(s.rss, s.trace, double(n));
    fit.knots = knots;
    fit.degree = spec.degree;
    return {std::move(curve), std::move(fit)};
}

} // namespace smoothkit
