#include "smoothkit/parametric.hpp"

#include "smoothkit/errors.hpp"
#include "smoothkit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace smoothkit {

double PolyFit::predict(double x) const {
    double acc = 0.0;
    for (Eigen::Index j = coeffs.size() - 1; j >= 0; --j) acc = acc * x + coeffs[j];
    return acc;
}

namespace {

// Expand coefficients of sum_j b_j (a*x + c)^j into the raw power basis.
Eigen::VectorXd unscale_coeffs(const Eigen::VectorXd& b, double a, double c) {
    const Eigen::Index p = b.size();
    Eigen::VectorXd raw = Eigen::VectorXd::Zero(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        // binomial expansion of (a*x + c)^j
        double coef = 1.0; // C(j, m) a^m c^(j-m), starting at m = 0
        for (Eigen::Index m = 0; m <= j; ++m) {
            double term = coef * std::pow(a, double(m)) * std::pow(c, double(j - m));
            raw[m] += b[j] * term;
            coef = coef * double(j - m) / double(m + 1);
        }
    }
    return raw;
}

} // namespace

PolyFit fit_poly(const Dataset& data, int degree) {
    if (degree < 1 || degree > 8)
        throw UsageError("fit_poly: degree must be in 1..8, got " + std::to_string(degree));
    const Eigen::VectorXd& x = data.x();
    const Eigen::VectorXd& y = data.y();
    const Eigen::Index n = data.n();
    if (n <= degree + 1)
        throw SizeError("fit_poly: need n > degree + 1 (n=" + std::to_string(n) +
                        ", degree=" + std::to_string(degree) + ")");
    double xmin = x.minCoeff(), xmax = x.maxCoeff();
    if (xmax == xmin) throw RankError("fit_poly: covariate is constant");

    // Map x to u in [-1, 1] to tame conditioning; report raw-scale coeffs.
    double a = 2.0 / (xmax - xmin);
    double c = -(xmax + xmin) / (xmax - xmin);
    Eigen::MatrixXd design(n, degree + 1);
    design.col(0).setOnes();
    Eigen::VectorXd u = a * x.array() + c;
    for (int j = 1; j <= degree; ++j) design.col(j) = design.col(j - 1).cwiseProduct(u);

    WlsSolution sol = wls_solve(design, y, Eigen::VectorXd::Ones(n));

    PolyFit fit;
    fit.degree = degree;
    fit.coeffs = unscale_coeffs(sol.beta, a, c);
    fit.fitted = sol.fitted;
    fit.residuals = y - sol.fitted;
    fit.rss = sol.rss;
    fit.hat_diag = sol.hat_diag;

    double ybar = y.mean();
    double tss = (y.array() - ybar).square().sum();
    if (tss <= 0.0) {
        fit.r_squared = 0.0;
        fit.f_stat = 0.0;
        fit.p_value = 1.0;
        return fit;
    }
    fit.r_squared = 1.0 - fit.rss / tss;
    double df2 = double(n - degree - 1);
    if (fit.rss <= tss * 1e-300) {
        fit.f_stat = std::numeric_limits<double>::max();
        fit.p_value = 0.0;
    } else {
        fit.f_stat = ((tss - fit.rss) / degree) / (fit.rss / df2);
        if (fit.f_stat < 0.0) fit.f_stat = 0.0; // guard fp noise on saturated fits
        fit.p_value = 1.0 - f_cdf(fit.f_stat, double(degree), df2);
    }
    return fit;
}

FTest anova_nested(const PolyFit& small_fit, const PolyFit& big_fit, Eigen::Index n) {
    if (small_fit.degree >= big_fit.degree)
        throw UsageError("anova_nested: first fit must have the smaller degree");
    if (small_fit.n() != n || big_fit.n() != n)
        throw UsageError("anova_nested: fits disagree with the stated sample size");

    double ddf = double(big_fit.degree - small_fit.degree);
    double df2 = double(n - big_fit.degree - 1);
    if (df2 <= 0.0) throw SizeError("anova_nested: no residual degrees of freedom");

    if (big_fit.rss <= 0.0) return {std::numeric_limits<double>::max(), 0.0};
    double f = ((small_fit.rss - big_fit.rss) / ddf) / (big_fit.rss / df2);
    if (f < 0.0) f = 0.0; // nested RSS can cross only through rounding
    return {f, 1.0 - f_cdf(f, ddf, df2)};
}

DiagnosticTable diagnostics(const PolyFit& fit) {
    const Eigen::Index n = fit.n();
    DiagnosticTable t;
    t.fitted = fit.fitted;
    t.resid = fit.residuals;

    double df = double(n - fit.degree - 1);
    double sigma2 = df > 0.0 ? fit.rss / df : 0.0;
    t.std_resid.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double denom2 = sigma2 * (1.0 - fit.hat_diag[i]);
        t.std_resid[i] = denom2 > 0.0 ? fit.residuals[i] / std::sqrt(denom2) : 0.0;
    }

    t.qq_sample = t.std_resid;
    std::sort(t.qq_sample.begin(), t.qq_sample.end());
    t.qq_theoretical.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
        t.qq_theoretical[i] = normal_quantile((double(i) + 0.5) / double(n));
    return t;
}

void emit_diagnostics(const DiagnosticTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "fitted\tresid\tstd_resid\tqq_theoretical\tqq_sample\n";
    for (Eigen::Index i = 0; i < table.fitted.size(); ++i)
        out << format_double(table.fitted[i]) << '\t' << format_double(table.resid[i]) << '\t'
            << format_double(table.std_resid[i]) << '\t' << format_double(table.qq_theoretical[i])
            << '\t' << format_double(table.qq_sample[i]) << '\n';
    if (!out) throw IoError("write failed for '" + path + "'");
}

} // namespace smoothkit
