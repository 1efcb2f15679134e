#include "smoothkit/numerics.hpp"

#include "smoothkit/errors.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>

namespace smoothkit {

WlsSolution wls_solve(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& w, double ridge,
                      const std::vector<bool>& penalized) {
    const Eigen::Index n = design.rows();
    const Eigen::Index p = design.cols();
    if (y.size() != n || w.size() != n)
        throw SizeError("wls_solve: design rows, y, and w must have equal length");
    if (p == 0) throw SizeError("wls_solve: empty design");
    if (ridge < 0.0) throw DomainError("wls_solve: ridge must be nonnegative");
    if (!penalized.empty() && static_cast<Eigen::Index>(penalized.size()) != p)
        throw SizeError("wls_solve: penalized mask length must match design columns");

    // Negative weights are tolerated (sign-indefinite kernels produce them);
    // the fit just needs some strictly positive mass.
    bool any_positive = false;
    for (Eigen::Index i = 0; i < n; ++i)
        if (w[i] > 0.0) any_positive = true;
    if (!any_positive) throw DomainError("wls_solve: no strictly positive weight");

    // Normal matrix M = X' W X (+ ridge on penalized diagonal entries).
    Eigen::MatrixXd xtw = design.transpose() * w.asDiagonal();
    Eigen::MatrixXd m = xtw * design;
    if (ridge > 0.0 && !penalized.empty()) {
        for (Eigen::Index j = 0; j < p; ++j)
            if (penalized[j]) m(j, j) += ridge;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    if (eig.info() != Eigen::Success)
        throw RankError("wls_solve: eigendecomposition of the normal matrix failed");
    const Eigen::VectorXd& ev = eig.eigenvalues();
    double emax = ev.cwiseAbs().maxCoeff();
    double emin = ev.cwiseAbs().minCoeff();
    double rcond = emax > 0.0 ? emin / emax : 0.0;
    if (ridge == 0.0 && rcond < 1e-12)
        throw RankError("wls_solve: normal matrix singular to working precision (" +
                        std::to_string(p) + " columns, rcond " + std::to_string(rcond) + ")");

    Eigen::MatrixXd minv =
        eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();

    WlsSolution out;
    out.normal_inv = std::move(minv);
    out.beta = out.normal_inv * (xtw * y);
    out.fitted = design * out.beta;
    out.hat_diag.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
        out.hat_diag[i] = w[i] * design.row(i) * out.normal_inv * design.row(i).transpose();
    out.rss = (w.array() * (y - out.fitted).array().square()).sum();
    return out;
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double betacf(double a, double b, double x) {
    constexpr int max_iter = 200;
    constexpr double eps = 1e-14;
    constexpr double fpmin = 1e-300;

    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

} // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete_beta: a, b must be positive");
    if (x < 0.0 || x > 1.0) throw DomainError("incomplete_beta: x must lie in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;

    double lnfront = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                     a * std::log(x) + b * std::log1p(-x);
    double front = std::exp(lnfront);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double f_cdf(double f, double df1, double df2) {
    if (!(df1 > 0.0) || !(df2 > 0.0)) throw DomainError("f_cdf: degrees of freedom must be positive");
    if (f < 0.0) throw DomainError("f_cdf: statistic must be nonnegative");
    if (f == 0.0) return 0.0;
    if (std::isinf(f)) return 1.0;
    double x = df1 * f / (df1 * f + df2);
    return incomplete_beta(0.5 * df1, 0.5 * df2, x);
}

double normal_quantile(double p) {
    if (!(p > 0.0) || !(p < 1.0)) throw DomainError("normal_quantile: p must lie in (0, 1)");

    // Acklam's rational approximation with central/tail split at 0.02425.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425;

    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

} // namespace smoothkit
