#include "smoothkit/singleindex.hpp"

#include "smoothkit/errors.hpp"
#include "smoothkit/kernelreg.hpp"
#include "smoothkit/parallel.hpp"
#include "smoothkit/simulate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace smoothkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Leave-one-out local-linear criterion at a unit direction. The gaussian
// weight scale cancels in the fit, so the kernel constant is dropped.
double sls_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& beta_unit) {
    const Eigen::Index n = x.rows();
    Eigen::VectorXd z = x * beta_unit;
    double mean = z.mean();
    double var = (z.array() - mean).square().sum() / double(n - 1);
    if (!(var > 0.0)) return kInf;
    double h = std::sqrt(var) * std::pow(4.0 / (3.0 * double(n)), 0.2);

    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            double u = z[j] - z[i];
            double d = u / h;
            double w = std::exp(-0.5 * d * d);
            s0 += w;
            s1 += w * u;
            s2 += w * u * u;
            t0 += w * y[j];
            t1 += w * u * y[j];
        }
        double den = s0 * s2 - s1 * s1;
        if (!(den > 0.0) || !(s0 > 0.0)) return kInf;
        double fhat = (s2 * t0 - s1 * t1) / den;
        double resid = y[i] - fhat;
        total += resid * resid;
        if (!std::isfinite(total)) return kInf;
    }
    return total;
}

// Chart around a pivot coordinate: beta(u) fixes the pivot at 1, fills the
// remaining coordinates with u, and normalizes. Covers the half-sphere with
// a positive pivot; the objective is symmetric under beta -> -beta.
Eigen::VectorXd chart_to_unit(const Eigen::VectorXd& u, Eigen::Index pivot) {
    Eigen::VectorXd v(u.size() + 1);
    Eigen::Index at = 0;
    for (Eigen::Index j = 0; j < v.size(); ++j)
        v[j] = (j == pivot) ? 1.0 : u[at++];
    return v / v.norm();
}

Eigen::VectorXd unit_to_chart(const Eigen::VectorXd& beta, Eigen::Index pivot) {
    Eigen::VectorXd u(beta.size() - 1);
    Eigen::Index at = 0;
    for (Eigen::Index j = 0; j < beta.size(); ++j)
        if (j != pivot) u[at++] = beta[j] / beta[pivot];
    return u;
}

void canonical_sign(Eigen::VectorXd& beta) {
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        if (std::abs(beta[j]) > 1e-12) {
            if (beta[j] < 0.0) beta = -beta;
            return;
        }
    }
}

struct NmResult {
    Eigen::VectorXd point;
    double value = kInf;
};

// Standard Nelder-Mead (reflect/expand/contract/shrink) in m dimensions.
NmResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                     const Eigen::VectorXd& start, int max_iter, double tol) {
    const Eigen::Index m = start.size();
    std::vector<Eigen::VectorXd> pts;
    std::vector<double> vals;
    pts.push_back(start);
    vals.push_back(f(start));
    for (Eigen::Index j = 0; j < m; ++j) {
        Eigen::VectorXd p = start;
        p[j] += 0.25;
        pts.push_back(p);
        vals.push_back(f(p));
    }

    auto order = [&]() {
        std::vector<std::size_t> idx(pts.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return vals[a] < vals[b];
        });
        std::vector<Eigen::VectorXd> p2;
        std::vector<double> v2;
        for (std::size_t i : idx) {
            p2.push_back(pts[i]);
            v2.push_back(vals[i]);
        }
        pts = std::move(p2);
        vals = std::move(v2);
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        order();
        double diameter = 0.0;
        for (std::size_t i = 1; i < pts.size(); ++i)
            diameter = std::max(diameter, (pts[i] - pts[0]).lpNorm<Eigen::Infinity>());
        if (diameter < tol) break;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(m);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) centroid += pts[i];
        centroid /= double(pts.size() - 1);

        Eigen::VectorXd& worst = pts.back();
        Eigen::VectorXd refl = centroid + (centroid - worst);
        double f_refl = f(refl);
        if (f_refl < vals[0]) {
            Eigen::VectorXd expd = centroid + 2.0 * (centroid - worst);
            double f_expd = f(expd);
            if (f_expd < f_refl) {
                worst = expd;
                vals.back() = f_expd;
            } else {
                worst = refl;
                vals.back() = f_refl;
            }
        } else if (f_refl < vals[vals.size() - 2]) {
            worst = refl;
            vals.back() = f_refl;
        } else {
            Eigen::VectorXd contr = centroid + 0.5 * (worst - centroid);
            double f_contr = f(contr);
            if (f_contr < vals.back()) {
                worst = contr;
                vals.back() = f_contr;
            } else {
                for (std::size_t i = 1; i < pts.size(); ++i) {
                    pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
                    vals[i] = f(pts[i]);
                }
            }
        }
    }
    order();
    return {pts[0], vals[0]};
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    for (Eigen::Index j = 0; j < a.size(); ++j) {
        if (a[j] < b[j]) return true;
        if (a[j] > b[j]) return false;
    }
    return false;
}

} // namespace

IndexFit sim_fit(const Dataset& data, std::optional<Eigen::VectorXd> init, const SimOptions& opts) {
    const Eigen::MatrixXd& x = data.covariates();
    const Eigen::VectorXd& y = data.y();
    const Eigen::Index n = data.n();
    const Eigen::Index k = data.k();

    IndexFit fit;
    if (k == 1) {
        fit.beta = Eigen::VectorXd::Ones(1);
    } else {
        // collinearity check on scale-normalized columns
        Eigen::MatrixXd xs = x;
        for (Eigen::Index j = 0; j < k; ++j) {
            double norm = xs.col(j).norm();
            if (norm > 0.0) xs.col(j) /= norm;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(xs.transpose() * xs);
        double emax = eig.eigenvalues().cwiseAbs().maxCoeff();
        double emin = eig.eigenvalues().cwiseAbs().minCoeff();
        if (!(emax > 0.0) || emin / emax < 1e-12)
            throw RankError("sim_fit: covariates are collinear to working precision");

        // starts: supplied init, then the OLS direction, then random points
        std::vector<Eigen::VectorXd> starts;
        if (init) {
            if (init->size() != k) throw SizeError("sim_fit: init length must equal k");
            double norm = init->norm();
            if (!(norm > 0.0)) throw DomainError("sim_fit: init must be nonzero");
            starts.push_back(*init / norm);
        }
        {
            Eigen::MatrixXd d(n, k + 1);
            d.col(0).setOnes();
            d.rightCols(k) = x;
            Eigen::VectorXd ols = d.colPivHouseholderQr().solve(y).tail(k);
            if (ols.norm() > 1e-12) starts.push_back(ols / ols.norm());
        }
        Rng rng(opts.seed);
        for (int r = 0; r < opts.restarts; ++r) {
            Eigen::VectorXd v(k);
            for (Eigen::Index j = 0; j < k; ++j) v[j] = rng.normal();
            double norm = v.norm();
            starts.push_back(norm > 0.0 ? Eigen::VectorXd(v / norm)
                                        : Eigen::VectorXd(Eigen::VectorXd::Unit(k, 0)));
        }
        if (starts.empty()) throw OptimizationError("sim_fit: no usable starting direction");

        struct Candidate {
            Eigen::VectorXd beta;
            double value = kInf;
        };
        std::vector<Candidate> results(starts.size());
        parallel_for(starts.size(), [&](std::size_t s) {
            Eigen::VectorXd start = starts[s];
            Eigen::Index pivot;
            start.cwiseAbs().maxCoeff(&pivot);
            if (start[pivot] < 0.0) start = -start;
            Eigen::VectorXd u0 = unit_to_chart(start, pivot);
            auto objective = [&](const Eigen::VectorXd& u) {
                return sls_objective(x, y, chart_to_unit(u, pivot));
            };
            NmResult nm = nelder_mead(objective, u0, opts.nm_max_iter, opts.nm_tol);
            if (!std::isfinite(nm.value)) return;
            Eigen::VectorXd beta = chart_to_unit(nm.point, pivot);
            canonical_sign(beta);
            results[s] = {std::move(beta), nm.value};
        });

        const Candidate* best = nullptr;
        for (const auto& cand : results) {
            if (!std::isfinite(cand.value)) continue;
            if (!best || cand.value < best->value ||
                (cand.value == best->value && lex_less(cand.beta, best->beta)))
                best = &cand;
        }
        if (!best)
            throw OptimizationError("sim_fit: objective is non-finite at every start");
        fit.beta = best->beta;
        fit.objective = best->value;
    }

    fit.index_values = x * fit.beta;

    // final link: local-linear with a cross-validated bandwidth
    Dataset link_data(y, fit.index_values, {"index"}, {false});
    KernelRegSpec link_spec;
    link_spec.degree = 1;
    link_spec.kernel = {Kernel::gaussian};
    CvResult cv = bandwidth_cv(link_data, link_spec,
                               default_bandwidth_grid(bandwidth_rot(link_data)));
    link_spec.bandwidth = Bandwidth::fixed(cv.h_opt);
    fit.h_link = cv.h_opt;

    std::vector<double> zu(fit.index_values.begin(), fit.index_values.end());
    std::sort(zu.begin(), zu.end());
    zu.erase(std::unique(zu.begin(), zu.end()), zu.end());
    Eigen::VectorXd grid =
        Eigen::Map<const Eigen::VectorXd>(zu.data(), static_cast<Eigen::Index>(zu.size()));
    KernelFitResult link = localpoly_fit(link_data, link_spec, grid);
    fit.fitted = link.smoother.fitted();
    fit.link_edf = link.smoother.trace();
    fit.link = std::move(link.curve);

    double fmean = fit.fitted.mean(), ymean = y.mean();
    double sf = (fit.fitted.array() - fmean).square().sum();
    double sy = (y.array() - ymean).square().sum();
    double sxy = ((fit.fitted.array() - fmean) * (y.array() - ymean)).sum();
    fit.r_squared = (sf > 0.0 && sy > 0.0) ? (sxy * sxy) / (sf * sy) : 0.0;
    if (k == 1) fit.objective = sls_objective(x, y, fit.beta);
    return fit;
}

double sim_predict(const IndexFit& fit, const Eigen::RowVectorXd& xnew) {
    if (xnew.size() != fit.beta.size())
        throw SizeError("sim_predict: row length must equal the coefficient count");
    double z = xnew * fit.beta;
    const Eigen::VectorXd& gx = fit.link.grid;
    if (z < gx[0] || z > gx[gx.size() - 1])
        throw ExtrapolationError("sim_predict: index value " + format_double(z) +
                                 " outside the fitted range");
    Eigen::Index hi = std::lower_bound(gx.begin(), gx.end(), z) - gx.begin();
    if (hi == 0 || gx[hi] == z) return fit.link.fit[hi];
    double w = (z - gx[hi - 1]) / (gx[hi] - gx[hi - 1]);
    return fit.link.fit[hi - 1] * (1.0 - w) + fit.link.fit[hi] * w;
}

} // namespace smoothkit
