#include "smoothkit/additive.hpp"

#include "smoothkit/errors.hpp"
#include "smoothkit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

namespace smoothkit {

namespace {

// Distinct ascending values of a column; backfitting component curves live
// on this grid so training rows interpolate exactly.
Eigen::VectorXd distinct_sorted(const Eigen::VectorXd& v) {
    std::vector<double> u(v.begin(), v.end());
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    return Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
}

struct SmoothUpdate {
    Eigen::VectorXd at_rows; // raw (uncentered) fit at the training rows
    FitCurve curve;          // raw fit on the distinct-value grid
    double smoothing = 0.0;
    double edf = 0.0;
};

// Fit one smooth term to its partial residuals.
SmoothUpdate fit_smooth(const Eigen::VectorXd& xcol, const Eigen::VectorXd& partial,
                        const SmootherChoice& choice, const Eigen::VectorXd& grid,
                        bool reselect, double cached_smoothing) {
    Dataset local(partial, xcol, {"x"}, {false});
    SmoothUpdate out;
    if (choice.kind == SmootherKind::spline) {
        SplineSpec spec = choice.spline;
        if (!reselect && spec.lambda.mode == Penalty::Mode::gcv)
            spec.lambda = Penalty::fixed(cached_smoothing);
        SplineResult res = spline_fit(local, spec, grid);
        out.smoothing = res.fit.lambda;
        out.edf = res.fit.edf;
        out.curve = std::move(res.curve);
        out.at_rows.resize(xcol.size());
        for (Eigen::Index i = 0; i < xcol.size(); ++i)
            out.at_rows[i] = spline_eval(res.fit.coeffs, res.fit.degree, res.fit.knots, xcol[i]);
    } else {
        KernelRegSpec spec = choice.kernel;
        if (!reselect && spec.bandwidth.mode != Bandwidth::Mode::value)
            spec.bandwidth = Bandwidth::fixed(cached_smoothing);
        KernelFitResult res = localpoly_fit(local, spec, grid);
        out.smoothing = res.h;
        out.edf = res.smoother.trace();
        out.at_rows.resize(xcol.size());
        for (Eigen::Index i = 0; i < xcol.size(); ++i) {
            // distinct grid contains every training value
            Eigen::Index pos = std::lower_bound(res.curve.grid.begin(), res.curve.grid.end(),
                                                xcol[i]) -
                               res.curve.grid.begin();
            out.at_rows[i] = res.curve.fit[pos];
        }
        out.curve = std::move(res.curve);
    }
    return out;
}

[[noreturn]] void rethrow_with_term(const std::string& term) {
    try {
        throw;
    } catch (const NeighborhoodError& e) {
        throw NeighborhoodError("term '" + term + "': " + e.what());
    } catch (const RankError& e) {
        throw RankError("term '" + term + "': " + e.what());
    } catch (const DegeneracyError& e) {
        throw DegeneracyError("term '" + term + "': " + e.what());
    } catch (const SelectionError& e) {
        throw SelectionError("term '" + term + "': " + e.what());
    } catch (const KnotError& e) {
        throw KnotError("term '" + term + "': " + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error("term '" + term + "': " + std::string(e.what()));
    }
}

} // namespace

AdditiveFit backfit(const Dataset& data, const AdditiveSpec& spec) {
    if (spec.terms.empty()) throw UsageError("backfit: no terms given");
    const Eigen::Index n = data.n();
    const Eigen::VectorXd& y = data.y();

    std::set<std::string> seen;
    std::vector<Eigen::Index> lin_cols, smo_cols;
    std::vector<const TermSpec*> smooth_terms;
    AdditiveFit fit;
    for (const auto& term : spec.terms) {
        if (!seen.insert(term.name).second)
            throw UsageError("backfit: term '" + term.name + "' listed twice");
        Eigen::Index col = data.column_index(term.name);
        if (term.smooth) {
            if (data.factor_mask()[static_cast<std::size_t>(col)])
                throw UsageError("backfit: factor column '" + term.name + "' must be linear");
            smo_cols.push_back(col);
            smooth_terms.push_back(&term);
        } else {
            lin_cols.push_back(col);
            fit.linear_names.push_back(term.name);
        }
    }
    fit.linear_columns = lin_cols;

    auto n_lin = static_cast<Eigen::Index>(lin_cols.size());
    auto n_smo = static_cast<Eigen::Index>(smo_cols.size());
    if (n <= 1 + n_lin + 5 * n_smo)
        throw SizeError("backfit: need n > " + std::to_string(1 + n_lin + 5 * n_smo) +
                        " for this term structure");

    double sdy = std::sqrt((y.array() - y.mean()).square().sum() / double(n - 1));
    double tol = spec.tol > 0.0 ? spec.tol : 1e-6 * sdy;

    // state
    double alpha = y.mean();
    Eigen::VectorXd lin_part = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(n_lin);
    std::vector<Eigen::VectorXd> g(smooth_terms.size(), Eigen::VectorXd::Zero(n));
    std::vector<Eigen::VectorXd> grids;
    std::vector<FitCurve> curves(smooth_terms.size());
    std::vector<double> smoothing(smooth_terms.size(), 0.0);
    std::vector<double> edfs(smooth_terms.size(), 0.0);
    for (Eigen::Index t = 0; t < n_smo; ++t)
        grids.push_back(distinct_sorted(data.covariates().col(smo_cols[static_cast<std::size_t>(t)])));

    Eigen::MatrixXd lin_design;
    if (n_lin > 0) {
        lin_design.resize(n, n_lin + 1);
        lin_design.col(0).setOnes();
        for (Eigen::Index j = 0; j < n_lin; ++j)
            lin_design.col(j + 1) = data.covariates().col(lin_cols[static_cast<std::size_t>(j)]);
    }

    Eigen::VectorXd smooth_sum = Eigen::VectorXd::Zero(n);
    auto run_cycle = [&](bool reselect) -> double {
        double change = 0.0;
        double alpha_before = alpha;
        if (n_lin > 0) {
            Eigen::VectorXd partial = y - Eigen::VectorXd::Constant(n, alpha) - smooth_sum;
            WlsSolution sol = wls_solve(lin_design, partial, Eigen::VectorXd::Ones(n));
            alpha += sol.beta[0];
            Eigen::VectorXd new_lin = lin_design.rightCols(n_lin) * sol.beta.tail(n_lin);
            change = std::max(change, (new_lin - lin_part).lpNorm<Eigen::Infinity>());
            lin_part = std::move(new_lin);
            beta = sol.beta.tail(n_lin);
        }
        for (std::size_t t = 0; t < smooth_terms.size(); ++t) {
            Eigen::VectorXd partial =
                y - Eigen::VectorXd::Constant(n, alpha) - lin_part - (smooth_sum - g[t]);
            const Eigen::VectorXd xcol =
                data.covariates().col(smo_cols[t]);
            SmoothUpdate upd;
            try {
                upd = fit_smooth(xcol, partial, smooth_terms[t]->smoother, grids[t],
                                 reselect || smoothing[t] == 0.0, smoothing[t]);
            } catch (...) {
                rethrow_with_term(smooth_terms[t]->name);
            }
            smoothing[t] = upd.smoothing;
            edfs[t] = upd.edf;
            double mean = upd.at_rows.mean();
            alpha += mean;
            Eigen::VectorXd new_g = upd.at_rows.array() - mean;
            change = std::max(change, (new_g - g[t]).lpNorm<Eigen::Infinity>());
            smooth_sum += new_g - g[t];
            g[t] = std::move(new_g);

            // center the stored curve the same way
            upd.curve.fit.array() -= mean;
            upd.curve.lower.array() -= mean;
            upd.curve.upper.array() -= mean;
            curves[t] = std::move(upd.curve);
        }
        return std::max(change, std::abs(alpha - alpha_before));
    };

    bool converged = false;
    int cycles = 0;
    for (int iter = 1; iter <= spec.max_iter; ++iter) {
        double change = run_cycle(/*reselect=*/iter == 1);
        cycles = iter;
        if (change <= tol) {
            converged = true;
            break;
        }
    }
    if (converged && cycles < spec.max_iter) {
        // refresh pass: re-select smoothing at the converged solution
        run_cycle(/*reselect=*/true);
        ++cycles;
    }

    fit.intercept = alpha;
    fit.linear_coeffs = beta;
    fit.iterations = cycles;
    fit.converged = converged;
    fit.fitted = Eigen::VectorXd::Constant(n, alpha) + lin_part + smooth_sum;
    for (std::size_t t = 0; t < smooth_terms.size(); ++t) {
        AdditiveComponent comp;
        comp.name = smooth_terms[t]->name;
        comp.column = smo_cols[t];
        comp.curve = std::move(curves[t]);
        comp.smoothing = smoothing[t];
        comp.edf = edfs[t];
        comp.values = g[t];
        fit.components.push_back(std::move(comp));
    }
    return fit;
}

double predict_additive(const AdditiveFit& fit, const Eigen::RowVectorXd& xnew) {
    double acc = fit.intercept;
    for (std::size_t j = 0; j < fit.linear_columns.size(); ++j) {
        Eigen::Index col = fit.linear_columns[j];
        if (col >= xnew.size()) throw SizeError("predict_additive: row too short");
        acc += fit.linear_coeffs[static_cast<Eigen::Index>(j)] * xnew[col];
    }
    for (const auto& comp : fit.components) {
        if (comp.column >= xnew.size()) throw SizeError("predict_additive: row too short");
        double v = xnew[comp.column];
        const Eigen::VectorXd& gx = comp.curve.grid;
        if (v < gx[0] || v > gx[gx.size() - 1])
            throw ExtrapolationError("predict_additive: '" + comp.name + "' value " +
                                     format_double(v) + " outside the training range");
        Eigen::Index hi = std::lower_bound(gx.begin(), gx.end(), v) - gx.begin();
        if (hi == 0 || gx[hi] == v) {
            acc += comp.curve.fit[hi];
        } else {
            double w = (v - gx[hi - 1]) / (gx[hi] - gx[hi - 1]);
            acc += comp.curve.fit[hi - 1] * (1.0 - w) + comp.curve.fit[hi] * w;
        }
    }
    return acc;
}

} // namespace smoothkit
