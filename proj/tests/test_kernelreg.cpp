#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "smoothkit/errors.hpp"
#include "smoothkit/kernelreg.hpp"
#include "smoothkit/simulate.hpp"

#include <Eigen/Dense>
#include <cmath>

using namespace smoothkit;

namespace {

Dataset make_data(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return Dataset(y, x, {"x"}, {false});
}

// Literal kernel-weighted average, written independently of nw_fit.
double nw_oracle(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const KernelSpec& kernel,
                 double h, double q) {
    double num = 0.0, den = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double w = kernel_eval(kernel, (q - x[i]) / h);
        num += w * y[i];
        den += w;
    }
    return num / den;
}

// Independent per-query weighted least squares through Eigen's QR on the
// sqrt-weight-scaled system (a different algebraic route than wls_solve).
Eigen::VectorXd localpoly_oracle(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                 const KernelSpec& kernel, int degree, double h, double q) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd design(n, degree + 1);
    Eigen::VectorXd sw(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double w = kernel_eval(kernel, (q - x[i]) / h);
        sw[i] = std::sqrt(w);
        double d = x[i] - q;
        double p = 1.0;
        for (int j = 0; j <= degree; ++j) {
            design(i, j) = p;
            p *= d;
        }
    }
    Eigen::MatrixXd a = sw.asDiagonal() * design;
    Eigen::VectorXd b = sw.asDiagonal() * y;
    return a.colPivHouseholderQr().solve(b);
}

Dataset make_noisy_sample(int n, std::uint64_t seed, double* h_out = nullptr) {
    Rng rng(seed);
    Eigen::VectorXd x(n), y(n);
    for (int i = 0; i < n; ++i) {
        x[i] = rng.uniform();
        y[i] = std::sin(4.0 * x[i]) + 0.3 * rng.normal();
    }
    if (h_out) *h_out = 0.15 + 0.3 * rng.uniform();
    return make_data(x, y);
}

} // namespace

TEST_CASE("nw_fit basics") {
    SUBCASE("constant response is reproduced for any bandwidth") {
        Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(15, 0.0, 1.0);
        Eigen::VectorXd y = Eigen::VectorXd::Constant(15, 3.25);
        for (double h : {0.05, 0.3, 2.0}) {
            FitCurve c = nw_fit(make_data(x, y), {Kernel::gaussian}, h,
                                Eigen::VectorXd::LinSpaced(7, 0.05, 0.95));
            for (Eigen::Index g = 0; g < c.grid.size(); ++g)
                CHECK(c.fit[g] == doctest::Approx(3.25).epsilon(1e-12));
        }
    }
    SUBCASE("midpoint of a symmetric pair") {
        Eigen::VectorXd x(2), y(2);
        x << 0.0, 1.0;
        y << 0.0, 1.0;
        FitCurve c = nw_fit(make_data(x, y), {Kernel::gaussian}, 0.4,
                            Eigen::VectorXd::Constant(1, 0.5));
        CHECK(c.fit[0] == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("agrees with the literal weighted-average oracle") {
        Rng rng(555);
        Eigen::VectorXd x(10), y(10);
        for (int i = 0; i < 10; ++i) {
            x[i] = rng.uniform();
            y[i] = rng.normal();
        }
        Eigen::VectorXd grid(5);
        grid << 0.11, 0.35, 0.52, 0.68, 0.93;
        FitCurve c = nw_fit(make_data(x, y), {Kernel::epanechnikov}, 0.3, grid);
        for (int g = 0; g < 5; ++g)
            CHECK(c.fit[g] ==
                  doctest::Approx(nw_oracle(x, y, {Kernel::epanechnikov}, 0.3, grid[g]))
                      .epsilon(1e-12));
    }
    SUBCASE("empty neighborhood names the query point") {
        Eigen::VectorXd x(4), y(4);
        x << 0.0, 0.05, 0.1, 0.15;
        y << 1, 2, 3, 2;
        Eigen::VectorXd grid(1);
        grid << 0.9; // far outside every compact-kernel window
        CHECK_THROWS_AS(nw_fit(make_data(x, y), {Kernel::epanechnikov}, 0.08, grid),
                        NeighborhoodError);
        try {
            nw_fit(make_data(x, y), {Kernel::epanechnikov}, 0.08, grid);
        } catch (const NeighborhoodError& e) {
            CHECK(std::string(e.what()).find("0.9") != std::string::npos);
        }
    }
}

TEST_CASE("local linear reproduces a line exactly, any bandwidth") {
    Rng rng(99);
    Eigen::VectorXd x(25);
    for (int i = 0; i < 25; ++i) x[i] = rng.uniform() * 3.0;
    Eigen::VectorXd y = 1.0 + 2.0 * x.array();
    Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(9, 0.05, 2.95);
    for (double h : {0.2, 0.7, 5.0}) {
        KernelRegSpec spec{{Kernel::gaussian}, 1, Bandwidth::fixed(h)};
        KernelFitResult res = localpoly_fit(make_data(x, y), spec, grid);
        for (Eigen::Index g = 0; g < grid.size(); ++g) {
            CHECK(res.curve.fit[g] == doctest::Approx(1.0 + 2.0 * grid[g]).epsilon(1e-9));
            CHECK((*res.curve.deriv)[g] == doctest::Approx(2.0).epsilon(1e-7));
        }
    }
}

TEST_CASE("degree zero equals Nadaraya-Watson on random configurations") {
    for (int rep = 0; rep < 100; ++rep) {
        double h;
        Dataset data = make_noisy_sample(12, 1000 + rep, &h);
        Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(6, 0.1, 0.9);
        KernelRegSpec spec{{Kernel::gaussian}, 0, Bandwidth::fixed(h)};
        KernelFitResult lp = localpoly_fit(data, spec, grid);
        FitCurve nw = nw_fit(data, {Kernel::gaussian}, h, grid);
        for (Eigen::Index g = 0; g < grid.size(); ++g)
            CHECK(lp.curve.fit[g] == doctest::Approx(nw.fit[g]).epsilon(1e-12));
    }
}

TEST_CASE("local polynomial matches the independent per-query solver") {
    Rng rng(31337);
    for (int rep = 0; rep < 20; ++rep) {
        Dataset data = make_noisy_sample(20, 7000 + rep);
        double h = 0.5;
        int degree = 1 + int(rng.uniform() * 2.0);
        Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(5, 0.15, 0.85);
        KernelRegSpec spec{{Kernel::gaussian}, degree, Bandwidth::fixed(h)};
        KernelFitResult res = localpoly_fit(data, spec, grid);
        for (Eigen::Index g = 0; g < grid.size(); ++g) {
            Eigen::VectorXd oracle =
                localpoly_oracle(data.x(), data.y(), {Kernel::gaussian}, degree, h, grid[g]);
            CHECK(std::abs(res.curve.fit[g] - oracle[0]) < 1e-10);
            CHECK(std::abs((*res.curve.deriv)[g] - oracle[1]) < 1e-8);
        }
    }
}

TEST_CASE("sign-indefinite minvar weights still fit") {
    // minvar is negative for 0.6 < d^2 < 1, so local fits see mixed-sign
    // weights; the solve and the weight normalization must survive that
    Rng rng(505);
    Eigen::VectorXd x(30), y(30);
    for (int i = 0; i < 30; ++i) {
        x[i] = rng.uniform();
        y[i] = 2.0 * x[i] + 1.0;
    }
    KernelRegSpec spec{{Kernel::minvar}, 1, Bandwidth::fixed(0.35)};
    Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(9, 0.1, 0.9);
    KernelFitResult res = localpoly_fit(make_data(x, y), spec, grid);
    // local linear still reproduces the line exactly
    for (Eigen::Index g = 0; g < grid.size(); ++g)
        CHECK(res.curve.fit[g] == doctest::Approx(1.0 + 2.0 * grid[g]).epsilon(1e-9));
    LocalPolySmoother sm(make_data(x, y), {Kernel::minvar}, 1, 0.35);
    CHECK(sm.weights(0.4).sum() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("smoother weights sum to one at any query") {
    double h;
    Dataset data = make_noisy_sample(30, 2222, &h);
    for (int degree : {0, 1, 2, 3}) {
        LocalPolySmoother sm(data, {Kernel::gaussian}, degree, 0.4);
        Rng rng(degree + 1);
        for (int rep = 0; rep < 20; ++rep) {
            double q = rng.uniform();
            CHECK(sm.weights(q).sum() == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("affine response equivariance") {
    double h;
    Dataset data = make_noisy_sample(40, 909, &h);
    Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(11, 0.1, 0.9);
    KernelRegSpec spec{{Kernel::gaussian}, 1, Bandwidth::fixed(0.3)};
    KernelFitResult base = localpoly_fit(data, spec, grid);
    Eigen::VectorXd y2 = 2.5 * data.y().array() - 4.0;
    KernelFitResult mapped =
        localpoly_fit(Dataset(y2, data.covariates(), data.names(), data.factor_mask()), spec, grid);
    for (Eigen::Index g = 0; g < grid.size(); ++g)
        CHECK(mapped.curve.fit[g] ==
              doctest::Approx(2.5 * base.curve.fit[g] - 4.0).epsilon(1e-10));
}

TEST_CASE("huge bandwidth collapses degree zero to the sample mean") {
    double h;
    Dataset data = make_noisy_sample(50, 4321, &h);
    double range = data.x().maxCoeff() - data.x().minCoeff();
    Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(5, 0.1, 0.9);
    FitCurve c = nw_fit(data, {Kernel::gaussian}, 1e6 * range, grid);
    for (Eigen::Index g = 0; g < grid.size(); ++g)
        CHECK(std::abs(c.fit[g] - data.y().mean()) < 1e-6);
}

TEST_CASE("rule-of-thumb bandwidth") {
    SUBCASE("unit-sd sample hits the closed form") {
        Eigen::VectorXd raw = Eigen::VectorXd::LinSpaced(100, 1.0, 100.0);
        double sd = std::sqrt((raw.array() - raw.mean()).square().sum() / 99.0);
        Eigen::VectorXd x = raw / sd; // sample sd exactly 1
        Eigen::VectorXd y = Eigen::VectorXd::Zero(100).array() + x.array();
        double h = bandwidth_rot(make_data(x, y));
        CHECK(h == doctest::Approx(std::pow(4.0 / 300.0, 0.2)).epsilon(1e-12));
        // and the popular 1.06 sigma n^(-1/5) shorthand is within half a percent
        CHECK(std::abs(h - 1.06 * std::pow(100.0, -0.2)) / h < 0.005);
    }
    SUBCASE("scale equivariance") {
        Rng rng(6);
        Eigen::VectorXd x(60), y(60);
        for (int i = 0; i < 60; ++i) {
            x[i] = rng.normal();
            y[i] = rng.normal();
        }
        double h1 = bandwidth_rot(make_data(x, y));
        double h2 = bandwidth_rot(make_data(Eigen::VectorXd(2.0 * x), y));
        CHECK(h2 == doctest::Approx(2.0 * h1).epsilon(1e-12));
    }
    SUBCASE("constant covariate is rejected") {
        Eigen::VectorXd x = Eigen::VectorXd::Constant(10, 1.0);
        Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(10, 0.0, 9.0);
        CHECK_THROWS_AS(bandwidth_rot(make_data(x, y)), DomainError);
    }
}

TEST_CASE("cross-validation") {
    Dataset data = make_noisy_sample(50, 20240202);
    KernelRegSpec spec{{Kernel::gaussian}, 1, Bandwidth::auto_cv()};

    SUBCASE("single feasible candidate is returned") {
        Eigen::VectorXd one(1);
        one << 0.25;
        CvResult r = bandwidth_cv(data, spec, one);
        CHECK(r.h_opt == 0.25);
        CHECK(r.scores.size() == 1);
    }
    SUBCASE("scores equal the naive delete-one oracle") {
        Eigen::VectorXd cands = Eigen::VectorXd::LinSpaced(10, 0.08, 0.8);
        CvResult r = bandwidth_cv(data, spec, cands);
        const Eigen::VectorXd& x = data.x();
        const Eigen::VectorXd& y = data.y();
        for (Eigen::Index c = 0; c < cands.size(); ++c) {
            double score = 0.0;
            for (Eigen::Index i = 0; i < data.n(); ++i) {
                // true deletion: rebuild the sample without point i
                Eigen::VectorXd xd(data.n() - 1), yd(data.n() - 1);
                Eigen::Index at = 0;
                for (Eigen::Index j = 0; j < data.n(); ++j) {
                    if (j == i) continue;
                    xd[at] = x[j];
                    yd[at] = y[j];
                    ++at;
                }
                Eigen::VectorXd beta =
                    localpoly_oracle(xd, yd, {Kernel::gaussian}, 1, cands[c], x[i]);
                double resid = y[i] - beta[0];
                score += resid * resid;
            }
            CHECK(std::abs(r.scores[c] - score) < 1e-10 * std::max(1.0, score));
        }
        // the chosen score is the minimum
        double best = r.scores.minCoeff();
        Eigen::Index where;
        r.scores.minCoeff(&where);
        CHECK(r.h_opt == cands[where]);
        CHECK(best <= r.scores.minCoeff() + 1e-15);
    }
    SUBCASE("infeasible candidates score infinity, all-infeasible throws") {
        KernelRegSpec compact{{Kernel::epanechnikov}, 1, Bandwidth::auto_cv()};
        Eigen::VectorXd cands(2);
        cands << 1e-6, 0.5; // first is below every gap
        CvResult r = bandwidth_cv(data, compact, cands);
        CHECK(std::isinf(r.scores[0]));
        CHECK(r.h_opt == 0.5);
        Eigen::VectorXd bad(2);
        bad << 1e-7, 1e-6;
        CHECK_THROWS_AS(bandwidth_cv(data, compact, bad), SelectionError);
    }
    SUBCASE("candidates must be positive") {
        Eigen::VectorXd bad(2);
        bad << -0.1, 0.2;
        CHECK_THROWS_AS(bandwidth_cv(data, spec, bad), DomainError);
    }
}

TEST_CASE("band rule") {
    SUBCASE("interpolating smoother is rejected") {
        Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(10, 0.0, 9.0);
        Eigen::VectorXd y = x.array().sin();
        KernelRegSpec spec{{Kernel::epanechnikov}, 0, Bandwidth::fixed(0.4)};
        // each neighborhood holds exactly its own point: trace = n
        CHECK_THROWS_AS(localpoly_fit(make_data(x, y), spec, Eigen::VectorXd::LinSpaced(5, 1.0, 8.0)),
                        DegeneracyError);
    }
    SUBCASE("constant data gives zero-width bands") {
        Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(20, 0.0, 1.0);
        Eigen::VectorXd y = Eigen::VectorXd::Constant(20, 1.5);
        FitCurve c = nw_fit(make_data(x, y), {Kernel::gaussian}, 0.2,
                            Eigen::VectorXd::LinSpaced(5, 0.1, 0.9));
        CHECK(c.se.maxCoeff() == doctest::Approx(0.0).epsilon(1e-12));
        CHECK((c.upper - c.lower).maxCoeff() == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("two-se bands cover a smooth truth at most grid points") {
        int good_seeds = 0;
        Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(25, 0.1, 0.9);
        for (int seed = 1; seed <= 100; ++seed) {
            Rng rng(seed);
            Eigen::VectorXd x(50), y(50);
            for (int i = 0; i < 50; ++i) {
                x[i] = rng.uniform();
                y[i] = std::sin(M_PI * x[i]) + 0.3 * rng.normal();
            }
            KernelRegSpec spec{{Kernel::gaussian}, 1, Bandwidth::fixed(0.1)};
            KernelFitResult res = localpoly_fit(make_data(x, y), spec, grid);
            int covered = 0;
            for (Eigen::Index g = 0; g < grid.size(); ++g) {
                double truth = std::sin(M_PI * grid[g]);
                if (res.curve.lower[g] <= truth && truth <= res.curve.upper[g]) ++covered;
            }
            if (covered >= 20) ++good_seeds; // 80% of 25
        }
        CHECK(good_seeds >= 80);
    }
}
