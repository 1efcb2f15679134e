#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "smoothkit/errors.hpp"
#include "smoothkit/kernelreg.hpp"
#include "smoothkit/robust.hpp"
#include "smoothkit/simulate.hpp"

#include <cmath>

using namespace smoothkit;

namespace {

Dataset make_data(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return Dataset(y, x, {"x"}, {false});
}

} // namespace

TEST_CASE("huber weight") {
    CHECK(huber_weight(0.0, 1.345) == 1.0);
    CHECK(huber_weight(1.345, 1.345) == 1.0);   // boundary inclusive
    CHECK(huber_weight(-1.345, 1.345) == 1.0);
    CHECK(huber_weight(2.69, 1.345) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(huber_weight(-2.69, 1.345) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(huber_weight(1e9, 1.345) > 0.0);
    CHECK_THROWS_AS(huber_weight(1.0, 0.0), DomainError);
}

TEST_CASE("robust scale") {
    Eigen::VectorXd r(3);
    r << -1.0, 0.0, 1.0;
    CHECK(robust_scale(r, ScaleMethod::mad) == doctest::Approx(1.0 / 0.6745).epsilon(1e-12));

    Eigen::VectorXd flat = Eigen::VectorXd::Constant(5, 2.0);
    CHECK_THROWS_AS(robust_scale(flat, ScaleMethod::mad), DegeneracyError);
    CHECK_THROWS_AS(robust_scale(flat, ScaleMethod::iqr), DegeneracyError);

    Eigen::VectorXd one(1);
    one << 1.0;
    CHECK_THROWS_AS(robust_scale(one, ScaleMethod::mad), SizeError);

    SUBCASE("mad is consistent for normal data") {
        Rng rng(8675309);
        Eigen::VectorXd z(10000);
        for (int i = 0; i < 10000; ++i) z[i] = rng.normal();
        CHECK(robust_scale(z, ScaleMethod::mad) == doctest::Approx(1.0).epsilon(0.05));
        CHECK(robust_scale(z, ScaleMethod::iqr) == doctest::Approx(1.0).epsilon(0.05));
    }
    SUBCASE("iqr on a simple quartile layout") {
        Eigen::VectorXd v(5);
        v << 0.0, 1.0, 2.0, 3.0, 4.0; // Q1 = 1, Q3 = 3
        CHECK(robust_scale(v, ScaleMethod::iqr) == doctest::Approx(2.0 / 1.349).epsilon(1e-12));
    }
}

TEST_CASE("bounded symmetric noise keeps every weight at one") {
    // alternating +/- a noise: residual scale estimate ~ a / 0.6745, so the
    // rescaled residuals stay inside the Huber threshold
    const int n = 60;
    Eigen::VectorXd x(n), y(n);
    for (int i = 0; i < n; ++i) {
        x[i] = double(i) / double(n - 1);
        y[i] = 2.0 * x[i] + 1.0 + ((i % 2 == 0) ? 0.1 : -0.1);
    }
    RobustConfig config;
    config.bandwidth = 0.15;
    RobustFit fit = robust_fit(make_data(x, y), config);
    CHECK(fit.robust_weights.minCoeff() == 1.0);
    CHECK(fit.iterations <= 2); // weights stabilize immediately

    // with all-one weights the curve is the plain local-linear fit
    LocalPolySmoother plain(make_data(x, y), {Kernel::gaussian}, 1, 0.15);
    CHECK((fit.fitted - plain.fitted()).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("exactly linear data is reproduced whatever the weights do") {
    Rng rng(14);
    Eigen::VectorXd x(40), y(40);
    for (int i = 0; i < 40; ++i) {
        x[i] = rng.uniform();
        y[i] = 2.0 * x[i] + 1.0;
    }
    RobustConfig config;
    config.bandwidth = 0.2;
    RobustFit fit = robust_fit(make_data(x, y), config);
    LocalPolySmoother plain(make_data(x, y), {Kernel::gaussian}, 1, 0.2);
    CHECK((fit.fitted - plain.fitted()).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("single pass equals the plain local-linear smoother") {
    Rng rng(2718);
    Eigen::VectorXd x(50), y(50);
    for (int i = 0; i < 50; ++i) {
        x[i] = rng.uniform();
        y[i] = std::sin(5.0 * x[i]) + 0.2 * rng.normal();
    }
    RobustConfig config;
    config.bandwidth = 0.12;
    config.max_iter = 1; // the first pass always runs with unit weights
    RobustFit fit = robust_fit(make_data(x, y), config);
    LocalPolySmoother plain(make_data(x, y), {Kernel::gaussian}, 1, 0.12);
    CHECK((fit.fitted - plain.fitted()).lpNorm<Eigen::Infinity>() < 1e-9);
    CHECK(fit.iterations == 1);
}

TEST_CASE("a gross outlier is downweighted, the rest keep weight") {
    Rng rng(424242);
    const int n = 100;
    Eigen::VectorXd x(n), y(n);
    const double a = 0.1, sd = a / std::sqrt(3.0);
    for (int i = 0; i < n; ++i) {
        x[i] = double(i) / double(n - 1);
        y[i] = 2.0 * x[i] + 1.0 + a * (2.0 * rng.uniform() - 1.0);
    }
    y[n / 2] += 10.0 * sd; // shift one point by ten noise sd

    RobustConfig config;
    config.bandwidth = 0.1;
    RobustFit fit = robust_fit(make_data(x, y), config);
    CHECK(fit.robust_weights[n / 2] < 0.2);
    int high = 0;
    for (Eigen::Index j = 0; j < n; ++j)
        if (j != n / 2 && fit.robust_weights[j] > 0.9) ++high;
    CHECK(double(high) / double(n - 1) >= 0.9);
}

TEST_CASE("iqr scale downweights the outlier too") {
    Rng rng(13579);
    const int n = 90;
    Eigen::VectorXd x(n), y(n);
    for (int i = 0; i < n; ++i) {
        x[i] = double(i) / double(n - 1);
        y[i] = std::sin(3.0 * x[i]) + 0.05 * rng.normal();
    }
    y[30] += 1.0;
    RobustConfig config;
    config.bandwidth = 0.1;
    config.scale = ScaleMethod::iqr;
    RobustFit fit = robust_fit(make_data(x, y), config);
    CHECK(fit.robust_weights[30] < 0.2);
    CHECK(fit.scale_est > 0.0);
}

TEST_CASE("weights never exceed one and match the final residuals") {
    SimRecipe recipe;
    recipe.n = 100;
    recipe.noise_sd = 0.05;
    recipe.outliers = {{0.8, 0.6}, {0.75, 0.62}};
    recipe.seed = 5;
    SimData sim = generate(recipe);
    RobustConfig config;
    config.bandwidth = 0.046;
    RobustFit fit = robust_fit(sim.data, config);
    for (Eigen::Index j = 0; j < sim.data.n(); ++j) {
        CHECK(fit.robust_weights[j] > 0.0);
        CHECK(fit.robust_weights[j] <= 1.0);
        if (std::abs(fit.rescaled_residuals[j]) <= config.c)
            CHECK(fit.robust_weights[j] == 1.0);
        else
            CHECK(fit.robust_weights[j] ==
                  doctest::Approx(config.c / std::abs(fit.rescaled_residuals[j])).epsilon(1e-12));
    }
}

TEST_CASE("converged weights are a fixed point") {
    Rng rng(999);
    Eigen::VectorXd x(60), y(60);
    for (int i = 0; i < 60; ++i) {
        x[i] = rng.uniform();
        y[i] = std::cos(3.0 * x[i]) + 0.1 * rng.normal();
    }
    y[10] += 1.5;
    RobustConfig a;
    a.bandwidth = 0.15;
    a.max_iter = 30; // enough to converge and stop early
    RobustFit fit_a = robust_fit(make_data(x, y), a);
    RobustConfig b = a;
    b.max_iter = 60;
    RobustFit fit_b = robust_fit(make_data(x, y), b);
    CHECK(fit_a.iterations == fit_b.iterations);
    CHECK((fit_a.fitted - fit_b.fitted).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((fit_a.robust_weights - fit_b.robust_weights).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("affine equivariance") {
    Rng rng(31);
    Eigen::VectorXd x(80), y(80);
    for (int i = 0; i < 80; ++i) {
        x[i] = rng.uniform();
        y[i] = std::sin(4.0 * x[i]) + 0.1 * rng.normal();
    }
    y[20] += 2.0;
    RobustConfig config;
    config.bandwidth = 0.1;
    RobustFit base = robust_fit(make_data(x, y), config);
    Eigen::VectorXd y2 = 3.0 * y.array() - 5.0;
    RobustFit mapped = robust_fit(make_data(x, y2), config);
    for (Eigen::Index j = 0; j < 80; ++j) {
        CHECK(mapped.fitted[j] == doctest::Approx(3.0 * base.fitted[j] - 5.0).epsilon(1e-8));
        CHECK(mapped.robust_weights[j] ==
              doctest::Approx(base.robust_weights[j]).epsilon(1e-8));
    }
    CHECK(mapped.scale_est == doctest::Approx(3.0 * base.scale_est).epsilon(1e-8));
}

TEST_CASE("outliers hurt the plain fit more than the robust one") {
    SimRecipe recipe;
    recipe.n = 100;
    recipe.noise_sd = 0.05;
    recipe.outliers = {{0.8, 0.6}, {0.75, 0.62}};
    recipe.seed = 77;
    SimData sim = generate(recipe);

    RobustConfig config;
    config.bandwidth = 0.046;
    RobustFit rob = robust_fit(sim.data, config);
    LocalPolySmoother plain(sim.data, {Kernel::gaussian}, 1, 0.046);

    auto mask = std::make_pair(0.65, 0.9);
    double rmse_rob = rmse_against_truth(rob.fitted, sim.truth, sim.data.x(), mask);
    double rmse_plain = rmse_against_truth(plain.fitted(), sim.truth, sim.data.x(), mask);
    CHECK(rmse_rob < rmse_plain);
}

TEST_CASE("degenerate residual scale stops the loop with a flag") {
    // y identically zero gives exactly-zero residuals, hence zero scale
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(30, 0.0, 1.0);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(30);
    RobustConfig config;
    config.bandwidth = 0.2;
    RobustFit fit = robust_fit(make_data(x, y), config);
    CHECK(fit.scale_degenerate);
    CHECK(fit.iterations == 1);
    CHECK(fit.fitted.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("duplicate x values collapse to one curve point") {
    Rng rng(2025);
    const int n = 60;
    Eigen::VectorXd x(n), y(n);
    for (int i = 0; i < n; ++i) {
        x[i] = double(i / 2) / double(n / 2 - 1); // every x appears twice
        y[i] = 1.0 + x[i] + 0.1 * rng.normal();
    }
    RobustConfig config;
    config.bandwidth = 0.15;
    RobustFit fit = robust_fit(make_data(x, y), config);
    CHECK(fit.curve.grid.size() == n / 2);
    CHECK(fit.fitted.size() == n);
    fit.curve.validate(); // strictly ascending grid
    // both rows sharing an x share the fitted value
    CHECK(fit.fitted[0] == fit.fitted[1]);
    CHECK(fit.fitted[10] == fit.fitted[11]);
}

TEST_CASE("unsorted rows produce an ascending curve") {
    Rng rng(321);
    const int n = 50;
    Eigen::VectorXd x(n), y(n);
    for (int i = 0; i < n; ++i) {
        x[i] = rng.uniform(); // arbitrary order
        y[i] = 2.0 * x[i] + 0.05 * rng.normal();
    }
    RobustConfig config;
    config.bandwidth = 0.2;
    RobustFit fit = robust_fit(make_data(x, y), config);
    fit.curve.validate();
    CHECK(fit.curve.grid.size() == n);
}

TEST_CASE("config validation") {
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(10, 0.0, 1.0);
    Eigen::VectorXd y = x;
    RobustConfig config;
    config.bandwidth = 0.0;
    CHECK_THROWS_AS(robust_fit(make_data(x, y), config), DomainError);
    config.bandwidth = 0.1;
    config.max_iter = 0;
    CHECK_THROWS_AS(robust_fit(make_data(x, y), config), DomainError);
    config.max_iter = 8;
    config.c = -1.0;
    CHECK_THROWS_AS(robust_fit(make_data(x, y), config), DomainError);
    CHECK(scale_from_name("iqr") == ScaleMethod::iqr);
    CHECK_THROWS_AS(scale_from_name("sd"), UsageError);
}
