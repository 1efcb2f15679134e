#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "smoothkit/errors.hpp"
#include "smoothkit/kernels.hpp"
#include "smoothkit/simulate.hpp"

#include <cmath>

using namespace smoothkit;

namespace {
const KernelSpec kEpan{Kernel::epanechnikov};
const KernelSpec kMinvar{Kernel::minvar};
const KernelSpec kGauss{Kernel::gaussian};
const KernelSpec kTricube{Kernel::tricube};
const KernelSpec kAll[] = {kEpan, kMinvar, kGauss, kTricube};
} // namespace

TEST_CASE("pointwise values") {
    CHECK(kernel_eval(kEpan, 0.0) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(kernel_eval(kTricube, 1.0) == 0.0);
    // direct evaluation of 1/sqrt(2*pi)
    CHECK(kernel_eval(kGauss, 0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
    CHECK(kernel_eval(kMinvar, 0.0) == doctest::Approx(3.0 / 8.0 * 3.0).epsilon(1e-15));
    // half-distance spot values
    CHECK(kernel_eval(kEpan, 0.5) == doctest::Approx(0.75 * 0.75).epsilon(1e-15));
    CHECK(kernel_eval(kTricube, 0.5) ==
          doctest::Approx(std::pow(1.0 - 0.125, 3.0)).epsilon(1e-15));
}

TEST_CASE("symmetry holds at random distances") {
    Rng rng(42);
    for (int i = 0; i < 1000; ++i) {
        double d = (rng.uniform() - 0.5) * 6.0;
        for (const auto& spec : kAll)
            CHECK(kernel_eval(spec, d) == kernel_eval(spec, -d));
    }
}

TEST_CASE("compact support and positivity") {
    Rng rng(7);
    for (int i = 0; i < 500; ++i) {
        double d = 1.0 + 5.0 * rng.uniform();
        CHECK(kernel_eval(kEpan, d) == 0.0);
        CHECK(kernel_eval(kMinvar, d) == 0.0);
        CHECK(kernel_eval(kTricube, d) == 0.0);
        CHECK(kernel_eval(kGauss, d) > 0.0);
    }
    // nonnegative on the support; minvar is the documented exception, it
    // dips negative for d^2 > 0.6
    for (int i = 0; i < 500; ++i) {
        double d = (rng.uniform() - 0.5) * 2.0;
        CHECK(kernel_eval(kEpan, d) >= 0.0);
        CHECK(kernel_eval(kTricube, d) >= 0.0);
        CHECK(kernel_eval(kGauss, d) > 0.0);
    }
    CHECK(kernel_eval(kMinvar, 0.9) < 0.0);
}

TEST_CASE("maximum at zero") {
    Rng rng(3);
    for (const auto& spec : kAll) {
        double peak = kernel_eval(spec, 0.0);
        for (int i = 0; i < 300; ++i) {
            double d = (rng.uniform() - 0.5) * 4.0;
            CHECK(kernel_eval(spec, d) <= peak);
        }
    }
}

TEST_CASE("scaled weights") {
    Eigen::VectorXd pts(3);
    pts << 1.0, 2.0, 3.5;

    SUBCASE("gaussian at its own center") {
        Eigen::VectorXd w = scaled_weights(kGauss, 1.0, pts, 0.7);
        CHECK(w[0] == doctest::Approx(0.3989422804014327).epsilon(1e-12));
        CHECK(w.size() == 3);
    }
    SUBCASE("compact kernel with everything out of range is all zero") {
        Eigen::VectorXd w = scaled_weights(kEpan, 10.0, pts, 0.5);
        CHECK(w.maxCoeff() == 0.0);
    }
    SUBCASE("nonpositive bandwidth is rejected") {
        CHECK_THROWS_AS(scaled_weights(kGauss, 0.0, pts, 0.0), DomainError);
        CHECK_THROWS_AS(scaled_weights(kGauss, 0.0, pts, -1.0), DomainError);
    }
    SUBCASE("doubling h never shrinks a weight (monotone kernels)") {
        Rng rng(11);
        for (int rep = 0; rep < 200; ++rep) {
            double center = rng.uniform() * 4.0;
            double h = 0.2 + rng.uniform();
            for (const auto& spec : {kEpan, kTricube, kGauss}) {
                Eigen::VectorXd w1 = scaled_weights(spec, center, pts, h);
                Eigen::VectorXd w2 = scaled_weights(spec, center, pts, 2.0 * h);
                for (int i = 0; i < 3; ++i) CHECK(w2[i] >= w1[i]);
            }
        }
    }
}

TEST_CASE("name round trip") {
    for (const auto& spec : kAll) CHECK(kernel_from_name(kernel_name(spec)).type == spec.type);
    CHECK_THROWS_AS(kernel_from_name("boxcar"), UsageError);
}
