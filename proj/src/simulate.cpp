#include "smoothkit/simulate.hpp"

#include "smoothkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace smoothkit {

double Rng::normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    // u1 in (0, 1] so the log is finite
    double u1 = (double(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
}

TruthFn truth_from_name(const std::string& name) {
    if (name == "logistic20") return TruthFn::logistic20;
    if (name == "linear") return TruthFn::linear;
    if (name == "sine") return TruthFn::sine;
    if (name == "poly") return TruthFn::poly;
    throw UsageError("unknown truth function '" + name +
                     "' (expected logistic20, linear, sine, or poly)");
}

std::string truth_name(TruthFn fn) {
    switch (fn) {
    case TruthFn::logistic20: return "logistic20";
    case TruthFn::linear: return "linear";
    case TruthFn::sine: return "sine";
    case TruthFn::poly: return "poly";
    }
    return "?";
}

double truth_eval(TruthFn fn, const Eigen::VectorXd& poly_coeffs, double x) {
    switch (fn) {
    case TruthFn::logistic20: return 1.0 / (1.0 + std::exp(-20.0 * (x - 0.5)));
    case TruthFn::linear: return x;
    case TruthFn::sine: return std::sin(2.0 * M_PI * x);
    case TruthFn::poly: {
        double acc = 0.0;
        for (Eigen::Index j = poly_coeffs.size() - 1; j >= 0; --j) acc = acc * x + poly_coeffs[j];
        return acc;
    }
    }
    return 0.0;
}

SimData generate(const SimRecipe& recipe) {
    if (recipe.n < 2) throw SizeError("simulation needs n >= 2");
    if (recipe.noise_sd < 0.0) throw DomainError("noise sd must be nonnegative");
    if (recipe.truth == TruthFn::poly && recipe.poly_coeffs.size() == 0)
        throw UsageError("poly truth needs coefficients");

    Rng rng(recipe.seed);
    std::vector<double> xs(static_cast<std::size_t>(recipe.n));
    for (auto& v : xs) v = rng.uniform();
    std::sort(xs.begin(), xs.end());

    struct Row {
        double x, y;
        bool outlier;
    };
    std::vector<Row> rows;
    rows.reserve(xs.size() + recipe.outliers.size());
    for (double xv : xs) {
        double noise = recipe.noise_sd > 0.0 ? recipe.noise_sd * rng.normal() : 0.0;
        rows.push_back({xv, truth_eval(recipe.truth, recipe.poly_coeffs, xv) + noise, false});
    }
    for (const auto& [ox, oy] : recipe.outliers) rows.push_back({ox, oy, true});
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.x < b.x; });

    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    Eigen::VectorXd x(n), y(n), truth(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x[i] = rows[static_cast<std::size_t>(i)].x;
        y[i] = rows[static_cast<std::size_t>(i)].y;
        truth[i] = truth_eval(recipe.truth, recipe.poly_coeffs, x[i]);
    }
    return {Dataset(std::move(y), x, {"x"}, {false}), std::move(truth)};
}

double rmse_against_truth(const Eigen::VectorXd& fit, const Eigen::VectorXd& truth,
                          const Eigen::VectorXd& x,
                          std::optional<std::pair<double, double>> mask) {
    if (fit.size() != truth.size() || fit.size() != x.size())
        throw SizeError("rmse_against_truth: vectors must have equal length");
    double acc = 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index i = 0; i < fit.size(); ++i) {
        if (mask && (x[i] < mask->first || x[i] > mask->second)) continue;
        double d = fit[i] - truth[i];
        acc += d * d;
        ++count;
    }
    if (count == 0) throw DomainError("rmse_against_truth: mask selects no points");
    return std::sqrt(acc / double(count));
}

} // namespace smoothkit
