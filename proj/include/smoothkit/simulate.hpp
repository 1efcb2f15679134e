#pragma once

#include "smoothkit/dataset.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace smoothkit {

// Deterministic 64-bit generator (splitmix64) with Box-Muller normals.
// Fixed constants keep identical seeds bit-reproducible across builds.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform on [0, 1)
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // standard normal; Box-Muller pairs, second value cached
    double normal();

private:
    std::uint64_t state_;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

enum class TruthFn { logistic20, linear, sine, poly };

TruthFn truth_from_name(const std::string& name);
std::string truth_name(TruthFn fn);

// Mean function value at x; `poly_coeffs` used only for TruthFn::poly.
double truth_eval(TruthFn fn, const Eigen::VectorXd& poly_coeffs, double x);

struct SimRecipe {
    int n = 100;
    TruthFn truth = TruthFn::logistic20;
    Eigen::VectorXd poly_coeffs; // for TruthFn::poly
    double noise_sd = 0.0;
    std::vector<std::pair<double, double>> outliers; // (x, y) appended verbatim
    std::uint64_t seed = 1;
};

struct SimData {
    Dataset data;        // covariate "x", rows sorted ascending by x
    Eigen::VectorXd truth; // mean function at each final x (outlier rows included)
};

// x ~ U(0,1) iid, sorted; y = truth(x) + noise; outliers appended then the
// rows re-sorted by x. Identical recipes yield identical datasets.
SimData generate(const SimRecipe& recipe);

// Root-mean-square difference, optionally restricted to lo <= x <= hi.
double rmse_against_truth(const Eigen::VectorXd& fit, const Eigen::VectorXd& truth,
                          const Eigen::VectorXd& x,
                          std::optional<std::pair<double, double>> mask = std::nullopt);

} // namespace smoothkit
