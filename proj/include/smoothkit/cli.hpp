#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace smoothkit::cli {

// Fig-style robust-vs-nonrobust comparison harness: per seed, simulate the
// logistic recipe with outliers, fit local-linear, spline, and robust
// smoothers, and score each against the truth on the masked interval.
struct CompareConfig {
    int seeds = 100;     // runs use seeds 1..seeds
    int n = 100;
    double noise_sd = 0.05;
    std::vector<std::pair<double, double>> outliers = {{0.8, 0.6}, {0.75, 0.62}};
    double bandwidth = 0.046;
    double mask_lo = 0.65;
    double mask_hi = 0.9;
};

struct CompareRow {
    std::uint64_t seed;
    double rmse_kernel;
    double rmse_spline;
    double rmse_robust;
};

std::vector<CompareRow> compare_robust(const CompareConfig& config);

// Entry point behind the smoothkit executable: returns 0 on success, 2 on
// usage errors, 1 on computation errors. args excludes the program name.
int run(const std::vector<std::string>& args);

} // namespace smoothkit::cli
