#include "smoothkit/cli.hpp"

#include "smoothkit/additive.hpp"
#include "smoothkit/dataset.hpp"
#include "smoothkit/errors.hpp"
#include "smoothkit/kernelreg.hpp"
#include "smoothkit/parallel.hpp"
#include "smoothkit/parametric.hpp"
#include "smoothkit/robust.hpp"
#include "smoothkit/simulate.hpp"
#include "smoothkit/singleindex.hpp"
#include "smoothkit/splinereg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace smoothkit::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

// --- manifest helpers -------------------------------------------------

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for hashing");
    std::ostringstream ss;
    ss << in.rdbuf();
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(ss.str())));
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << text;
    if (!out) throw IoError("write failed for '" + path + "'");
}

// One manifest per run, written alongside the outputs.
void write_manifest(const std::string& command, const std::map<std::string, std::string>& params,
                    const std::string& input_path, const std::vector<std::string>& outputs,
                    const std::string& manifest_path) {
    nlohmann::json m;
    m["command"] = command;
    m["params"] = params;
    m["input_hash"] = input_path.empty() ? "-" : file_hash(input_path);
    m["outputs"] = outputs;
    write_text(manifest_path, m.dump(2) + "\n");
}

double parse_double(const std::string& text, const std::string& what) {
    const char* begin = text.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw UsageError("cannot parse " + what + " '" + text + "' as a number");
    return v;
}

ordered_json base_summary(const std::string& method, ordered_json smoothing_parameter,
                          ordered_json coefficients, double r_squared, double effective_df,
                          Eigen::Index n) {
    ordered_json j;
    j["schema"] = 1;
    j["method"] = method;
    j["smoothing_parameter"] = std::move(smoothing_parameter);
    j["coefficients"] = std::move(coefficients);
    j["r_squared"] = r_squared;
    j["effective_df"] = effective_df;
    j["n"] = n;
    return j;
}

double smoother_r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& fitted) {
    double tss = (y.array() - y.mean()).square().sum();
    if (!(tss > 0.0)) return 0.0;
    return 1.0 - (y - fitted).squaredNorm() / tss;
}

// --- shared input options ---------------------------------------------

struct InputArgs {
    std::string path;
    std::string response = "y";
    std::string covariates; // comma-separated; empty = all
    std::string factors;    // comma-separated
    std::string out;
    int grid_points = 100;
};

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

void add_input_options(CLI::App* cmd, InputArgs& in, const std::string& default_out,
                       bool with_grid = true) {
    cmd->add_option("input", in.path, "input CSV")->required();
    cmd->add_option("--response", in.response, "response column (default y)");
    cmd->add_option("--covariates", in.covariates, "comma-separated covariates (default: all)");
    cmd->add_option("--factors", in.factors, "comma-separated 0/1 factor columns");
    cmd->add_option("--out", in.out, "output file prefix");
    if (with_grid)
        cmd->add_option("--grid", in.grid_points, "number of query grid points (default 100)")
            ->check(CLI::PositiveNumber);
    if (in.out.empty()) in.out = default_out;
}

Dataset load_input(const InputArgs& in) {
    Dataset full = load_csv(in.path, in.response, split_commas(in.factors));
    if (in.covariates.empty()) return full;
    return full.select(split_commas(in.covariates));
}

Eigen::VectorXd uniform_grid(const Eigen::VectorXd& x, int count) {
    double lo = x.minCoeff(), hi = x.maxCoeff();
    if (!(hi > lo)) throw DomainError("covariate range is empty; cannot build a grid");
    if (count < 2) count = 2;
    Eigen::VectorXd g(count);
    for (int i = 0; i < count; ++i)
        g[i] = lo + (hi - lo) * double(i) / double(count - 1);
    return g;
}

std::map<std::string, std::string> input_params(const InputArgs& in) {
    return {{"response", in.response},
            {"covariates", in.covariates.empty() ? "*" : in.covariates},
            {"factors", in.factors},
            {"grid", std::to_string(in.grid_points)},
            {"out", in.out}};
}

// --- subcommand bodies -------------------------------------------------

int run_fit_poly(const InputArgs& in, int degree, bool with_diagnostics,
                 const std::string& command) {
    Dataset data = load_input(in);
    PolyFit fit = fit_poly(data, degree);

    ordered_json coeffs;
    coeffs["(Intercept)"] = fit.coeffs[0];
    for (int j = 1; j <= degree; ++j)
        coeffs[j == 1 ? "x" : "x^" + std::to_string(j)] = fit.coeffs[j];
    ordered_json summary = base_summary("poly", nullptr, std::move(coeffs), fit.r_squared,
                                        double(degree + 1), data.n());
    summary["degree"] = degree;
    summary["f_stat"] = fit.f_stat;
    summary["p_value"] = fit.p_value;

    std::vector<std::string> outputs;
    write_text(in.out + ".json", summary.dump(2) + "\n");
    outputs.push_back(in.out + ".json");
    if (with_diagnostics) {
        emit_diagnostics(diagnostics(fit), in.out + ".diagnostics.tsv");
        outputs.push_back(in.out + ".diagnostics.tsv");
    }

    auto params = input_params(in);
    params["degree"] = std::to_string(degree);
    write_manifest(command, params, in.path, outputs, in.out + ".manifest.json");
    return 0;
}

int run_fit_kernel(const InputArgs& in, const std::string& kernel, int degree,
                   const std::string& bandwidth) {
    Dataset data = load_input(in);
    KernelRegSpec spec;
    spec.kernel = kernel_from_name(kernel);
    spec.degree = degree;
    if (bandwidth == "cv")
        spec.bandwidth = Bandwidth::auto_cv();
    else if (bandwidth == "rot")
        spec.bandwidth = Bandwidth::auto_rot();
    else
        spec.bandwidth = Bandwidth::fixed(parse_double(bandwidth, "--bandwidth"));

    KernelFitResult res = localpoly_fit(data, spec, uniform_grid(data.x(), in.grid_points));
    emit_curve(res.curve, in.out + ".curve.tsv");

    ordered_json summary =
        base_summary("kernel", res.h, ordered_json::object(),
                     smoother_r_squared(data.y(), res.smoother.fitted()), res.smoother.trace(),
                     data.n());
    summary["kernel"] = kernel;
    summary["degree"] = degree;
    summary["sigma2"] = res.sigma2;
    write_text(in.out + ".json", summary.dump(2) + "\n");

    auto params = input_params(in);
    params["kernel"] = kernel;
    params["degree"] = std::to_string(degree);
    params["bandwidth"] = bandwidth;
    write_manifest("fit-kernel", params, in.path, {in.out + ".curve.tsv", in.out + ".json"},
                   in.out + ".manifest.json");
    return 0;
}

int run_fit_spline(const InputArgs& in, int degree, int knots, const std::string& lambda) {
    Dataset data = load_input(in);
    SplineSpec spec;
    spec.degree = degree;
    spec.num_knots = knots;
    spec.lambda = lambda == "gcv" ? Penalty::auto_gcv()
                                  : Penalty::fixed(parse_double(lambda, "--lambda"));

    SplineResult res = spline_fit(data, spec, uniform_grid(data.x(), in.grid_points));
    emit_curve(res.curve, in.out + ".curve.tsv");

    ordered_json coeffs;
    coeffs["(Intercept)"] = res.fit.coeffs[0];
    for (int j = 1; j <= degree; ++j)
        coeffs[j == 1 ? "x" : "x^" + std::to_string(j)] = res.fit.coeffs[j];
    for (Eigen::Index c = 0; c < res.fit.knots.size(); ++c)
        coeffs["knot_" + std::to_string(c + 1)] = res.fit.coeffs[degree + 1 + c];

    Eigen::VectorXd fitted(data.n());
    for (Eigen::Index i = 0; i < data.n(); ++i)
        fitted[i] = spline_eval(res.fit.coeffs, degree, res.fit.knots, data.x()[i]);
    ordered_json summary = base_summary("spline", res.fit.lambda, std::move(coeffs),
                                        smoother_r_squared(data.y(), fitted), res.fit.edf,
                                        data.n());
    summary["degree"] = degree;
    summary["num_knots"] = knots;
    summary["gcv"] = res.fit.gcv;
    write_text(in.out + ".json", summary.dump(2) + "\n");

    auto params = input_params(in);
    params["degree"] = std::to_string(degree);
    params["knots"] = std::to_string(knots);
    params["lambda"] = lambda;
    write_manifest("fit-spline", params, in.path, {in.out + ".curve.tsv", in.out + ".json"},
                   in.out + ".manifest.json");
    return 0;
}

int run_fit_additive(const InputArgs& in, const std::string& terms, const std::string& smoother) {
    Dataset data = load_input(in);
    AdditiveSpec spec;
    for (const std::string& item : split_commas(terms)) {
        auto colon = item.find(':');
        if (colon == std::string::npos)
            throw UsageError("--terms entries must look like name:linear or name:smooth");
        TermSpec term;
        term.name = item.substr(0, colon);
        std::string kind = item.substr(colon + 1);
        if (kind == "linear") {
            term.smooth = false;
        } else if (kind == "smooth") {
            term.smooth = true;
            term.smoother.kind = smoother == "kernel" ? SmootherKind::kernel : SmootherKind::spline;
            term.smoother.kernel.bandwidth = Bandwidth::auto_cv();
        } else {
            throw UsageError("term kind must be linear or smooth, got '" + kind + "'");
        }
        spec.terms.push_back(std::move(term));
    }

    AdditiveFit fit = backfit(data, spec);

    std::vector<std::string> outputs;
    ordered_json coeffs;
    coeffs["(Intercept)"] = fit.intercept;
    for (std::size_t j = 0; j < fit.linear_names.size(); ++j)
        coeffs[fit.linear_names[j]] = fit.linear_coeffs[static_cast<Eigen::Index>(j)];
    double edf = 1.0 + double(fit.linear_coeffs.size());
    for (const auto& comp : fit.components) edf += comp.edf;
    ordered_json summary =
        base_summary("additive", nullptr, std::move(coeffs),
                     smoother_r_squared(data.y(), fit.fitted), edf, data.n());
    summary["iterations"] = fit.iterations;
    summary["converged"] = fit.converged;
    ordered_json smoothing;
    for (const auto& comp : fit.components) {
        smoothing[comp.name] = comp.smoothing;
        std::string path = in.out + "." + comp.name + ".curve.tsv";
        emit_curve(comp.curve, path);
        outputs.push_back(path);
    }
    summary["smoothing"] = std::move(smoothing);
    write_text(in.out + ".json", summary.dump(2) + "\n");
    outputs.push_back(in.out + ".json");

    auto params = input_params(in);
    params["terms"] = terms;
    params["smoother"] = smoother;
    write_manifest("fit-additive", params, in.path, outputs, in.out + ".manifest.json");
    return 0;
}

int run_fit_sim(const InputArgs& in, int restarts, std::uint64_t seed) {
    Dataset data = load_input(in);
    SimOptions opts;
    opts.restarts = restarts;
    opts.seed = seed;
    IndexFit fit = sim_fit(data, std::nullopt, opts);
    emit_curve(fit.link, in.out + ".curve.tsv");

    ordered_json coeffs;
    for (Eigen::Index j = 0; j < data.k(); ++j)
        coeffs[data.names()[static_cast<std::size_t>(j)]] = fit.beta[j];
    ordered_json summary = base_summary("single-index", fit.h_link, std::move(coeffs),
                                        fit.r_squared, fit.link_edf, data.n());
    // second normalization: first coefficient rescaled to 1 when usable
    if (std::abs(fit.beta[0]) > 1e-6) {
        ordered_json rescaled;
        for (Eigen::Index j = 0; j < data.k(); ++j)
            rescaled[data.names()[static_cast<std::size_t>(j)]] = fit.beta[j] / fit.beta[0];
        summary["coefficients_first_unit"] = std::move(rescaled);
    } else {
        summary["coefficients_first_unit"] = nullptr;
    }
    summary["objective"] = fit.objective;
    write_text(in.out + ".json", summary.dump(2) + "\n");

    auto params = input_params(in);
    params["restarts"] = std::to_string(restarts);
    params["seed"] = std::to_string(seed);
    write_manifest("fit-sim", params, in.path, {in.out + ".curve.tsv", in.out + ".json"},
                   in.out + ".manifest.json");
    return 0;
}

int run_fit_robust(const InputArgs& in, double bandwidth, double c, int max_iter,
                   const std::string& scale, const std::string& kernel) {
    Dataset data = load_input(in);
    RobustConfig config;
    config.bandwidth = bandwidth;
    config.c = c;
    config.max_iter = max_iter;
    config.scale = scale_from_name(scale);
    config.kernel = kernel_from_name(kernel);

    RobustFit fit = robust_fit(data, config);
    emit_curve(fit.curve, in.out + ".curve.tsv");

    // per-observation table: x, y, yhat, rescaled residual, robust weight
    {
        std::ofstream obs(in.out + ".obs.tsv");
        if (!obs) throw IoError("cannot write '" + in.out + ".obs.tsv'");
        obs << "x\ty\tyhat\trescaled_residual\tweight\n";
        for (Eigen::Index i = 0; i < data.n(); ++i)
            obs << format_double(data.x()[i]) << '\t' << format_double(data.y()[i]) << '\t'
                << format_double(fit.fitted[i]) << '\t'
                << format_double(fit.rescaled_residuals[i]) << '\t'
                << format_double(fit.robust_weights[i]) << '\n';
    }

    ordered_json summary =
        base_summary("robust", bandwidth, ordered_json::object(),
                     smoother_r_squared(data.y(), fit.fitted), fit.edf, data.n());
    summary["scale"] = scale;
    summary["scale_est"] = fit.scale_est;
    summary["iterations"] = fit.iterations;
    summary["scale_degenerate"] = fit.scale_degenerate;
    summary["min_weight"] = fit.robust_weights.minCoeff();
    summary["max_weight"] = fit.robust_weights.maxCoeff();
    write_text(in.out + ".json", summary.dump(2) + "\n");

    auto params = input_params(in);
    params["bandwidth"] = format_double(bandwidth);
    params["c"] = format_double(c);
    params["max-iter"] = std::to_string(max_iter);
    params["scale"] = scale;
    params["kernel"] = kernel;
    write_manifest("fit-robust", params, in.path,
                   {in.out + ".curve.tsv", in.out + ".obs.tsv", in.out + ".json"},
                   in.out + ".manifest.json");
    return 0;
}

int run_simulate(const std::string& recipe_name, int n, double noise_sd,
                 const std::vector<std::string>& outlier_args, std::uint64_t seed,
                 const std::string& poly_coeffs, const std::string& out) {
    SimRecipe recipe;
    recipe.truth = truth_from_name(recipe_name);
    recipe.n = n;
    recipe.noise_sd = noise_sd;
    recipe.seed = seed;
    if (!poly_coeffs.empty()) {
        auto parts = split_commas(poly_coeffs);
        recipe.poly_coeffs.resize(static_cast<Eigen::Index>(parts.size()));
        for (std::size_t i = 0; i < parts.size(); ++i)
            recipe.poly_coeffs[static_cast<Eigen::Index>(i)] =
                parse_double(parts[i], "--poly-coeffs entry");
    }
    for (const std::string& o : outlier_args) {
        auto colon = o.find(':');
        if (colon == std::string::npos)
            throw UsageError("--outlier must look like x:y, got '" + o + "'");
        recipe.outliers.emplace_back(parse_double(o.substr(0, colon), "--outlier x"),
                                     parse_double(o.substr(colon + 1), "--outlier y"));
    }

    SimData sim = generate(recipe);
    std::ostringstream csv;
    csv << "x,y,truth\n";
    for (Eigen::Index i = 0; i < sim.data.n(); ++i)
        csv << format_double(sim.data.x()[i]) << ',' << format_double(sim.data.y()[i]) << ','
            << format_double(sim.truth[i]) << '\n';
    write_text(out, csv.str());

    std::map<std::string, std::string> params = {
        {"recipe", recipe_name},         {"n", std::to_string(n)},
        {"noise-sd", format_double(noise_sd)}, {"seed", std::to_string(seed)},
        {"poly-coeffs", poly_coeffs},    {"out", out}};
    for (std::size_t i = 0; i < outlier_args.size(); ++i)
        params["outlier." + std::to_string(i)] = outlier_args[i];
    write_manifest("simulate", params, "", {out}, out + ".manifest.json");
    return 0;
}

int run_compare_robust(const CompareConfig& config, const std::vector<std::string>& outlier_args,
                       const std::string& out) {
    std::vector<CompareRow> rows = compare_robust(config);
    std::ostringstream tsv;
    tsv << "seed\trmse_kernel\trmse_spline\trmse_robust\n";
    for (const auto& row : rows)
        tsv << row.seed << '\t' << format_double(row.rmse_kernel) << '\t'
            << format_double(row.rmse_spline) << '\t' << format_double(row.rmse_robust) << '\n';
    write_text(out, tsv.str());

    std::map<std::string, std::string> params = {
        {"seeds", std::to_string(config.seeds)},
        {"n", std::to_string(config.n)},
        {"noise-sd", format_double(config.noise_sd)},
        {"bandwidth", format_double(config.bandwidth)},
        {"mask-lo", format_double(config.mask_lo)},
        {"mask-hi", format_double(config.mask_hi)},
        {"out", out}};
    for (std::size_t i = 0; i < outlier_args.size(); ++i)
        params["outlier." + std::to_string(i)] = outlier_args[i];
    write_manifest("compare-robust", params, "", {out}, out + ".manifest.json");
    return 0;
}

} // namespace

std::vector<CompareRow> compare_robust(const CompareConfig& config) {
    if (config.seeds < 1) throw UsageError("compare-robust needs at least one seed");
    std::vector<CompareRow> rows(static_cast<std::size_t>(config.seeds));

    parallel_for(rows.size(), [&](std::size_t s) {
        SimRecipe recipe;
        recipe.n = config.n;
        recipe.truth = TruthFn::logistic20;
        recipe.noise_sd = config.noise_sd;
        recipe.outliers = config.outliers;
        recipe.seed = static_cast<std::uint64_t>(s) + 1;
        SimData sim = generate(recipe);
        const Eigen::VectorXd& x = sim.data.x();
        auto mask = std::make_pair(config.mask_lo, config.mask_hi);

        LocalPolySmoother kernel_fit(sim.data, {Kernel::gaussian}, 1, config.bandwidth);

        SplineSpec sspec; // defaults: cubic, 10 knots, GCV
        Eigen::VectorXd fitted_spline(sim.data.n());
        {
            SplineResult sp = spline_fit(sim.data, sspec, uniform_grid(x, 50));
            for (Eigen::Index i = 0; i < sim.data.n(); ++i)
                fitted_spline[i] = spline_eval(sp.fit.coeffs, sp.fit.degree, sp.fit.knots, x[i]);
        }

        RobustConfig rconfig;
        rconfig.bandwidth = config.bandwidth;
        RobustFit rob = robust_fit(sim.data, rconfig);

        rows[s] = {recipe.seed,
                   rmse_against_truth(kernel_fit.fitted(), sim.truth, x, mask),
                   rmse_against_truth(fitted_spline, sim.truth, x, mask),
                   rmse_against_truth(rob.fitted, sim.truth, x, mask)};
    });
    return rows;
}

int run(const std::vector<std::string>& args) {
    CLI::App app{"regression toolkit: polynomial, kernel, spline, additive, "
                 "single-index, and robust smoothers"};
    app.require_subcommand(0, 1);

    // fit-poly / diagnose
    InputArgs poly_in, diag_in, kern_in, spl_in, add_in, sim_in, rob_in;
    int poly_degree = 1, diag_degree = 1;
    CLI::App* fit_poly_cmd = app.add_subcommand("fit-poly", "polynomial regression");
    add_input_options(fit_poly_cmd, poly_in, "poly", false);
    fit_poly_cmd->add_option("--degree", poly_degree, "polynomial degree (1..8)");

    CLI::App* diagnose_cmd = app.add_subcommand("diagnose", "polynomial residual diagnostics");
    add_input_options(diagnose_cmd, diag_in, "diagnostics", false);
    diagnose_cmd->add_option("--degree", diag_degree, "polynomial degree (1..8)");

    // fit-kernel
    std::string kern_kernel = "gaussian", kern_bandwidth = "cv";
    int kern_degree = 1;
    CLI::App* fit_kernel_cmd = app.add_subcommand("fit-kernel", "kernel / local polynomial fit");
    add_input_options(fit_kernel_cmd, kern_in, "kernel");
    fit_kernel_cmd->add_option("--kernel", kern_kernel,
                               "epanechnikov|minvar|gaussian|tricube (default gaussian)");
    fit_kernel_cmd->add_option("--degree", kern_degree, "local polynomial degree 0..3");
    fit_kernel_cmd->add_option("--bandwidth", kern_bandwidth, "positive value, cv, or rot");

    // fit-spline
    int spl_degree = 3, spl_knots = 10;
    std::string spl_lambda = "gcv";
    CLI::App* fit_spline_cmd = app.add_subcommand("fit-spline", "penalized spline fit");
    add_input_options(fit_spline_cmd, spl_in, "spline");
    fit_spline_cmd->add_option("--degree", spl_degree, "spline degree 1..3 (default 3)");
    fit_spline_cmd->add_option("--knots", spl_knots, "interior knot count (default 10)");
    fit_spline_cmd->add_option("--lambda", spl_lambda, "nonnegative value or gcv");

    // fit-additive
    std::string add_terms, add_smoother = "spline";
    CLI::App* fit_additive_cmd = app.add_subcommand("fit-additive", "additive / partially linear fit");
    add_input_options(fit_additive_cmd, add_in, "additive", false);
    fit_additive_cmd->add_option("--terms", add_terms, "e.g. educ:linear,income:smooth")->required();
    fit_additive_cmd->add_option("--smoother", add_smoother, "spline|kernel (default spline)");

    // fit-sim
    int sim_restarts = 20;
    std::uint64_t sim_seed = 1;
    CLI::App* fit_sim_cmd = app.add_subcommand("fit-sim", "single-index model fit");
    add_input_options(fit_sim_cmd, sim_in, "sim", false);
    fit_sim_cmd->add_option("--restarts", sim_restarts, "random restarts (default 20)");
    fit_sim_cmd->add_option("--seed", sim_seed, "seed for the restarts (default 1)");

    // fit-robust
    double rob_bandwidth = 0.0, rob_c = 1.345;
    int rob_iter = 8;
    std::string rob_scale = "mad", rob_kernel = "gaussian";
    CLI::App* fit_robust_cmd = app.add_subcommand("fit-robust", "robust local-linear fit");
    add_input_options(fit_robust_cmd, rob_in, "robust", false);
    fit_robust_cmd->add_option("--bandwidth", rob_bandwidth, "bandwidth (required)")->required();
    fit_robust_cmd->add_option("--c", rob_c, "Huber tuning constant (default 1.345)");
    fit_robust_cmd->add_option("--max-iter", rob_iter, "reweighting iterations (default 8)");
    fit_robust_cmd->add_option("--scale", rob_scale, "mad|iqr (default mad)");
    fit_robust_cmd->add_option("--kernel", rob_kernel, "kernel name (default gaussian)");

    // simulate
    std::string sim_recipe = "logistic20", sim_poly, sim_out = "simulated.csv";
    int gen_n = 100;
    double gen_noise = 0.05;
    std::uint64_t gen_seed = 1;
    std::vector<std::string> gen_outliers;
    CLI::App* simulate_cmd = app.add_subcommand("simulate", "generate a synthetic dataset");
    simulate_cmd->add_option("--recipe", sim_recipe, "logistic20|linear|sine|poly");
    simulate_cmd->add_option("--poly-coeffs", sim_poly, "c0,c1,... for the poly recipe");
    simulate_cmd->add_option("--n", gen_n, "sample size (default 100)");
    simulate_cmd->add_option("--noise-sd", gen_noise, "gaussian noise sd (default 0.05)");
    simulate_cmd->add_option("--outlier", gen_outliers, "extra x:y row, repeatable");
    simulate_cmd->add_option("--seed", gen_seed, "RNG seed (default 1)");
    simulate_cmd->add_option("--out", sim_out, "output CSV path");

    // compare-robust
    CompareConfig cmp;
    std::vector<std::string> cmp_outliers;
    std::string cmp_out = "compare_robust.tsv";
    CLI::App* compare_cmd =
        app.add_subcommand("compare-robust", "robust vs kernel vs spline over seeded replications");
    compare_cmd->add_option("--seeds", cmp.seeds, "number of replications (default 100)");
    compare_cmd->add_option("--n", cmp.n, "sample size (default 100)");
    compare_cmd->add_option("--noise-sd", cmp.noise_sd, "noise sd (default 0.05)");
    compare_cmd->add_option("--bandwidth", cmp.bandwidth, "shared bandwidth (default 0.046)");
    compare_cmd->add_option("--outlier", cmp_outliers, "override outlier x:y, repeatable");
    compare_cmd->add_option("--mask-lo", cmp.mask_lo, "mask lower edge (default 0.65)");
    compare_cmd->add_option("--mask-hi", cmp.mask_hi, "mask upper edge (default 0.9)");
    compare_cmd->add_option("--out", cmp_out, "output TSV path");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        std::cerr << app.help();
        return 2;
    }

    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return 2;
    }

    try {
        if (fit_poly_cmd->parsed())
            return run_fit_poly(poly_in, poly_degree, false, "fit-poly");
        if (diagnose_cmd->parsed())
            return run_fit_poly(diag_in, diag_degree, true, "diagnose");
        if (fit_kernel_cmd->parsed())
            return run_fit_kernel(kern_in, kern_kernel, kern_degree, kern_bandwidth);
        if (fit_spline_cmd->parsed())
            return run_fit_spline(spl_in, spl_degree, spl_knots, spl_lambda);
        if (fit_additive_cmd->parsed())
            return run_fit_additive(add_in, add_terms, add_smoother);
        if (fit_sim_cmd->parsed()) return run_fit_sim(sim_in, sim_restarts, sim_seed);
        if (fit_robust_cmd->parsed())
            return run_fit_robust(rob_in, rob_bandwidth, rob_c, rob_iter, rob_scale, rob_kernel);
        if (simulate_cmd->parsed())
            return run_simulate(sim_recipe, gen_n, gen_noise, gen_outliers, gen_seed, sim_poly,
                                sim_out);
        if (compare_cmd->parsed()) {
            for (std::size_t i = 0; i < cmp_outliers.size(); ++i) {
                auto colon = cmp_outliers[i].find(':');
                if (colon == std::string::npos)
                    throw UsageError("--outlier must look like x:y");
                if (i == 0) cmp.outliers.clear();
                cmp.outliers.emplace_back(
                    parse_double(cmp_outliers[i].substr(0, colon), "--outlier x"),
                    parse_double(cmp_outliers[i].substr(colon + 1), "--outlier y"));
            }
            return run_compare_robust(cmp, cmp_outliers, cmp_out);
        }
        std::cerr << app.help();
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace smoothkit::cli
