#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

namespace smoothkit {

// Immutable numeric table: one response column, k covariate columns.
// Construction validates and throws; an instance is safe to share across
// threads.
class Dataset {
public:
    Dataset(Eigen::VectorXd y, Eigen::MatrixXd x, std::vector<std::string> names,
            std::vector<bool> factor_mask);

    Eigen::Index n() const { return y_.size(); }
    Eigen::Index k() const { return x_.cols(); }
    const Eigen::VectorXd& y() const { return y_; }
    const Eigen::MatrixXd& covariates() const { return x_; }
    const std::vector<std::string>& names() const { return names_; }
    const std::vector<bool>& factor_mask() const { return factor_mask_; }

    // Single-covariate accessor; throws SizeError when k != 1.
    const Eigen::VectorXd& x() const;

    Eigen::Index column_index(const std::string& name) const; // throws on unknown name

    // New dataset restricted to the named covariates, in the given order.
    Dataset select(const std::vector<std::string>& columns) const;

private:
    Eigen::VectorXd y_;
    Eigen::MatrixXd x_;
    Eigen::VectorXd x1_; // cached copy of the single covariate when k == 1
    std::vector<std::string> names_;
    std::vector<bool> factor_mask_;
};

// Fitted curve on an ascending query grid with pointwise standard errors and
// 95% band endpoints; `deriv` present when the smoother estimates f'.
struct FitCurve {
    Eigen::VectorXd grid;
    Eigen::VectorXd fit;
    Eigen::VectorXd se;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    std::optional<Eigen::VectorXd> deriv;

    // Enforces: strictly ascending grid, equal lengths, lower <= fit <= upper.
    void validate() const;
};

// CSV ingestion: comma separator, one header line, '.' decimal, no quoting.
// Columns listed in `factors` must contain only 0/1 and are flagged in the
// dataset's factor mask. Covariates keep file order; rows keep file order.
Dataset load_csv(const std::string& path, const std::string& response,
                 const std::vector<std::string>& factors = {});

// Writes tab-separated grid/fit/se/lower/upper[/deriv] with one header line
// at full round-trip precision.
void emit_curve(const FitCurve& curve, const std::string& path);

// Shared numeric formatting: shortest text that round-trips a double
// (17 significant digits).
std::string format_double(double v);

} // namespace smoothkit
