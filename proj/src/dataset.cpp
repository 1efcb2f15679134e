#include "smoothkit/dataset.hpp"

#include "smoothkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace smoothkit {

Dataset::Dataset(Eigen::VectorXd y, Eigen::MatrixXd x, std::vector<std::string> names,
                 std::vector<bool> factor_mask)
    : y_(std::move(y)), x_(std::move(x)), names_(std::move(names)),
      factor_mask_(std::move(factor_mask)) {
    const Eigen::Index n = y_.size();
    const Eigen::Index k = x_.cols();
    if (n < 2) throw SizeError("dataset needs at least 2 rows, got " + std::to_string(n));
    if (x_.rows() != n)
        throw SizeError("dataset: covariate rows (" + std::to_string(x_.rows()) +
                        ") do not match response length (" + std::to_string(n) + ")");
    if (static_cast<Eigen::Index>(names_.size()) != k)
        throw SizeError("dataset: expected " + std::to_string(k) + " covariate names");
    if (static_cast<Eigen::Index>(factor_mask_.size()) != k)
        throw SizeError("dataset: factor mask length must equal covariate count");

    for (Eigen::Index i = 0; i < n; ++i)
        if (!std::isfinite(y_[i]))
            throw DomainError("dataset: non-finite response at row " + std::to_string(i + 1));
    for (Eigen::Index j = 0; j < k; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            double v = x_(i, j);
            if (!std::isfinite(v))
                throw DomainError("dataset: non-finite value in column '" + names_[j] +
                                  "' at row " + std::to_string(i + 1));
            if (factor_mask_[j] && v != 0.0 && v != 1.0)
                throw DomainError("dataset: factor column '" + names_[j] +
                                  "' has non-0/1 value at row " + std::to_string(i + 1));
        }
    }
    if (k == 1) x1_ = x_.col(0);
}

const Eigen::VectorXd& Dataset::x() const {
    if (k() != 1)
        throw SizeError("operation needs a single covariate, dataset has " + std::to_string(k()));
    return x1_;
}

Eigen::Index Dataset::column_index(const std::string& name) const {
    for (std::size_t j = 0; j < names_.size(); ++j)
        if (names_[j] == name) return static_cast<Eigen::Index>(j);
    throw UsageError("unknown column '" + name + "'");
}

Dataset Dataset::select(const std::vector<std::string>& columns) const {
    if (columns.empty()) throw UsageError("select: no columns given");
    Eigen::MatrixXd sub(n(), static_cast<Eigen::Index>(columns.size()));
    std::vector<bool> mask(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        Eigen::Index idx = column_index(columns[j]);
        sub.col(static_cast<Eigen::Index>(j)) = x_.col(idx);
        mask[j] = factor_mask_[idx];
    }
    return Dataset(y_, std::move(sub), columns, std::move(mask));
}

void FitCurve::validate() const {
    const Eigen::Index m = grid.size();
    if (fit.size() != m || se.size() != m || lower.size() != m || upper.size() != m)
        throw SizeError("fit curve arrays must have equal length");
    if (deriv && deriv->size() != m)
        throw SizeError("fit curve derivative length must match grid");
    for (Eigen::Index i = 1; i < m; ++i)
        if (!(grid[i] > grid[i - 1]))
            throw DomainError("fit curve grid must be strictly ascending");
    for (Eigen::Index i = 0; i < m; ++i)
        if (lower[i] > fit[i] || fit[i] > upper[i])
            throw DomainError("fit curve bands must bracket the estimate");
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

} // namespace

Dataset load_csv(const std::string& path, const std::string& response,
                 const std::vector<std::string>& factors) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");

    std::string header;
    if (!std::getline(in, header)) throw ParseError("'" + path + "': empty file");
    std::vector<std::string> cols = split_line(header);
    for (auto& c : cols) c = trim(c);

    auto find_col = [&](const std::string& name) -> std::size_t {
        for (std::size_t j = 0; j < cols.size(); ++j)
            if (cols[j] == name) return j;
        throw UsageError("'" + path + "': no column named '" + name + "'");
    };
    std::size_t resp_idx = find_col(response);
    for (const auto& f : factors) find_col(f); // every named factor must exist

    std::vector<std::vector<double>> values(cols.size());
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        std::vector<std::string> cells = split_line(line);
        if (cells.size() != cols.size())
            throw ParseError("'" + path + "' row " + std::to_string(row) + ": expected " +
                             std::to_string(cols.size()) + " cells, got " +
                             std::to_string(cells.size()));
        for (std::size_t j = 0; j < cells.size(); ++j) {
            std::string cell = trim(cells[j]);
            const char* begin = cell.c_str();
            char* end = nullptr;
            double v = std::strtod(begin, &end);
            if (end == begin || *end != '\0')
                throw ParseError("'" + path + "' row " + std::to_string(row) + ", column " +
                                 cols[j] + ": cannot parse '" + cell + "' as a number");
            values[j].push_back(v);
        }
    }
    if (row < 2) throw SizeError("'" + path + "': need at least 2 data rows, got " + std::to_string(row));

    const Eigen::Index n = static_cast<Eigen::Index>(row);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = values[resp_idx][static_cast<std::size_t>(i)];

    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(cols.size() - 1));
    std::vector<std::string> names;
    std::vector<bool> mask;
    Eigen::Index out_j = 0;
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (j == resp_idx) continue;
        for (Eigen::Index i = 0; i < n; ++i) x(i, out_j) = values[j][static_cast<std::size_t>(i)];
        names.push_back(cols[j]);
        mask.push_back(std::find(factors.begin(), factors.end(), cols[j]) != factors.end());
        ++out_j;
    }
    return Dataset(std::move(y), std::move(x), std::move(names), std::move(mask));
}

void emit_curve(const FitCurve& curve, const std::string& path) {
    curve.validate();
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");

    out << "grid\tfit\tse\tlower\tupper";
    if (curve.deriv) out << "\tderiv";
    out << '\n';
    for (Eigen::Index i = 0; i < curve.grid.size(); ++i) {
        out << format_double(curve.grid[i]) << '\t' << format_double(curve.fit[i]) << '\t'
            << format_double(curve.se[i]) << '\t' << format_double(curve.lower[i]) << '\t'
            << format_double(curve.upper[i]);
        if (curve.deriv) out << '\t' << format_double((*curve.deriv)[i]);
        out << '\n';
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

} // namespace smoothkit
