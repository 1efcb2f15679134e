#pragma once

#include <stdexcept>
#include <string>

namespace smoothkit {

// Exception taxonomy shared by all modules. Each type maps to one failure
// class so callers (and the CLI exit-code logic) can tell user error from
// computation error.

struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SizeError : std::runtime_error {
    explicit SizeError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Normal matrix singular to working precision with no stabilizer.
struct RankError : std::runtime_error {
    explicit RankError(const std::string& msg) : std::runtime_error(msg) {}
};

// No usable data in the kernel neighborhood of a query point.
struct NeighborhoodError : std::runtime_error {
    explicit NeighborhoodError(const std::string& msg) : std::runtime_error(msg) {}
};

// Smoother consumed all residual degrees of freedom (df_err <= 0).
struct DegeneracyError : std::runtime_error {
    explicit DegeneracyError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SelectionError : std::runtime_error {
    explicit SelectionError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ExtrapolationError : std::runtime_error {
    explicit ExtrapolationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct KnotError : std::runtime_error {
    explicit KnotError(const std::string& msg) : std::runtime_error(msg) {}
};

struct OptimizationError : std::runtime_error {
    explicit OptimizationError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace smoothkit
