#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bipcover {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Arguments outside an operation's domain (j > i, negative time, k too small, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// A fast-path evaluation whose cancellation estimate exceeded the tolerance.
class UnstableEvaluation : public Error {
public:
    UnstableEvaluation(const std::string& what, double raw, double error_estimate)
        : Error(what), raw_(raw), error_estimate_(error_estimate) {}

    double raw() const noexcept { return raw_; }
    double error_estimate() const noexcept { return error_estimate_; }

private:
    double raw_;
    double error_estimate_;
};

// A gene count beyond the representable / bracketed range.
class Overflow : public Error {
public:
    using Error::Error;
};

class NeverSatisfiable : public Error {
public:
    using Error::Error;
};

class AlreadyBalanced : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

// Raised when a cover is not reached within the gene cap. Carries how many
// species bipartitions had been seen when the cap was hit.
class CapExceeded : public Error {
public:
    CapExceeded(const std::string& what, std::uint64_t genes, std::size_t covered, std::size_t total)
        : Error(what), genes_(genes), covered_(covered), total_(total) {}

    std::uint64_t genes() const noexcept { return genes_; }
    std::size_t covered() const noexcept { return covered_; }
    std::size_t total() const noexcept { return total_; }

private:
    std::uint64_t genes_;
    std::size_t covered_;
    std::size_t total_;
};

}  // namespace bipcover
