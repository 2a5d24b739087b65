#ifndef FAIRLENS_ERROR_HPP
#define FAIRLENS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace fairlens {

/// Input data that cannot be parsed (malformed CSV, bad schema, bad JSON).
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// A precondition violation: bad argument values, missing columns, invalid specs.
class InvalidArgument : public std::invalid_argument {
public:
    explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

/// A requested construction has no solution (non-PSD correlation matrix,
/// no threshold within tolerance).
class Infeasible : public std::runtime_error {
public:
    explicit Infeasible(const std::string& what) : std::runtime_error(what) {}
};

} // namespace fairlens

#endif
