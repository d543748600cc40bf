#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qtrap {

/// Input object violates one of its invariants (invalid measure, non-unitary U, ...).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the documented domain of an operation.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Request exceeds the memory/size budget of an operation.
class ResourceError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Principal-value evaluation point too close to an atom.
class SingularityError : public std::domain_error {
public:
    SingularityError(const std::string& what, std::size_t atom_index)
        : std::domain_error(what), atom_index_(atom_index) {}

    std::size_t atom_index() const noexcept { return atom_index_; }

private:
    std::size_t atom_index_;
};

/// Moment data whose Toeplitz Gram matrix is not positive semidefinite.
class InvalidMomentsError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace qtrap
