#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace catcollapse {

// Malformed input: bad coordinates, negative counts, shape mismatches, parse failures.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// An enumeration that would exceed the caller's size cap.
class FeasibilityError : public std::runtime_error {
public:
    FeasibilityError(const std::string& what, std::uint64_t size)
        : std::runtime_error(what), size_(size) {}
    std::uint64_t size() const { return size_; }

private:
    std::uint64_t size_;
};

// Positive mass where a reference model puts none.
class DegeneracyError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace catcollapse
