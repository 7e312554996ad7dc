#pragma once

#include <stdexcept>
#include <string>

namespace scene {

/// Violated precondition or invariant of a public operation.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Bad input data: unreadable files, malformed manifests, inconsistent specs.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A region whose descriptor carries no mass (or no full block).
class DegenerateRegionError : public DataError {
public:
    DegenerateRegionError(const std::string& what, long region_id = -1)
        : DataError(what), region_id_(region_id) {}
    long region_id() const noexcept { return region_id_; }

private:
    long region_id_;
};

/// Non-finite likelihood or another numerical breakdown.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace scene
