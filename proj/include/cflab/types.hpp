#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace cflab {

using Symbol = std::complex<double>;

// Raised when an exact computation would exceed the enumeration cap.
class FeasibilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when a simulation exceeds its configured evaluation budget.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parameters that make a closed-form expression undefined (e.g. gamma = 0
// in the asymptotic refined bound).
class SingularParametersError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

} // namespace cflab
