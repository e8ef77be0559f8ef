#pragma once

#include <stdexcept>
#include <string>

namespace qla {

// Argument outside the mathematical domain (r <= 0, coincident points).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Caller broke a documented precondition.
struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct CertificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Activity outside the convergence disc of the KS series.
struct RadiusError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Enumeration or memo table would exceed the work cap.
struct SizeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace qla
