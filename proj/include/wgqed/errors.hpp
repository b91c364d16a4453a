// errors.hpp: exception hierarchy

#pragma once

#include <stdexcept>
#include <string>

namespace wgqed {

// Argument outside the domain of a formula (negative k, omega below the edge, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Numerical failure: unresolved grids, step instability, root-finder trouble,
// tolerance violations detected at run time.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad configuration text or CLI arguments.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace wgqed
