#pragma once

#include <stdexcept>
#include <string>

namespace bvatoms {

/// Bad input: malformed files, out-of-range parameters, precondition failures.
/// The CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An exactness or structural invariant was violated at runtime (exit code 2).
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
}

inline void ensure(bool ok, const std::string& what) {
    if (!ok) throw InvariantViolation(what);
}

}  // namespace bvatoms
