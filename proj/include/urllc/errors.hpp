// Error taxonomy shared by all modules; the CLI maps these to stable exit codes.
#pragma once

#include <stdexcept>
#include <string>

namespace urllc {

// Bad inputs: violated type invariants, malformed scenario files, broken
// constraints (e.g. a scheme that misses its deadline budget). Exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Well-formed problem with an empty feasible set. Exit code 3.
class InfeasibilityError : public std::runtime_error {
public:
    explicit InfeasibilityError(const std::string& what) : std::runtime_error(what) {}
};

// State space too large for exact enumeration; caller should fall back to
// the simulator. Exit code 4.
class StateSpaceError : public std::runtime_error {
public:
    explicit StateSpaceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace urllc
