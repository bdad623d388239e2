#pragma once

#include <stdexcept>
#include <string>

namespace spinlat {

// Bad or missing configuration input (CLI maps this to exit code 2).
struct schema_error : std::runtime_error {
    explicit schema_error(const std::string& what) : std::runtime_error(what) {}
};

// A precondition of an operation is violated: uniformization rate too small,
// enumeration size caps exceeded, geometry mismatch (CLI exit code 3).
struct contract_error : std::runtime_error {
    explicit contract_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spinlat
