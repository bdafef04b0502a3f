#pragma once

#include <stdexcept>
#include <string>

namespace fellb {

// Base error for everything thrown by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Structurally malformed input: bad dimensions, dangling references,
// unparsable scalars, tables that are not functions, and so on.
struct InvalidInstance : Error {
    explicit InvalidInstance(const std::string& what) : Error(what) {}
};

// Well-formed input the engine declines to process, with a concrete
// witness (e.g. a central idempotent not rational over Q(i), reported
// through the irreducible factor that blocks the split).
struct UnsupportedInstance : Error {
    std::string witness;
    UnsupportedInstance(const std::string& what, std::string witness_)
        : Error(what), witness(std::move(witness_)) {}
};

}  // namespace fellb
