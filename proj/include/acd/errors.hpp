#pragma once

#include <stdexcept>
#include <string>

namespace acd {

// Bad caller input: out-of-range ids, dimension mismatches, malformed files.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Operation invoked in the wrong lifecycle state (finished episode, stale cache).
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Configuration that violates a documented invariant.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace acd
