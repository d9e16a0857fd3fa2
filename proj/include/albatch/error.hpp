#pragma once

#include <stdexcept>

namespace albatch {

/// Bad user-supplied input: malformed files, invalid config values, missing paths.
/// The command-line front end maps this to exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace albatch
