#pragma once

#include <stdexcept>
#include <string>

namespace qab {

// Argument/precondition violations are reported with std::invalid_argument.
// The two types below separate bad input data from numerical breakdown so the
// CLI can map them onto distinct exit codes.

/// Malformed or out-of-domain input data (file formats, signal contents).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative kernel failed to converge or produced non-finite output.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace qab
