#pragma once

#include <stdexcept>
#include <string>

namespace toponet {

// Error categories map onto CLI exit codes: config = 2, data = 3, numerical = 4.

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The regression route for partial correlation requires a full-rank covariance;
// the precision-matrix route stays applicable and is the production path.
class OracleInapplicableError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Extended-persistence reduction refuses graphs above its configured size bound.
class OracleBoundError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace toponet
