#ifndef AUTOCAL_ERRORS_HPP
#define AUTOCAL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace autocal {

// Bad call or configuration (wrong lengths, invalid flags, overlapping splits).
class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input data (CSV ingestion, schema violations). Messages carry row numbers.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: divergence, singular fit, degenerate response.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Domain violations on math arguments use std::domain_error directly.

} // namespace autocal

#endif
