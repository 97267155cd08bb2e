#pragma once

#include <stdexcept>
#include <string>

namespace dfa {

/// Base of every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input, bad flag values, violated preconditions.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Problems with the data itself: unreadable files, duplicates, degenerate panels.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Singular systems, non-stationary parameters, failed factorizations.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace dfa
