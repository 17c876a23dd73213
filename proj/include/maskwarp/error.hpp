#pragma once

#include <stdexcept>
#include <string>

namespace maskwarp {

// Base for every error raised by the library. Subclasses let callers map
// failures onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument, violated precondition, or mismatched dimensions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// File missing, unreadable, or malformed.
class IoError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or gradient during optimization. Carries the loss trace
// accumulated up to the failure as CSV text.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, std::string trace_csv)
      : Error(what), trace_csv_(std::move(trace_csv)) {}

  const std::string& trace_csv() const noexcept { return trace_csv_; }

 private:
  std::string trace_csv_;
};

}  // namespace maskwarp
