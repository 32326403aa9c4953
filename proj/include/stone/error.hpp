#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace stone {

enum class ErrorCode : int {
  InvalidDimension = 1,
  InvalidWindow = 2,
  IncompletePreview = 3,
  ResourceLimit = 4,
  Divergence = 5,
  NotApplicable = 6,
  Io = 7,
  Format = 8,
  InvalidArgument = 9,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

/// Raised when a re-binned window leaves some coefficient groups empty.
/// Carries the empty group indices so callers can report them.
class IncompletePreviewError : public Error {
public:
  IncompletePreviewError(std::vector<std::size_t> empty_groups);
  const std::vector<std::size_t>& empty_groups() const noexcept { return empty_; }

private:
  std::vector<std::size_t> empty_;
};

class DivergenceError : public Error {
public:
  DivergenceError(std::size_t iteration);
  std::size_t iteration() const noexcept { return iteration_; }

private:
  std::size_t iteration_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace stone
