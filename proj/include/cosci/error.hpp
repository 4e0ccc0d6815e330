#pragma once

#include <stdexcept>
#include <string>

namespace cosci {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid arguments or malformed input data.
class InputError : public Error {
  public:
    using Error::Error;
};

/// A statistical fit (null estimation, Poisson regression) failed.
class FitError : public Error {
  public:
    FitError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

  private:
    std::string stage_;
};

}  // namespace cosci
