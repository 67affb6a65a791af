#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lexigen {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Malformed input; line is 1-based, 0 when not tied to a line.
class ParseError : public Error {
  public:
    ParseError(std::size_t line, const std::string &what)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

class EncodingError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

// Terminal provider failure: bad status, missing credential, or retries exhausted.
class ProviderError : public Error {
  public:
    using Error::Error;
};

// Failure worth retrying (network, timeout, 429, 5xx).
class TransientError : public ProviderError {
  public:
    using ProviderError::ProviderError;
};

class EmptyEvaluation : public Error {
  public:
    using Error::Error;
};

} // namespace lexigen
