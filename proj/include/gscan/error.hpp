#pragma once

#include <stdexcept>
#include <string>

namespace gscan {

// Bad input or configuration. The CLI maps these to exit code 1.
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Valid input that could not be processed. The CLI maps these to exit code 2.
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimension : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

class BoundsError : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

class InvalidFamily : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

class DomainError : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

// Truncation width is not an integer number of grid steps.
class AlignmentError : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

class NotApplicable : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

class OversizeError : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

// Monte Carlo configuration would see too few events to say anything.
class UnderpoweredError : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

}  // namespace gscan
