#pragma once

#include <stdexcept>
#include <string>

namespace swnu {

/// Base class for every recoverable failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GridMismatch : public Error {
 public:
  explicit GridMismatch(const std::string& what) : Error("grid mismatch: " + what) {}
};

class RealityViolation : public Error {
 public:
  explicit RealityViolation(const std::string& what) : Error("reality violation: " + what) {}
};

class NegativePowerOnNonzeroMean : public Error {
 public:
  explicit NegativePowerOnNonzeroMean(const std::string& what)
      : Error("negative power on nonzero mean: " + what) {}
};

class NonzeroMeanVelocity : public Error {
 public:
  explicit NonzeroMeanVelocity(const std::string& what) : Error("nonzero mean velocity: " + what) {}
};

class DomainViolation : public Error {
 public:
  explicit DomainViolation(const std::string& what) : Error("domain violation: " + what) {}
};

class FrequencyOverflow : public Error {
 public:
  explicit FrequencyOverflow(const std::string& what) : Error("frequency overflow: " + what) {}
};

class NonPositiveDensity : public Error {
 public:
  explicit NonPositiveDensity(const std::string& what) : Error("non-positive density: " + what) {}
};

class CflViolation : public Error {
 public:
  explicit CflViolation(const std::string& what) : Error("CFL violation: " + what) {}
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what) : Error(path + ": " + what) {}
};

}  // namespace swnu
