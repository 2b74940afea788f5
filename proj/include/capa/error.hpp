#pragma once

#include <stdexcept>
#include <string>

namespace capa {

// Error categories map onto CLI exit codes: config -> 2, numerical -> 3, io -> 4.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& msg) : Error(msg) {}
};

// Channel evaluation at (near-)coincident points.
class SingularityError : public NumericalError {
 public:
  explicit SingularityError(const std::string& msg) : NumericalError(msg) {}
};

// normalize_power on a (numerically) zero beamformer.
class DegenerateBeamformerError : public NumericalError {
 public:
  explicit DegenerateBeamformerError(const std::string& msg) : NumericalError(msg) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace capa
