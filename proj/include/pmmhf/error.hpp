#ifndef PMMHF_ERROR_HPP
#define PMMHF_ERROR_HPP

#include <stdexcept>
#include <string>

namespace pmmhf {

// Every error raised by the library derives from Error so the CLI can map
// categories onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameter or argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed call: size mismatch, empty input, non-finite data.
class InputError : public Error {
 public:
  using Error::Error;
};

// Particle weights collapsed to zero.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace pmmhf

#endif
