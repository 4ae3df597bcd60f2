#pragma once

#include <stdexcept>
#include <string>

namespace rlab {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DomainError : public Error { using Error::Error; };
class RangeError : public Error { using Error::Error; };
class CapabilityError : public Error { using Error::Error; };
class PreconditionError : public Error { using Error::Error; };
class NumericError : public Error { using Error::Error; };
class SpectralError : public Error { using Error::Error; };
class SolvabilityError : public Error {
 public:
  SolvabilityError(const std::string& what, double pairing) : Error(what), pairing(pairing) {}
  double pairing;
};
class AmbiguityError : public Error { using Error::Error; };
class IllPosedError : public Error { using Error::Error; };
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line) : Error(what), line(line) {}
  int line;
};

}  // namespace rlab
