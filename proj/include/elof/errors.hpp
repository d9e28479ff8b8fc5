#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace elof {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Frank constants failing one of k1 > 0, k2 > |k4|, k3 > 0, 2 k1 >= k2 + k4.
class EricksenViolation : public Error {
 public:
  explicit EricksenViolation(std::string inequality)
      : Error("Ericksen inequality violated: " + inequality), inequality_(std::move(inequality)) {}
  const std::string& inequality() const noexcept { return inequality_; }

 private:
  std::string inequality_;
};

class NonUnitDirector : public Error {
 public:
  explicit NonUnitDirector(double deviation)
      : Error("director deviates from unit length by " + std::to_string(deviation)),
        deviation_(deviation) {}
  double deviation() const noexcept { return deviation_; }

 private:
  double deviation_;
};

class NotARotation : public Error {
 public:
  using Error::Error;
};

class BallTooLarge : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class CflViolation : public Error {
 public:
  CflViolation(double dt, double limit)
      : Error("time step " + std::to_string(dt) + " exceeds stability limit " +
              std::to_string(limit)),
        dt_(dt),
        limit_(limit) {}
  double dt() const noexcept { return dt_; }
  double limit() const noexcept { return limit_; }

 private:
  double dt_;
  double limit_;
};

class BlowupDetected : public Error {
 public:
  BlowupDetected(double t, std::string reason)
      : Error("blow-up detected at t=" + std::to_string(t) + ": " + reason), t_(t) {}
  double time() const noexcept { return t_; }

 private:
  double t_;
};

class ResolutionExceeded : public Error {
 public:
  using Error::Error;
};

class CannotCalibrate : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  ValidationError(std::string key, std::string reason)
      : Error(key + ": " + reason), key_(std::move(key)), reason_(std::move(reason)) {}
  const std::string& key() const noexcept { return key_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string key_;
  std::string reason_;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class TruncatedFile : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace elof
