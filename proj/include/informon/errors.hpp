#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace informon {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Tapestry mutation errors.
class SealedTapestry : public Error {
 public:
  SealedTapestry() : Error("tapestry is sealed") {}
};

class DuplicateLabel : public Error {
 public:
  explicit DuplicateLabel(const std::string& label) : Error("duplicate informon label: " + label) {}
};

class DuplicateSite : public Error {
 public:
  explicit DuplicateSite(const std::string& what) : Error("duplicate site under exclusive coupling: " + what) {}
};

class GenerationMismatch : public Error {
 public:
  GenerationMismatch(int expected, int got)
      : Error("generation mismatch: expected " + std::to_string(expected) + ", got " + std::to_string(got)) {}
};

// Dynamics errors.
class EmptyPrior : public Error {
 public:
  EmptyPrior() : Error("prior tapestry is empty") {}
};

class NoAdmissibleTarget : public Error {
 public:
  NoAdmissibleTarget() : Error("no admissible target site within the distance bound") {}
};

// Enumeration exceeded its configured cap; the caller must shrink the instance.
class CapExceeded : public Error {
 public:
  CapExceeded(const std::string& what, std::size_t cap)
      : Error(what + " exceeds enumeration cap of " + std::to_string(cap)) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t position)
      : Error("parse error at " + std::to_string(position) + ": " + msg), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class UnknownRule : public Error {
 public:
  explicit UnknownRule(const std::string& name) : Error("unknown coupling rule: " + name) {}
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace informon
