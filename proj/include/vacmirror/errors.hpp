#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vacmirror {

// Base of every error thrown by the library. Callers that only care about
// "something in the model went wrong" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// Flux too close to half a flux quantum for the transmon-limit frequency
// formula, or a requested frequency the transmon cannot reach.
class FluxOutOfTransmonRegime : public Error {
 public:
  using Error::Error;
};

class DegenerateRates : public Error {
 public:
  using Error::Error;
};

class StepUnderflow : public Error {
 public:
  using Error::Error;
};

class GridOutsideBand : public Error {
 public:
  using Error::Error;
};

class GridTooCoarse : public Error {
 public:
  using Error::Error;
};

class MissingTrueCoupling : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class FitDiverged : public Error {
 public:
  using Error::Error;
};

class NoZeroCrossing : public Error {
 public:
  using Error::Error;
};

class RequiresGamma1GreaterThanGamma : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or missing input data. `row` is 1-based and counts the header
// line, so it matches what a text editor shows; 0 means "whole file".
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t row = 0)
      : Error(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace vacmirror
