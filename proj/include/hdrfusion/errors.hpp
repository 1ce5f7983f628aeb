#pragma once

#include <stdexcept>
#include <string>

namespace hdrfusion {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Radiometric calibration could not be completed.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

/// Point lies on or behind the camera plane.
class BehindCamera : public Error {
 public:
  BehindCamera() : Error("point is behind the camera") {}
};

/// Depth is zero, negative or missing.
class InvalidDepth : public Error {
 public:
  InvalidDepth() : Error("invalid depth") {}
};

/// Too few correspondences between reference and live frame.
class InsufficientOverlap : public Error {
 public:
  explicit InsufficientOverlap(double fraction)
      : Error("insufficient overlap (valid fraction " + std::to_string(fraction) + ")"),
        fraction_(fraction) {}
  double fraction() const { return fraction_; }

 private:
  double fraction_;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace hdrfusion
