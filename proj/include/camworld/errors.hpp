#pragma once

#include <stdexcept>
#include <string>

namespace camworld {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File missing or unreadable.
struct IoError : Error {
  using Error::Error;
};

// File parsed but does not match the expected schema.
struct SchemaError : Error {
  using Error::Error;
};

// Well-formed data violating a documented invariant.
struct ValidationError : Error {
  using Error::Error;
};

// Projection failures (point at or behind the camera plane, empty depth, ...).
struct CameraError : Error {
  using Error::Error;
};

// Optimizer-level failures (non-finite loss at init, no feasible candidate, ...).
struct FitError : Error {
  using Error::Error;
};

}  // namespace camworld
