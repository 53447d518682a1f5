#pragma once

#include <stdexcept>
#include <string>

namespace oscphase {

// Base class for all library errors. Subclasses map 1:1 onto the error
// categories surfaced by the CLI exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidInput : Error {
  using Error::Error;
};
struct ShapeMismatch : Error {
  using Error::Error;
};
struct TooShort : Error {
  using Error::Error;
};
struct DegenerateAxis : Error {
  using Error::Error;
};
struct DegenerateTrajectory : Error {
  using Error::Error;
};
struct DegenerateSignal : Error {
  using Error::Error;
};
struct DegeneratePhase : Error {
  using Error::Error;
};
struct DegenerateReference : Error {
  using Error::Error;
};
struct InvalidCache : Error {
  using Error::Error;
};
struct InvalidConfig : Error {
  using Error::Error;
};
struct InvalidManifest : Error {
  using Error::Error;
};
struct MissingArtifacts : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

}  // namespace oscphase
