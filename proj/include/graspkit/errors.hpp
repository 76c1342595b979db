#pragma once

#include <stdexcept>
#include <string>

namespace graspkit {

/// Base class for all graspkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Geometry / cloud errors.
class EmptyCloudError : public Error {
 public:
  using Error::Error;
};
class TooFewPointsError : public Error {
 public:
  using Error::Error;
};
class DegenerateCloudError : public Error {
 public:
  using Error::Error;
};

// Registration errors.
class NoCorrespondencesError : public Error {
 public:
  using Error::Error;
};
class NotConvergedError : public Error {
 public:
  using Error::Error;
};

// Reachability errors.
class InvalidResolutionError : public Error {
 public:
  using Error::Error;
};
class NoValidBasePoseError : public Error {
 public:
  using Error::Error;
};

// Planner errors.
class DegenerateStandoffError : public Error {
 public:
  using Error::Error;
};
class NotFeasibleError : public Error {
 public:
  using Error::Error;
};
class NoFeasibleGraspError : public Error {
 public:
  using Error::Error;
};

// Supervisor errors.
class OutOfRangeError : public Error {
 public:
  using Error::Error;
};
class EmptyHistoryError : public Error {
 public:
  using Error::Error;
};

// Scene generation errors.
class InvalidRecipeError : public Error {
 public:
  using Error::Error;
};

// File I/O errors.
class FileNotFoundError : public Error {
 public:
  using Error::Error;
};
class MalformedFileError : public Error {
 public:
  using Error::Error;
};
class EmptyAfterFilteringError : public Error {
 public:
  using Error::Error;
};
/// Unknown key, missing mandatory field, or type mismatch in a config/scene file.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace graspkit
