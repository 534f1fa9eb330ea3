#pragma once

#include <stdexcept>
#include <string>

namespace sfeval {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Argument outside its documented range (level, order, index, ...).
class BoundsError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration: unknown layout name, order/layout mismatch,
/// sample-rate mismatch, missing files referenced by a config.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Matrix/signal dimensions do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Failure while loading external data (WAV files, HRIR manifests, layouts).
class IngestError : public Error {
 public:
  using Error::Error;
};

/// A metric could not be computed from the given signals (silent input,
/// zero denominators).
class MetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace sfeval
