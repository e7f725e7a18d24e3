#pragma once

#include <stdexcept>
#include <string>

namespace faithful {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid model/campaign configuration (e.g. CA saliency without ST dims).
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Bad caller-supplied data: empty sequences, mismatched lengths, out-of-range values.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Non-finite activations or degenerate outputs. Carries the offending layer.
class NumericError : public Error {
 public:
  NumericError(std::string layer, const std::string& what)
      : Error(what + " (layer: " + layer + ")"), layer_(std::move(layer)) {}
  const std::string& layer() const noexcept { return layer_; }

 private:
  std::string layer_;
};

class PersistenceError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class OrchestrationError : public Error {
 public:
  using Error::Error;
};

}  // namespace faithful
