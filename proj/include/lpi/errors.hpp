#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpi {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input that cannot be normalized or sampled (e.g. all points identical).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable file contents (bad magic, truncated data, parse errors).
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// The kNN graph has more than one connected component.
class DisconnectedGraph : public Error {
 public:
  DisconnectedGraph(const std::string& what, std::vector<std::size_t> component_sizes)
      : Error(what), component_sizes_(std::move(component_sizes)) {}

  const std::vector<std::size_t>& component_sizes() const { return component_sizes_; }

 private:
  std::vector<std::size_t> component_sizes_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class EmptyBatch : public Error {
 public:
  using Error::Error;
};

/// Marching cubes found no zero crossing. Not a failure of the extractor.
class EmptyMesh : public Error {
 public:
  using Error::Error;
};

class DegeneratePart : public Error {
 public:
  using Error::Error;
};

class DegenerateMesh : public Error {
 public:
  using Error::Error;
};

class NonWatertight : public Error {
 public:
  using Error::Error;
};

}  // namespace lpi
