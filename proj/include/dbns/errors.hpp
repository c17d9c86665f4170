#pragma once

#include <stdexcept>
#include <string>

namespace dbns {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Summands of a representation do not add up to its target.
class SumMismatchError : public Error {
 public:
  using Error::Error;
};

/// A computation would exceed a configured size, memory or arithmetic cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

class FactorizationError : public Error {
 public:
  using Error::Error;
};

/// Census checkpoint is unreadable, truncated, or fails its content hash.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

/// Structural problem in a serialized certificate; `path` locates the node.
class MalformedCertificate : public Error {
 public:
  MalformedCertificate(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace dbns
