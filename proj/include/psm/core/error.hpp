#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace psm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument outside a tolerated range.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Rejected configuration; `key_path` names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string key_path, const std::string& what)
      : Error(key_path.empty() ? what : key_path + ": " + what), key_path_(std::move(key_path)) {}

  [[nodiscard]] const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

/// Malformed mesh or cache file.
class ParseError : public Error {
 public:
  ParseError(std::size_t byte_offset, const std::string& what)
      : Error("parse error at byte " + std::to_string(byte_offset) + ": " + what), offset_(byte_offset) {}

  [[nodiscard]] std::size_t byte_offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Mesh is not a closed orientable surface.
class TopologyError : public Error {
 public:
  using Error::Error;
};

/// A requested allocation would exceed the configured cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Non-physical lattice state (rho <= 0 or non-finite PDFs).
class InvalidStateError : public Error {
 public:
  InvalidStateError(const std::string& what, std::int64_t x, std::int64_t y, std::int64_t z,
                    std::int64_t step = -1)
      : Error(what + " at cell (" + std::to_string(x) + "," + std::to_string(y) + "," + std::to_string(z) + ")" +
              (step >= 0 ? " in step " + std::to_string(step) : std::string{})),
        x_(x), y_(y), z_(z), step_(step) {}

  [[nodiscard]] std::int64_t x() const noexcept { return x_; }
  [[nodiscard]] std::int64_t y() const noexcept { return y_; }
  [[nodiscard]] std::int64_t z() const noexcept { return z_; }
  [[nodiscard]] std::int64_t step() const noexcept { return step_; }

 private:
  std::int64_t x_, y_, z_, step_;
};

/// I/O failure on a named path.
class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what) : Error(path + ": " + what), path_(path) {}
  [[nodiscard]] const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace psm
