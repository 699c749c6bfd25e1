#pragma once

#include <stdexcept>
#include <string>

namespace signstitch {

/// Base for every error raised by the library. The CLI maps any of these to
/// exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values, out-of-range indices, zero lengths.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// A file parsed but violates the document schema (wrong widths, counts, ...).
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or garbled byte stream.
class FormatError : public Error {
 public:
  using Error::Error;
};

class DuplicateGlossError : public SchemaError {
 public:
  explicit DuplicateGlossError(const std::string& gloss)
      : SchemaError("duplicate gloss '" + gloss + "'"), gloss_(gloss) {}
  const std::string& gloss() const { return gloss_; }

 private:
  std::string gloss_;
};

class UnresolvableGlossError : public Error {
 public:
  UnresolvableGlossError(const std::string& gloss, const std::string& why)
      : Error("cannot resolve gloss '" + gloss + "': " + why), gloss_(gloss) {}
  const std::string& gloss() const { return gloss_; }

 private:
  std::string gloss_;
};

/// Filter/rate settings that cannot be realised (e.g. cutoff above Nyquist).
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// A frame whose geometry does not define a body frame.
class DegenerateFrameError : public Error {
 public:
  DegenerateFrameError(std::size_t frame, const std::string& why)
      : Error("degenerate frame " + std::to_string(frame) + ": " + why), frame_(frame) {}
  std::size_t frame() const { return frame_; }

 private:
  std::size_t frame_;
};

}  // namespace signstitch
