#pragma once

#include <stdexcept>
#include <string>

namespace infoscribe {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// ---- raster ----
class MalformedHeader : public Error {
public:
  using Error::Error;
};
class TruncatedPayload : public Error {
public:
  using Error::Error;
};

// ---- file plumbing ----
class IoError : public Error {
public:
  using Error::Error;
};

// ---- segmenter ----
class DimensionMismatch : public Error {
public:
  using Error::Error;
};

// ---- description files ----
class SchemaError : public Error {
public:
  using Error::Error;
};
class VersionError : public Error {
public:
  using Error::Error;
};
class InvariantViolation : public Error {
public:
  using Error::Error;
};
class UnknownLevel : public Error {
public:
  using Error::Error;
};

// ---- lexicon files ----
class DanglingReference : public Error {
public:
  using Error::Error;
};
class EmptyRange : public Error {
public:
  using Error::Error;
};

}  // namespace infoscribe
