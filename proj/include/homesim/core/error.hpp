#pragma once

#include <stdexcept>
#include <string>

namespace homesim {

/// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: out-of-range parameters, unknown identifiers, invalid configs.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Catalog file missing, unparsable, or violating its schema.
class CatalogError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A stored artifact no longer matches its recorded digest.
class IntegrityError : public Error {
 public:
  IntegrityError(std::string artifact, const std::string& what)
      : Error(what), artifact_(std::move(artifact)) {}

  const std::string& artifact() const noexcept { return artifact_; }

 private:
  std::string artifact_;
};

/// Archive or index written by an incompatible engine/format version.
class VersionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Embedding provider failed; never silently replaced by a fallback.
class ProviderError : public Error {
 public:
  using Error::Error;
};

}  // namespace homesim
