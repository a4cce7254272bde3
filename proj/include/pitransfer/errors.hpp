#pragma once

#include <stdexcept>
#include <string>

namespace pitransfer {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The 3x3 dimension matrix of a basis is not invertible.
struct SingularBasis : Error {
  using Error::Error;
};

/// A basis quantity has a non-positive value; fractional powers would be complex.
struct NonPositiveBasisValue : Error {
  using Error::Error;
};

/// Arithmetic between quantities whose dimensions differ.
struct DimensionMismatch : Error {
  using Error::Error;
};

/// Two contexts do not share the same entry-name schema.
struct SchemaMismatch : Error {
  using Error::Error;
};

/// A policy callable produced a NaN or infinite action.
struct PolicyReturnedNonFinite : Error {
  using Error::Error;
};

/// Value iteration failed to reach the residual tolerance within the sweep budget.
struct NoConvergence : Error {
  using Error::Error;
};

/// A configuration value or input document violates a precondition.
struct InvalidConfig : Error {
  using Error::Error;
};

/// Filesystem read/write failure.
struct IoError : Error {
  using Error::Error;
};

/// A serialized artifact carries an unsupported format version.
struct FormatVersionMismatch : Error {
  using Error::Error;
};

/// A serialized table is truncated or internally inconsistent.
struct CorruptTable : Error {
  using Error::Error;
};

/// A requested plot axis is not part of the report schema.
struct UnknownAxis : Error {
  using Error::Error;
};

/// An operation that needs at least one report row received none.
struct EmptyReport : Error {
  using Error::Error;
};

}  // namespace pitransfer
