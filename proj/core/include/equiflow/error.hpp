#pragma once

#include <stdexcept>
#include <string>

namespace equiflow {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A file cannot be read or written.
class FileError : public Error
{
public:
  using Error::Error;
};

/// Input document does not conform to its file format.
class SchemaError : public Error
{
public:
  using Error::Error;
};

/// Demand classes of a region are not a partition (duplicate class entries).
class PartitionError : public Error
{
public:
  using Error::Error;
};

/// No origin-to-destination path exists in the admissible arc set.
class DisconnectedDemand : public Error
{
public:
  using Error::Error;
};

/// A problem cannot be assembled from the given network/demand pair.
class InfeasibleStructure : public Error
{
public:
  using Error::Error;
};

/// Scenario or solver parameters are out of range.
class ConfigError : public Error
{
public:
  using Error::Error;
};

/// Instance exceeds the enumeration limits of the brute-force oracle.
class TooLarge : public Error
{
public:
  using Error::Error;
};

/// Arc flows do not conserve demand closely enough to be decomposed.
class ConservationViolation : public Error
{
public:
  using Error::Error;
};

/// Grid-city generator spec is invalid.
class SpecError : public Error
{
public:
  using Error::Error;
};

}  // namespace equiflow
