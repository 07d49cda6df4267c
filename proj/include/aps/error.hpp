#pragma once

#include <stdexcept>
#include <string>

namespace aps {

/// Root of every error raised by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class OutOfRangeError : public Error {
public:
  using Error::Error;
};

/// A value lies outside the domain of a function (e.g. a probability not in (0,1)).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Caller violated an input contract: mismatched lengths, degenerate boxes, etc.
class ContractError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class InsufficientDataError : public Error {
public:
  using Error::Error;
};

class DegenerateDataError : public Error {
public:
  using Error::Error;
};

/// No level of the pyramid holds a point inside the instance box.
class NoCandidatesError : public Error {
public:
  using Error::Error;
};

class UndefinedMetricError : public Error {
public:
  using Error::Error;
};

} // namespace aps
