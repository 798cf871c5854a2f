#pragma once

#include <stdexcept>
#include <string>

namespace ehcr {

class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// The PU-SU sensing channel is too weak for the detector targets to be met.
class UnsensableChannel : public Error
{
  public:
    using Error::Error;
};

// Zero gain: region G_1, nothing is transmitted.
class NoTransmission : public Error
{
  public:
    using Error::Error;
};

// Bayes normalizer vanished for the reported observation.
class InconsistentObservation : public Error
{
  public:
    using Error::Error;
};

// Model too large for exact treatment (joint chain or optimal recursion).
class InfeasibleModel : public Error
{
  public:
    using Error::Error;
};

class InvariantViolation : public Error
{
  public:
    using Error::Error;
};

class ConfigError : public Error
{
  public:
    ConfigError(std::string key, const std::string& what)
        : Error(key.empty() ? what : key + ": " + what), key_(std::move(key))
    {
    }

    const std::string& key() const noexcept { return key_; }

  private:
    std::string key_;
};

}  // namespace ehcr
