#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace kpnf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two fields (or a field and a context) live on different lattice boxes.
class BoxMismatch : public Error {
 public:
  using Error::Error;
};

/// Overflow or NaN during time integration. Carries the ensemble sample
/// index when raised from inside an ensemble run, -1 otherwise.
class NonFinite : public Error {
 public:
  explicit NonFinite(const std::string& what, std::int64_t sample = -1)
      : Error(what), sample_(sample) {}
  std::int64_t sample_index() const { return sample_; }

 private:
  std::int64_t sample_;
};

class NonContraction : public Error {
 public:
  using Error::Error;
};

class MaxIterExceeded : public Error {
 public:
  using Error::Error;
};

class TooFewSamples : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration; `key()` names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace kpnf
