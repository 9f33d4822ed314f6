#pragma once

#include <stdexcept>
#include <string>

namespace tvn {

// Base class for every error raised by the library. The CLI maps each
// subclass to its own exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGenomeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Remote endpoint unreachable, timed out or answered with a non-2xx status.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Endpoint answered, but the payload violates the wire contract.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// A pipeline stage could not produce a result (e.g. no candidate survived).
class PipelineError : public Error {
 public:
  using Error::Error;
};

}  // namespace tvn
