#pragma once

#include <stdexcept>
#include <string>

namespace ztsfc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad or inconsistent configuration, detected at load time.
struct ConfigError : Error {
  using Error::Error;
};

// Inputs that violate a policy-level contract (unknown function id, duplicate
// passed function, ...).
struct PolicyViolation : Error {
  using Error::Error;
};

// A function was applied twice to the same request; signals a chain loop.
struct IdempotencyError : Error {
  using Error::Error;
};

// Malformed chain header material.
struct CodecError : Error {
  using Error::Error;
};

// Misused or unavailable key material. Authenticated-decryption failures are
// not exceptions; they are reported as absent values.
struct CryptoError : Error {
  using Error::Error;
};

// A deployment component failed to come up (bad config, dead process, port
// conflict). Distinguished so the harness can exit 2 instead of 1.
struct StartupError : Error {
  using Error::Error;
};

}  // namespace ztsfc
