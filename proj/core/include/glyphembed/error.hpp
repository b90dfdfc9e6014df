// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace glyphembed {

/// A caller broke an operation's precondition (shape mismatch, index out of range, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Invalid configuration: bad keys, impossible hyperparameters, incompatible checkpoints.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input data (TSV corpora, graphs, fonts, checkpoints).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
[[noreturn]] inline void contract_failure(const std::string& what) { throw ContractViolation(what); }
}  // namespace detail

}  // namespace glyphembed

#define GLYPHEMBED_EXPECT(cond, msg)                                   \
  do {                                                                \
    if (!(cond)) ::glyphembed::detail::contract_failure(std::string(msg)); \
  } while (false)
