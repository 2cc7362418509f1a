#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wsckit {

// Bad input data: a malformed record, a missing annotation, an invalid file.
// Carries the offending line number (1-based, 0 when unknown) or record id.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what, std::size_t line = 0,
                     std::string record_id = {})
      : std::runtime_error(what), line_(line), record_id_(std::move(record_id)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& record_id() const noexcept { return record_id_; }

 private:
  std::size_t line_;
  std::string record_id_;
};

// Scorer transport or protocol failure.
class ScorerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ProtocolError : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

class HandshakeError : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

}  // namespace wsckit
