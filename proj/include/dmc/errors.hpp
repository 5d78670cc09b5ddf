#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dmc {

// Malformed input: JSON structure, unknown names, bad probability literals,
// spec syntax and typing errors. `position` is a byte offset when known.
class parse_error : public std::runtime_error {
 public:
  explicit parse_error(const std::string& what, std::size_t position = npos)
      : std::runtime_error(what), position_(position) {}

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

// A call whose arguments fall outside the operation's domain
// (state not owned by agent, projection onto a non-subset, ...).
class domain_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Explicit state-space construction exceeded its budget.
class state_budget_exceeded : public std::runtime_error {
 public:
  state_budget_exceeded(const std::string& what, std::size_t explored)
      : std::runtime_error(what), explored_(explored) {}
  std::size_t states_explored() const noexcept { return explored_; }

 private:
  std::size_t explored_;
};

// Trajectory sampling hit a deadlock or its per-sample event cap.
class sampling_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File could not be read or written.
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dmc
