#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

namespace scm {

/// Discrete simulation time step.
using Tick = std::int64_t;

/// Name of an agent; nonempty and unique within one simulation.
class AgentId {
public:
  AgentId() = default;
  explicit AgentId(std::string name) : name_(std::move(name)) {
    if (name_.empty()) {
      throw std::invalid_argument("AgentId must be nonempty");
    }
  }

  const std::string& str() const noexcept { return name_; }
  bool empty() const noexcept { return name_.empty(); }

  friend auto operator<=>(const AgentId&, const AgentId&) = default;
  friend bool operator==(const AgentId&, const AgentId&) = default;

  friend std::ostream& operator<<(std::ostream& os, const AgentId& id) { return os << id.name_; }

private:
  std::string name_;
};

// Error hierarchy. Every fault named by the module contracts has its own type so
// callers (and tests) can tell them apart; `kind()` is a stable short name.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

#define SCM_DEFINE_ERROR(Name)                                                       \
  class Name : public Error {                                                        \
  public:                                                                            \
    explicit Name(const std::string& what) : Error(#Name, what) {}                   \
  }

SCM_DEFINE_ERROR(DuplicateId);
SCM_DEFINE_ERROR(HorizonExceeded);
SCM_DEFINE_ERROR(ParseError);
SCM_DEFINE_ERROR(InvalidMessage);
SCM_DEFINE_ERROR(IllegalTransition);
SCM_DEFINE_ERROR(DuplicateDeal);
SCM_DEFINE_ERROR(EmptyCohort);
SCM_DEFINE_ERROR(NoSupplierFound);
SCM_DEFINE_ERROR(CoordinatorDown);
SCM_DEFINE_ERROR(NoEligibleHolder);
SCM_DEFINE_ERROR(LengthMismatch);
SCM_DEFINE_ERROR(SeriesTooShort);
SCM_DEFINE_ERROR(EmptyLog);
SCM_DEFINE_ERROR(ValidationError);

#undef SCM_DEFINE_ERROR

}  // namespace scm

template <>
struct std::hash<scm::AgentId> {
  std::size_t operator()(const scm::AgentId& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
