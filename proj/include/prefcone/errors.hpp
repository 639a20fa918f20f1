#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace prefcone {

/// Input that violates a domain invariant. `where` is a JSON pointer when the
/// input came from a document, otherwise a short path such as "attribute X2".
class ValidationError : public std::runtime_error {
  public:
    ValidationError(std::string where, const std::string& rule)
        : std::runtime_error(where.empty() ? rule : where + ": " + rule),
          where_(std::move(where)), rule_(rule) {}

    const std::string& where() const noexcept { return where_; }
    const std::string& rule() const noexcept { return rule_; }

  private:
    std::string where_;
    std::string rule_;
};

/// A precondition of an operation was not met by the caller.
class ContractViolation : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Raised when a query needs a consistent preference cone and does not have one.
class InconsistentPreferences : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Requested generator enumeration exceeds the configured dimension cap.
class DimensionCapExceeded : public std::runtime_error {
  public:
    DimensionCapExceeded(std::size_t dimension, std::size_t cap)
        : std::runtime_error("dimension " + std::to_string(dimension) + " exceeds generator cap " +
                             std::to_string(cap) + "; use the LP path"),
          dimension_(dimension), cap_(cap) {}

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t cap() const noexcept { return cap_; }

  private:
    std::size_t dimension_;
    std::size_t cap_;
};

}  // namespace prefcone
