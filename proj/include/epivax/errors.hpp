/**
 * @file errors.hpp
 * @brief Exception hierarchy shared by all epivax modules.
 */
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace epivax {

/** @brief Base class for every error raised by the library. */
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/** @brief A caller broke a documented precondition (shape, grid, state layout). */
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/** @brief An input value failed validation; carries the offending field path. */
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/** @brief Unknown preset, compartment, strategy tag or similar name lookup. */
class LookupError : public Error {
 public:
  using Error::Error;
};

/** @brief Mosquito parameters admit no positive aquatic equilibrium. */
class ViabilityError : public Error {
 public:
  using Error::Error;
};

/** @brief Numerical integration failed at time `time()`. */
class IntegrationError : public Error {
 public:
  static constexpr std::size_t kNoComponent = static_cast<std::size_t>(-1);

  IntegrationError(const std::string& message, double time, std::size_t component = kNoComponent)
      : Error(message), time_(time), component_(component) {}

  [[nodiscard]] double time() const noexcept { return time_; }
  [[nodiscard]] std::size_t component() const noexcept { return component_; }

 private:
  double time_;
  std::size_t component_;
};

/** @brief Malformed scenario document; line/column are 1-based, 0 when unknown. */
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(message), line_(line), column_(column) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }
  [[nodiscard]] std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace epivax
