#pragma once

#include <stdexcept>
#include <string>

namespace eqcycle {

// Requested tolerance could not be met (quadrature, orbit closure, ...).
struct AccuracyError : std::runtime_error {
  explicit AccuracyError(const std::string& what) : std::runtime_error(what) {}
};

// Root finding / bisection / shooting failed to converge.
struct SearchError : std::runtime_error {
  explicit SearchError(const std::string& what) : std::runtime_error(what) {}
};

// The ODE solver gave up (step underflow, step budget, rhs failure).
struct IntegrationError : std::runtime_error {
  explicit IntegrationError(const std::string& what) : std::runtime_error(what) {}
};

// A multi-chart trace ran out of budget before reaching its target regime.
struct TraceError : std::runtime_error {
  std::string last_chart;
  TraceError(const std::string& what, std::string chart)
      : std::runtime_error(what), last_chart(std::move(chart)) {}
};

}  // namespace eqcycle
