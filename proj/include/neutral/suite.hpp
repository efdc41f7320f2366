#pragma once

#include <optional>
#include <string>
#include <vector>

#include "neutral/config.hpp"

namespace neutral {

enum class Gate { at_most, at_least, within, report };

struct CheckResult {
  std::string name;
  std::string module;
  std::optional<double> value;  // empty when there is nothing to measure (e.g. below the floor)
  Gate gate = Gate::report;
  double lower = 0.0;  // at_least and within
  double upper = 0.0;  // at_most and within
  bool passed = true;
  std::string note;
};

struct VerifyReport {
  RunConfig config;
  std::vector<CheckResult> checks;

  bool passed() const;
  int failures() const;
};

/// Runs every invariant suite against the configured shape and mode together
/// with the fixed reference cases (circle, ellipse, sphere, droplet). The
/// result depends only on the configuration.
VerifyReport run_verify(const RunConfig& config);

/// Deterministic JSON rendering (fixed key order, round-trip doubles, no timestamps).
std::string to_json(const VerifyReport& report);

}  // namespace neutral
