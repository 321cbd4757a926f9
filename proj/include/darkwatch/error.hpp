// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace darkwatch {

/// Invalid or inconsistent configuration (parameters, schedules, scenarios).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable or malformed input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numeric routine was asked to work on degenerate input
/// (single-class labels, edgeless graphs, rank-zero matrices).
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace darkwatch
