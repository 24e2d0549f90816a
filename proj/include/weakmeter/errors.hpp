// Copyright 2026 The weakmeter Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WEAKMETER_ERRORS_HPP
#define WEAKMETER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace weakmeter {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Scenario-file problems: parse failures, invariant violations, bad field
/// values. Messages carry the offending field path (e.g. "system.observable").
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// A truncated continuous-variable meter whose state leaks past the declared
/// cutoff (tail probability above the cutoff level exceeds 1e-10).
class TruncationError : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

/// Post-selection probability below 1e-12: conditional moments, weak values
/// and every formula dividing by <f|rho|f> are undefined.
class DegeneratePostselectionError : public Error {
  public:
    using Error::Error;
};

/// Two routes that must agree algebraically disagreed beyond tolerance.
/// Signals an implementation or input-conditioning bug, never a user error.
class ConsistencyError : public Error {
  public:
    using Error::Error;
};

} // namespace weakmeter

#endif // WEAKMETER_ERRORS_HPP
