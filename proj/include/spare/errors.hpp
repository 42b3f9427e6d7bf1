// Copyright 2026 The spare Authors
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

#ifndef SPARE_ERRORS_HPP_
#define SPARE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace spare {

/// A payload or key that violates its declared format.
struct InvalidPayload : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A configuration file or value that fails validation.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A workload whose constraints cannot all be satisfied.
struct InfeasibleSpec : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A token request against a store with nothing to serve.
struct StoreEmpty : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A ledger snapshot that cannot be parsed back.
struct CorruptSnapshot : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A regression design matrix without full column rank.
struct SingularDesign : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A file that cannot be opened, read, or written.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A file whose contents do not match the expected schema.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace spare

#endif  // SPARE_ERRORS_HPP_
