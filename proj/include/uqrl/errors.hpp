// Copyright 2026 The uqrl Authors
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

#ifndef UQRL_ERRORS_HPP_
#define UQRL_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace uqrl {

// Malformed or out-of-domain data (distributions, token sequences, logs).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Bad configuration values (weights, lambda, group size, ...).
class InvalidConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operation attempted in the wrong lifecycle state, e.g. shaping an
// unfinalized trajectory or stepping a terminal environment.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Unknown environment state id.
class InvalidState : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

}  // namespace uqrl

#endif  // UQRL_ERRORS_HPP_
