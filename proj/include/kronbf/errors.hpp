// SPDX-License-Identifier: Apache-2.0
//
// kronbf: Kronecker-structured hybrid beamforming for multi-cell mmWave massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>

namespace kronbf {

/// Antenna configuration cannot support the requested nulling: fewer
/// Kronecker factors than interference components plus ⌈log₂K⌉.
class InfeasibleConfiguration : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Factorization or iteration failure (non-HPD matrix, no convergence).
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Bad user-supplied configuration (unknown key, malformed value).
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

} // namespace kronbf
