// SPDX-License-Identifier: Apache-2.0
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

#ifndef MABALS_ERRORS_HPP
#define MABALS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mabals
{
    // Scenario dimensions or experiment description are invalid.
    class ConfigError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // The least-squares uniqueness conditions TMP >= NK or PM >= K do not hold.
    class IdentifiabilityError : public std::domain_error
    {
    public:
        using std::domain_error::domain_error;
    };

    // SVD failure, non-finite cost, degenerate estimate.
    class NumericalError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };
}

#endif
