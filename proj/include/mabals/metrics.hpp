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

#ifndef MABALS_METRICS_HPP
#define MABALS_METRICS_HPP

#include <optional>

#include "mabals/numkernel.hpp"

namespace mabals
{
    struct TrialMetrics
    {
        double nmse_channel = 0.0;
        std::optional<double> ser; // empty for receivers that do not detect symbols
        Index iterations = 0;
        bool converged = false;

        bool operator==(const TrialMetrics &) const = default;
    };

    // ||estimate - truth||_F^2 / ||truth||_F^2
    double nmse(const cmat &truth, const cmat &estimate);

    // Nearest Q-PSK point index for every entry; ties go to the lower index.
    Eigen::MatrixXi psk_detect(const cmat &soft, Index mod_order);

    // Symbol error rate over all users and the data slots t >= 1 (slot 0 is the reference).
    double ser(const cmat &x_true, const cmat &soft, Index mod_order);
}

#endif
