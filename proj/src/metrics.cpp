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

#include "mabals/metrics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mabals
{
    double nmse(const cmat &truth, const cmat &estimate)
    {
        if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols())
            throw std::invalid_argument("nmse: shape mismatch");
        const double ref = truth.squaredNorm();
        if (!(ref > 0.0))
            throw std::invalid_argument("nmse: reference matrix has zero norm");
        return (estimate - truth).squaredNorm() / ref;
    }

    Eigen::MatrixXi psk_detect(const cmat &soft, Index mod_order)
    {
        if (mod_order < 2)
            throw std::invalid_argument("psk_detect: mod_order must be at least 2");
        const double bins_per_rad = static_cast<double>(mod_order) / (2.0 * std::numbers::pi);
        Eigen::MatrixXi out(soft.rows(), soft.cols());
        for (Index j = 0; j < soft.cols(); ++j)
            for (Index i = 0; i < soft.rows(); ++i)
            {
                // ceil(u - 1/2) rounds half-way angles down to the lower index
                const double u = std::arg(soft(i, j)) * bins_per_rad;
                auto idx = static_cast<Index>(std::ceil(u - 0.5));
                idx = ((idx % mod_order) + mod_order) % mod_order;
                out(i, j) = static_cast<int>(idx);
            }
        return out;
    }

    double ser(const cmat &x_true, const cmat &soft, Index mod_order)
    {
        if (x_true.rows() != soft.rows() || x_true.cols() != soft.cols())
            throw std::invalid_argument("ser: shape mismatch");
        if (x_true.cols() < 2)
            throw std::invalid_argument("ser: need at least one data slot besides the reference slot");

        const Index data_slots = x_true.cols() - 1;
        const Eigen::MatrixXi sent = psk_detect(x_true.rightCols(data_slots), mod_order);
        const Eigen::MatrixXi got = psk_detect(soft.rightCols(data_slots), mod_order);
        const Index errors = (sent.array() != got.array()).count();
        return static_cast<double>(errors) / static_cast<double>(sent.size());
    }
}
