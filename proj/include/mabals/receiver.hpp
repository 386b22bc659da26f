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

// Semi-blind receiver: bilinear alternating least squares over the channel H
// and the symbols X, with the block code C and the switching schedule known.

#ifndef MABALS_RECEIVER_HPP
#define MABALS_RECEIVER_HPP

#include <optional>
#include <utility>
#include <vector>

#include "mabals/airmodel.hpp"

namespace mabals
{
    enum class InitPolicy
    {
        random_symbols, // Q-PSK draws from the caller's stream
        ground_truth    // tests only: start from BalsOptions::initial_symbols
    };

    // How the channel half-step solves min ||y - W h||.
    enum class ChannelSolver
    {
        // Every observation row of W touches a single port row of H, so the
        // problem splits into N independent K-unknown problems. Same minimum
        // norm solution as pinv(W) * y at a fraction of the cost.
        port_decoupled,
        // Literal pinv(W) * y on the full TMP x NK sensing matrix.
        sensing_matrix
    };

    struct BalsOptions
    {
        double delta = 1e-6;
        Index max_iters = 500;
        InitPolicy init_policy = InitPolicy::random_symbols;
        Index mod_order = 16; // alphabet for the random start
        std::optional<cmat> initial_symbols;
        ChannelSolver channel_solver = ChannelSolver::port_decoupled;
        // Independent random starts; the one with the lowest final cost is kept.
        // Ignored (treated as 1) for the ground-truth start.
        Index n_starts = 1;
    };

    struct BalsResult
    {
        cmat h_hat;                       // N x K
        cmat x_hat;                       // K x T, soft
        std::vector<double> cost_history; // eps(1), eps(2), ...
        Index iterations = 0;       // of the kept start
        Index total_iterations = 0; // over all starts
        Index start = 0;            // index of the kept start
        bool converged = false;
        Index truncated_singular_values = 0; // summed over every pseudoinverse taken
    };

    // W = [(X^T kron I_M)(D_p(C) kron S_p)]_p stacked over blocks, TMP x NK.
    cmat build_w(const cmat &x, const cmat &c, const SwitchingSchedule &s);

    // h = pinv(W) y, reshaped to N x K. Throws IdentifiabilityError if W has fewer rows than columns.
    cmat estimate_channel(const cmat &w, const cvec &y, Index n_ports, Index *truncated = nullptr);

    // Same least-squares problem as estimate_channel(build_w(x, c, s), y.vectorized(), N),
    // solved port by port.
    cmat estimate_channel_decoupled(const ReceivedTensor &y, const cmat &x, const cmat &c, const SwitchingSchedule &s,
                                    Index *truncated = nullptr);

    // Z = [S_p H D_p(C)]_p stacked over blocks, PM x K.
    cmat build_z(const cmat &h, const cmat &c, const SwitchingSchedule &s);

    // X = pinv(Z) Y_stacked. Throws IdentifiabilityError if Z has fewer rows than columns.
    cmat estimate_symbols(const cmat &z, const cmat &y_stacked, Index *truncated = nullptr);

    // sum_p ||Y_p - S_p H D_p(C) X||^2 / sum_p ||Y_p||^2
    double normalized_cost(const ReceivedTensor &y, const cmat &h, const cmat &c, const cmat &x,
                           const SwitchingSchedule &s);

    BalsResult bals(const ReceivedTensor &y, const cmat &c, const SwitchingSchedule &s, const BalsOptions &opts,
                    Rng &rng);

    // Rescale each user so that its reference slot (t = 0) equals one.
    // The products S_p H D_p(C) X are unchanged.
    std::pair<cmat, cmat> remove_ambiguity(const cmat &h_hat, const cmat &x_hat);

    // Pilot-assisted baseline: one channel LS solve with the true symbols.
    cmat pilot_ls(const ReceivedTensor &y, const cmat &x_known, const cmat &c, const SwitchingSchedule &s,
                  ChannelSolver solver = ChannelSolver::port_decoupled);
}

#endif
