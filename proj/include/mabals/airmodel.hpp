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

// Uplink multi-user scenario with a port-switched (movable) antenna array at
// the base station. Block p of the received tensor is
//
//     Y_p = S_p * H * D_p(C) * X + Z_p,      p = 0..P-1
//
// with S_p (M x N) the port selection, H (N x K) the user channels, C (P x K)
// the block code and X (K x T) the user symbols.

#ifndef MABALS_AIRMODEL_HPP
#define MABALS_AIRMODEL_HPP

#include <cstdint>
#include <limits>
#include <vector>

#include "mabals/numkernel.hpp"
#include "mabals/rng.hpp"

namespace mabals
{
    // snr_db value that disables noise entirely.
    inline constexpr double kNoiselessSnr = std::numeric_limits<double>::infinity();

    struct SystemConfig
    {
        Index n_ports = 10;    // N
        Index n_antennas = 5;  // M, one RF chain each
        Index n_users = 5;     // K
        Index n_blocks = 8;    // P
        Index n_slots = 10;    // T
        Index mod_order = 16;  // Q-PSK
        double snr_db = 10.0;
        std::uint64_t master_seed = 1;

        // Throws ConfigError unless all counts >= 1, Q >= 2, M <= N and K <= P.
        void validate() const;
    };

    struct Identifiability
    {
        bool ok = false;
        bool channel_ok = false; // T*M*P >= N*K
        bool symbols_ok = false; // P*M >= K
        Index max_users = 0;     // floor(min(T*M*P / N, P*M))
    };

    Identifiability check_identifiability(const SystemConfig &cfg);

    /// Port selection for every block.
    ///
    /// Stored as the port index connected to each antenna, which is the
    /// position of the single 1 in each row of S_p. Ports within a block are
    /// distinct, so S_p * S_p^H = I_M holds by construction.
    class SwitchingSchedule
    {
    public:
        SwitchingSchedule() = default;
        SwitchingSchedule(Index n_ports, std::vector<std::vector<Index>> selected_ports);

        // S_p = I_N in every block.
        static SwitchingSchedule fixed(Index n_ports, Index n_blocks);

        Index blocks() const { return static_cast<Index>(selected_.size()); }
        Index antennas() const { return selected_.empty() ? 0 : static_cast<Index>(selected_.front().size()); }
        Index ports() const { return n_ports_; }

        const std::vector<Index> &selected(Index p) const { return selected_.at(static_cast<std::size_t>(p)); }

        // Ports that no block connects to. Their rows of H never reach the
        // receiver, so W loses column rank whenever this is non-empty.
        std::vector<Index> unobserved_ports() const;

        // Binary M x N matrix S_p.
        Eigen::MatrixXd matrix(Index p) const;

        // S_p * a, i.e. the selected rows of a.
        template <typename Derived>
        plain_t<Derived> apply(Index p, const Eigen::MatrixBase<Derived> &a) const
        {
            return a(selected(p), Eigen::all);
        }

    private:
        Index n_ports_ = 0;
        std::vector<std::vector<Index>> selected_;
    };

    // Frontal slices Y_p, each M x T.
    struct ReceivedTensor
    {
        std::vector<cmat> slices;

        Index blocks() const { return static_cast<Index>(slices.size()); }
        Index rows() const { return slices.empty() ? 0 : slices.front().rows(); }
        Index cols() const { return slices.empty() ? 0 : slices.front().cols(); }

        // [Y_1; ...; Y_P], PM x T.
        cmat stacked() const;
        // [vec(Y_1); ...; vec(Y_P)], TMP x 1.
        cvec vectorized() const;
    };

    SwitchingSchedule gen_switching(const SystemConfig &cfg, Rng &rng);

    // i.i.d. CN(0, 1) entries, N x K.
    cmat gen_channel(const SystemConfig &cfg, Rng &rng);

    // First K columns of the unnormalized P-point DFT matrix.
    cmat gen_coding(const SystemConfig &cfg);

    // Q-PSK symbols, K x T. Slot 0 is the all-ones reference slot.
    cmat gen_symbols(const SystemConfig &cfg, Rng &rng);

    // exp(i 2 pi q / Q).
    cplx psk_point(Index q, Index mod_order);

    // S_p * H * D_p(C) * X for every block.
    std::vector<cmat> noiseless_slices(const cmat &h, const cmat &c, const cmat &x, const SwitchingSchedule &s);

    // Noise variance is the realization's mean noiseless power over 10^(snr_db/10).
    ReceivedTensor synth_received(const cmat &h, const cmat &c, const cmat &x, const SwitchingSchedule &s,
                                  double snr_db, Rng &rng);

    // Circularly-symmetric complex Gaussian with E|z|^2 = variance.
    cmat complex_gaussian(Index rows, Index cols, double variance, Rng &rng);
}

#endif
