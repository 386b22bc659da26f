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

#include "mabals/airmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

namespace mabals
{
    namespace
    {
        std::string dims(const cmat &a)
        {
            return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
        }
    }

    void SystemConfig::validate() const
    {
        if (n_ports < 1 || n_antennas < 1 || n_users < 1 || n_blocks < 1 || n_slots < 1)
            throw ConfigError("all scenario dimensions must be at least 1");
        if (mod_order < 2)
            throw ConfigError("mod_order must be at least 2, got " + std::to_string(mod_order));
        if (n_antennas > n_ports)
            throw ConfigError("n_antennas (" + std::to_string(n_antennas) + ") exceeds n_ports (" +
                              std::to_string(n_ports) + ")");
        if (n_users > n_blocks)
            throw ConfigError("n_users (" + std::to_string(n_users) + ") exceeds n_blocks (" +
                              std::to_string(n_blocks) + "); the block code would lose column rank");
        if (std::isnan(snr_db))
            throw ConfigError("snr_db is NaN");
    }

    Identifiability check_identifiability(const SystemConfig &cfg)
    {
        const Index tmp = cfg.n_slots * cfg.n_antennas * cfg.n_blocks;
        const Index nk = cfg.n_ports * cfg.n_users;
        const Index pm = cfg.n_blocks * cfg.n_antennas;

        Identifiability r;
        r.channel_ok = tmp >= nk;
        r.symbols_ok = pm >= cfg.n_users;
        r.ok = r.channel_ok && r.symbols_ok;
        r.max_users = std::min(tmp / cfg.n_ports, pm);
        return r;
    }

    SwitchingSchedule::SwitchingSchedule(Index n_ports, std::vector<std::vector<Index>> selected_ports)
        : n_ports_(n_ports), selected_(std::move(selected_ports))
    {
        if (n_ports_ < 1)
            throw std::invalid_argument("SwitchingSchedule: n_ports must be positive");
        const std::size_t m = selected_.empty() ? 0 : selected_.front().size();
        std::vector<char> used(static_cast<std::size_t>(n_ports_));
        for (const auto &sel : selected_)
        {
            if (sel.size() != m || m == 0)
                throw std::invalid_argument("SwitchingSchedule: every block must select the same, non-zero number of ports");
            std::fill(used.begin(), used.end(), 0);
            for (Index port : sel)
            {
                if (port < 0 || port >= n_ports_)
                    throw std::invalid_argument("SwitchingSchedule: port " + std::to_string(port) + " out of range");
                if (used[static_cast<std::size_t>(port)]++)
                    throw std::invalid_argument("SwitchingSchedule: port " + std::to_string(port) +
                                                " selected twice in one block");
            }
        }
    }

    SwitchingSchedule SwitchingSchedule::fixed(Index n_ports, Index n_blocks)
    {
        std::vector<Index> identity(static_cast<std::size_t>(n_ports));
        std::iota(identity.begin(), identity.end(), Index{0});
        return SwitchingSchedule(n_ports, std::vector<std::vector<Index>>(static_cast<std::size_t>(n_blocks), identity));
    }

    std::vector<Index> SwitchingSchedule::unobserved_ports() const
    {
        std::vector<char> seen(static_cast<std::size_t>(n_ports_), 0);
        for (const auto &sel : selected_)
            for (Index port : sel)
                seen[static_cast<std::size_t>(port)] = 1;
        std::vector<Index> out;
        for (Index n = 0; n < n_ports_; ++n)
            if (!seen[static_cast<std::size_t>(n)])
                out.push_back(n);
        return out;
    }

    Eigen::MatrixXd SwitchingSchedule::matrix(Index p) const
    {
        const auto &sel = selected(p);
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(static_cast<Index>(sel.size()), n_ports_);
        for (std::size_t m = 0; m < sel.size(); ++m)
            s(static_cast<Index>(m), sel[m]) = 1.0;
        return s;
    }

    cmat ReceivedTensor::stacked() const
    {
        cmat out(blocks() * rows(), cols());
        for (Index p = 0; p < blocks(); ++p)
            out.middleRows(p * rows(), rows()) = slices[static_cast<std::size_t>(p)];
        return out;
    }

    cvec ReceivedTensor::vectorized() const
    {
        const Index len = rows() * cols();
        cvec out(blocks() * len);
        for (Index p = 0; p < blocks(); ++p)
            out.segment(p * len, len) = vec(slices[static_cast<std::size_t>(p)]);
        return out;
    }

    SwitchingSchedule gen_switching(const SystemConfig &cfg, Rng &rng)
    {
        if (cfg.n_antennas > cfg.n_ports)
            throw ConfigError("gen_switching: n_antennas exceeds n_ports");
        if (cfg.n_antennas < 1 || cfg.n_blocks < 1)
            throw ConfigError("gen_switching: n_antennas and n_blocks must be positive");

        std::vector<std::vector<Index>> sel(static_cast<std::size_t>(cfg.n_blocks));
        std::vector<Index> pool(static_cast<std::size_t>(cfg.n_ports));
        for (auto &block : sel)
        {
            // partial Fisher-Yates: the first M entries of pool become the selection
            std::iota(pool.begin(), pool.end(), Index{0});
            for (Index m = 0; m < cfg.n_antennas; ++m)
            {
                std::uniform_int_distribution<Index> pick(m, cfg.n_ports - 1);
                std::swap(pool[static_cast<std::size_t>(m)], pool[static_cast<std::size_t>(pick(rng))]);
            }
            block.assign(pool.begin(), pool.begin() + cfg.n_antennas);
        }
        return SwitchingSchedule(cfg.n_ports, std::move(sel));
    }

    cmat complex_gaussian(Index rows, Index cols, double variance, Rng &rng)
    {
        std::normal_distribution<double> g(0.0, std::sqrt(variance / 2.0));
        cmat out(rows, cols);
        for (Index j = 0; j < cols; ++j)
            for (Index i = 0; i < rows; ++i)
            {
                const double re = g(rng);
                const double im = g(rng);
                out(i, j) = cplx(re, im);
            }
        return out;
    }

    cmat gen_channel(const SystemConfig &cfg, Rng &rng)
    {
        return complex_gaussian(cfg.n_ports, cfg.n_users, 1.0, rng);
    }

    cmat gen_coding(const SystemConfig &cfg)
    {
        if (cfg.n_users > cfg.n_blocks)
            throw ConfigError("gen_coding: n_users exceeds n_blocks");
        cmat c(cfg.n_blocks, cfg.n_users);
        const double P = static_cast<double>(cfg.n_blocks);
        for (Index p = 0; p < cfg.n_blocks; ++p)
            for (Index k = 0; k < cfg.n_users; ++k)
            {
                // reduce p*k mod P first so the phase stays exact for large indices
                const double phase = -2.0 * std::numbers::pi * static_cast<double>((p * k) % cfg.n_blocks) / P;
                c(p, k) = std::polar(1.0, phase);
            }
        return c;
    }

    cplx psk_point(Index q, Index mod_order)
    {
        const Index r = ((q % mod_order) + mod_order) % mod_order;
        return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(mod_order));
    }

    cmat gen_symbols(const SystemConfig &cfg, Rng &rng)
    {
        std::uniform_int_distribution<Index> pick(0, cfg.mod_order - 1);
        cmat x(cfg.n_users, cfg.n_slots);
        x.col(0).setOnes();
        for (Index t = 1; t < cfg.n_slots; ++t)
            for (Index k = 0; k < cfg.n_users; ++k)
                x(k, t) = psk_point(pick(rng), cfg.mod_order);
        return x;
    }

    std::vector<cmat> noiseless_slices(const cmat &h, const cmat &c, const cmat &x, const SwitchingSchedule &s)
    {
        if (h.cols() != c.cols() || h.cols() != x.rows() || h.rows() != s.ports() || c.rows() != s.blocks())
            throw std::invalid_argument("noiseless_slices: dimension mismatch (H " + dims(h) + ", C " + dims(c) +
                                        ", X " + dims(x) + ", schedule " + std::to_string(s.blocks()) + " blocks over " +
                                        std::to_string(s.ports()) + " ports)");
        std::vector<cmat> out;
        out.reserve(static_cast<std::size_t>(s.blocks()));
        for (Index p = 0; p < s.blocks(); ++p)
            out.push_back(s.apply(p, h) * c.row(p).transpose().asDiagonal() * x);
        return out;
    }

    ReceivedTensor synth_received(const cmat &h, const cmat &c, const cmat &x, const SwitchingSchedule &s,
                                  double snr_db, Rng &rng)
    {
        ReceivedTensor y{noiseless_slices(h, c, x, s)};
        if (std::isinf(snr_db) && snr_db > 0)
            return y;

        double power = 0.0;
        Index count = 0;
        for (const auto &slice : y.slices)
        {
            power += slice.squaredNorm();
            count += slice.size();
        }
        const double variance = (count > 0 ? power / static_cast<double>(count) : 0.0) / std::pow(10.0, snr_db / 10.0);
        for (auto &slice : y.slices)
            slice += complex_gaussian(slice.rows(), slice.cols(), variance, rng);
        return y;
    }
}
