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

#include "mabals/receiver.hpp"

#include <cmath>
#include <random>
#include <string>

namespace mabals
{
    namespace
    {
        void require_consistent(const ReceivedTensor &y, const cmat &c, const SwitchingSchedule &s, Index n_users,
                                Index n_slots)
        {
            if (y.blocks() != s.blocks() || c.rows() != s.blocks() || y.rows() != s.antennas() ||
                c.cols() != n_users || y.cols() != n_slots)
                throw std::invalid_argument("receiver: received tensor, code and schedule dimensions disagree");
            for (const auto &slice : y.slices)
                if (slice.rows() != y.rows() || slice.cols() != y.cols())
                    throw std::invalid_argument("receiver: received slices differ in shape");
        }

        void require_channel_identifiable(Index rows, Index cols)
        {
            if (rows < cols)
                throw IdentifiabilityError("channel step needs T*M*P >= N*K, got " + std::to_string(rows) + " < " +
                                           std::to_string(cols));
        }

        void require_symbols_identifiable(Index rows, Index cols)
        {
            if (rows < cols)
                throw IdentifiabilityError("symbol step needs P*M >= K, got " + std::to_string(rows) + " < " +
                                           std::to_string(cols));
        }

        cmat random_psk(Index rows, Index cols, Index q, Rng &rng)
        {
            std::uniform_int_distribution<Index> pick(0, q - 1);
            cmat x(rows, cols);
            for (Index j = 0; j < cols; ++j)
                for (Index i = 0; i < rows; ++i)
                    x(i, j) = psk_point(pick(rng), q);
            return x;
        }
    }

    cmat build_w(const cmat &x, const cmat &c, const SwitchingSchedule &s)
    {
        if (x.rows() != c.cols() || c.rows() != s.blocks())
            throw std::invalid_argument("build_w: dimension mismatch");
        const Index M = s.antennas(), N = s.ports(), K = x.rows(), T = x.cols(), P = s.blocks();

        const cmat x_kron_i = kron(x.transpose(), cmat::Identity(M, M)); // TM x KM
        cmat w(T * M * P, N * K);
        for (Index p = 0; p < P; ++p)
        {
            const cmat f_p = kron(diag_row(c, p), s.matrix(p)); // KM x KN
            w.middleRows(p * T * M, T * M) = x_kron_i * f_p;
        }
        return w;
    }

    cmat estimate_channel(const cmat &w, const cvec &y, Index n_ports, Index *truncated)
    {
        if (w.rows() != y.size())
            throw std::invalid_argument("estimate_channel: W has " + std::to_string(w.rows()) +
                                        " rows but y has " + std::to_string(y.size()) + " entries");
        if (n_ports < 1 || w.cols() % n_ports != 0)
            throw std::invalid_argument("estimate_channel: column count is not a multiple of n_ports");
        require_channel_identifiable(w.rows(), w.cols());
        return unvec(pinv(w, truncated) * y, n_ports, w.cols() / n_ports);
    }

    cmat estimate_channel_decoupled(const ReceivedTensor &y, const cmat &x, const cmat &c, const SwitchingSchedule &s,
                                    Index *truncated)
    {
        const Index N = s.ports(), K = x.rows(), T = x.cols(), P = s.blocks();
        require_consistent(y, c, s, K, T);
        require_channel_identifiable(T * s.antennas() * P, N * K);

        // (D_p(C) X)^T for every block
        std::vector<cmat> g(static_cast<std::size_t>(P));
        for (Index p = 0; p < P; ++p)
            g[static_cast<std::size_t>(p)] = (c.row(p).transpose().asDiagonal() * x).transpose();

        // observations of port n: (block, antenna) pairs that connected to it
        std::vector<std::vector<std::pair<Index, Index>>> seen(static_cast<std::size_t>(N));
        for (Index p = 0; p < P; ++p)
        {
            const auto &sel = s.selected(p);
            for (std::size_t m = 0; m < sel.size(); ++m)
                seen[static_cast<std::size_t>(sel[m])].emplace_back(p, static_cast<Index>(m));
        }

        cmat h = cmat::Zero(N, K);
        Index dropped = 0;
        for (Index n = 0; n < N; ++n)
        {
            const auto &obs = seen[static_cast<std::size_t>(n)];
            if (obs.empty())
            {
                dropped += K; // zero columns of W
                continue;
            }
            const Index rows = static_cast<Index>(obs.size()) * T;
            cmat a(rows, K);
            cvec b(rows);
            for (std::size_t i = 0; i < obs.size(); ++i)
            {
                const auto [p, m] = obs[i];
                a.middleRows(static_cast<Index>(i) * T, T) = g[static_cast<std::size_t>(p)];
                b.segment(static_cast<Index>(i) * T, T) = y.slices[static_cast<std::size_t>(p)].row(m).transpose();
            }
            Index local = 0;
            h.row(n) = (pinv(a, &local) * b).transpose();
            dropped += local + std::max<Index>(0, K - rows); // thin SVD only returns min(rows, K) values
        }
        if (truncated)
            *truncated = dropped;
        return h;
    }

    cmat build_z(const cmat &h, const cmat &c, const SwitchingSchedule &s)
    {
        if (h.cols() != c.cols() || h.rows() != s.ports() || c.rows() != s.blocks())
            throw std::invalid_argument("build_z: dimension mismatch");
        const Index M = s.antennas();
        cmat z(s.blocks() * M, h.cols());
        for (Index p = 0; p < s.blocks(); ++p)
            z.middleRows(p * M, M) = s.apply(p, h) * c.row(p).transpose().asDiagonal();
        return z;
    }

    cmat estimate_symbols(const cmat &z, const cmat &y_stacked, Index *truncated)
    {
        if (z.rows() != y_stacked.rows())
            throw std::invalid_argument("estimate_symbols: Z has " + std::to_string(z.rows()) +
                                        " rows but stacked Y has " + std::to_string(y_stacked.rows()));
        require_symbols_identifiable(z.rows(), z.cols());
        return pinv(z, truncated) * y_stacked;
    }

    double normalized_cost(const ReceivedTensor &y, const cmat &h, const cmat &c, const cmat &x,
                           const SwitchingSchedule &s)
    {
        double residual = 0.0, energy = 0.0;
        for (Index p = 0; p < y.blocks(); ++p)
        {
            const auto &slice = y.slices[static_cast<std::size_t>(p)];
            residual += (slice - s.apply(p, h) * c.row(p).transpose().asDiagonal() * x).squaredNorm();
            energy += slice.squaredNorm();
        }
        return energy > 0.0 ? residual / energy : residual;
    }

    namespace
    {
        BalsResult bals_single(const ReceivedTensor &y, const cmat &y_stacked, const cvec &y_vec, const cmat &c,
                               const SwitchingSchedule &s, const BalsOptions &opts, cmat x0)
        {
            BalsResult r;
            r.x_hat = std::move(x0);
            for (Index i = 1; i <= opts.max_iters; ++i)
            {
                Index dropped_h = 0, dropped_x = 0;
                if (opts.channel_solver == ChannelSolver::sensing_matrix)
                    r.h_hat = estimate_channel(build_w(r.x_hat, c, s), y_vec, s.ports(), &dropped_h);
                else
                    r.h_hat = estimate_channel_decoupled(y, r.x_hat, c, s, &dropped_h);

                r.x_hat = estimate_symbols(build_z(r.h_hat, c, s), y_stacked, &dropped_x);
                r.truncated_singular_values += dropped_h + dropped_x;

                const double eps = normalized_cost(y, r.h_hat, c, r.x_hat, s);
                if (!std::isfinite(eps))
                    throw NumericalError("bals: cost became non-finite at iteration " + std::to_string(i));
                r.cost_history.push_back(eps);
                r.iterations = i;

                if (i >= 2 && std::abs(eps - r.cost_history[r.cost_history.size() - 2]) < opts.delta)
                {
                    r.converged = true;
                    break;
                }
            }
            r.total_iterations = r.iterations;
            return r;
        }
    }

    BalsResult bals(const ReceivedTensor &y, const cmat &c, const SwitchingSchedule &s, const BalsOptions &opts,
                    Rng &rng)
    {
        if (!(opts.delta > 0.0) || opts.max_iters < 1 || opts.n_starts < 1)
            throw std::invalid_argument("bals: delta must be positive, max_iters and n_starts at least 1");

        const Index K = c.cols(), T = y.cols(), M = s.antennas(), N = s.ports(), P = s.blocks();
        require_consistent(y, c, s, K, T);
        require_channel_identifiable(T * M * P, N * K);
        require_symbols_identifiable(P * M, K);

        const cmat y_stacked = y.stacked();
        const cvec y_vec = opts.channel_solver == ChannelSolver::sensing_matrix ? y.vectorized() : cvec();

        if (opts.init_policy == InitPolicy::ground_truth)
        {
            if (!opts.initial_symbols || opts.initial_symbols->rows() != K || opts.initial_symbols->cols() != T)
                throw std::invalid_argument("bals: ground-truth init needs a K x T initial_symbols matrix");
            return bals_single(y, y_stacked, y_vec, c, s, opts, *opts.initial_symbols);
        }

        if (opts.mod_order < 2)
            throw std::invalid_argument("bals: mod_order must be at least 2");

        BalsResult best;
        Index total = 0, truncated = 0;
        for (Index start = 0; start < opts.n_starts; ++start)
        {
            BalsResult r = bals_single(y, y_stacked, y_vec, c, s, opts, random_psk(K, T, opts.mod_order, rng));
            total += r.iterations;
            truncated += r.truncated_singular_values;
            if (start == 0 || r.cost_history.back() < best.cost_history.back())
            {
                best = std::move(r);
                best.start = start;
            }
        }
        best.total_iterations = total;
        best.truncated_singular_values = truncated;
        return best;
    }

    std::pair<cmat, cmat> remove_ambiguity(const cmat &h_hat, const cmat &x_hat)
    {
        if (h_hat.cols() != x_hat.rows() || x_hat.cols() < 1)
            throw std::invalid_argument("remove_ambiguity: dimension mismatch");
        const cvec ref = x_hat.col(0);
        for (Index k = 0; k < ref.size(); ++k)
            if (std::abs(ref(k)) < 1e-12)
                throw NumericalError("remove_ambiguity: reference symbol of user " + std::to_string(k) +
                                     " is numerically zero");

        cmat h = h_hat * ref.asDiagonal();
        cmat x = ref.cwiseInverse().asDiagonal() * x_hat;
        x.col(0).setOnes();
        return {std::move(h), std::move(x)};
    }

    cmat pilot_ls(const ReceivedTensor &y, const cmat &x_known, const cmat &c, const SwitchingSchedule &s,
                  ChannelSolver solver)
    {
        if (solver == ChannelSolver::sensing_matrix)
            return estimate_channel(build_w(x_known, c, s), y.vectorized(), s.ports());
        return estimate_channel_decoupled(y, x_known, c, s);
    }
}
