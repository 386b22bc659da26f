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

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mabals/airmodel.hpp"
#include "test_util.hpp"

using namespace mabals;
using mabals::testing::max_abs_diff;

namespace
{
    SystemConfig small_config(Index N, Index M, Index K, Index P, Index T)
    {
        SystemConfig cfg;
        cfg.n_ports = N;
        cfg.n_antennas = M;
        cfg.n_users = K;
        cfg.n_blocks = P;
        cfg.n_slots = T;
        return cfg;
    }

    // S_p S_p^T = I_M checked in integer arithmetic
    bool rows_orthonormal(const Eigen::MatrixXd &s)
    {
        const Eigen::MatrixXi si = s.cast<int>();
        return (si * si.transpose()) == Eigen::MatrixXi::Identity(s.rows(), s.rows());
    }
}

TEST_CASE("SystemConfig - validation")
{
    SystemConfig cfg;
    CHECK_NOTHROW(cfg.validate());

    auto bad = cfg;
    bad.n_antennas = bad.n_ports + 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.n_users = bad.n_blocks + 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.mod_order = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.n_slots = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("check_identifiability")
{
    // scenario of the published simulations at N = 10
    auto id = check_identifiability(small_config(10, 5, 5, 8, 10));
    CHECK(id.ok);
    CHECK(id.max_users == 40);

    id = check_identifiability(small_config(1, 1, 2, 1, 1));
    CHECK_FALSE(id.ok);
    CHECK_FALSE(id.symbols_ok);

    // TMP = 12 < NK = 24; PM = 4 >= 3; max_users = min(12/8, 4) = 1
    id = check_identifiability(small_config(8, 2, 3, 2, 3));
    CHECK_FALSE(id.ok);
    CHECK_FALSE(id.channel_ok);
    CHECK(id.symbols_ok);
    CHECK(id.max_users == 1);
}

TEST_CASE("SwitchingSchedule - construction checks")
{
    CHECK_THROWS_AS(SwitchingSchedule(3, {{0, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(SwitchingSchedule(3, {{0, 3}}), std::invalid_argument);
    CHECK_THROWS_AS(SwitchingSchedule(3, {{0, 1}, {2}}), std::invalid_argument);

    const SwitchingSchedule s(4, {{2, 0}, {1, 3}});
    Eigen::MatrixXd expected(2, 4);
    expected << 0, 0, 1, 0, //
        1, 0, 0, 0;
    CHECK(s.matrix(0) == expected);
    CHECK(s.unobserved_ports().empty());

    const SwitchingSchedule partial(4, {{2, 0}, {2, 0}});
    CHECK(partial.unobserved_ports() == std::vector<Index>{1, 3});

    const auto fixed = SwitchingSchedule::fixed(3, 2);
    CHECK(fixed.matrix(1) == Eigen::MatrixXd::Identity(3, 3));
}

TEST_CASE("gen_switching - M = N gives permutation matrices")
{
    Rng rng(1);
    const auto s = gen_switching(small_config(6, 6, 2, 8, 3), rng);
    REQUIRE(s.blocks() == 8);
    for (Index p = 0; p < s.blocks(); ++p)
    {
        const Eigen::MatrixXd sp = s.matrix(p);
        CHECK(sp.transpose() * sp == Eigen::MatrixXd::Identity(6, 6));
        CHECK(rows_orthonormal(sp));
    }
}

TEST_CASE("gen_switching - single antenna picks unit row vectors")
{
    Rng rng(2);
    const auto s = gen_switching(small_config(3, 1, 1, 300, 2), rng);
    std::array<int, 3> hits{};
    for (Index p = 0; p < s.blocks(); ++p)
    {
        const Eigen::MatrixXd sp = s.matrix(p);
        REQUIRE(sp.rows() == 1);
        CHECK(sp.sum() == 1.0);
        ++hits[static_cast<std::size_t>(s.selected(p)[0])];
    }
    for (int h : hits)
        CHECK(h > 0);
}

TEST_CASE("gen_switching - every port equally likely")
{
    // Each port is selected in a block with probability M/N = 0.5; over 10^4
    // blocks the count is Binomial(10^4, 0.5) with standard deviation 50.
    Rng rng(3);
    const auto s = gen_switching(small_config(10, 5, 1, 10000, 2), rng);
    std::vector<int> count(10, 0);
    for (Index p = 0; p < s.blocks(); ++p)
    {
        REQUIRE(rows_orthonormal(s.matrix(p)));
        for (Index port : s.selected(p))
            ++count[static_cast<std::size_t>(port)];
    }
    for (int c : count)
        CHECK(std::abs(c - 5000) <= 150);
}

TEST_CASE("gen_switching - rejects M > N")
{
    Rng rng(4);
    auto cfg = small_config(3, 4, 1, 2, 2);
    CHECK_THROWS_AS(gen_switching(cfg, rng), ConfigError);
}

TEST_CASE("gen_channel - determinism, shape and second moment")
{
    const auto cfg = small_config(10, 5, 5, 8, 10);
    Rng a(123), b(123);
    const cmat h1 = gen_channel(cfg, a), h2 = gen_channel(cfg, b);
    CHECK(h1.rows() == 10);
    CHECK(h1.cols() == 5);
    CHECK(h1 == h2);

    Rng big(99);
    const cmat h = gen_channel(small_config(1000, 1, 100, 100, 2), big);
    const double mean_power = h.squaredNorm() / static_cast<double>(h.size());
    CHECK(std::abs(mean_power - 1.0) < 0.02);
    CHECK(std::abs(h.mean()) < 0.02);
}

TEST_CASE("gen_coding - truncated DFT")
{
    auto cfg = small_config(4, 2, 2, 4, 2);
    const cmat c = gen_coding(cfg);
    CHECK(c.col(0).isOnes(0.0));
    const cplx i(0.0, 1.0);
    cmat expected(4, 1);
    expected << 1.0, -i, -1.0, i;
    CHECK(max_abs_diff(c.col(1), expected) < 1e-15);

    const cmat c8 = gen_coding(small_config(10, 5, 5, 8, 10));
    CHECK(max_abs_diff(c8.adjoint() * c8, 8.0 * cmat::Identity(5, 5)) < 1e-12);
    CHECK((c8.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-15);

    cfg.n_users = 5;
    CHECK_THROWS_AS(gen_coding(cfg), ConfigError);
}

TEST_CASE("gen_symbols - BPSK alphabet and reference slot")
{
    auto cfg = small_config(4, 2, 3, 4, 20);
    cfg.mod_order = 2;
    Rng rng(5);
    const cmat x = gen_symbols(cfg, rng);
    CHECK(x.col(0).isOnes(0.0));
    for (Index t = 1; t < x.cols(); ++t)
        for (Index k = 0; k < x.rows(); ++k)
        {
            CHECK(std::abs(x(k, t).imag()) < 1e-15);
            CHECK(std::abs(std::abs(x(k, t).real()) - 1.0) < 1e-15);
        }
}

TEST_CASE("gen_symbols - 16-PSK points are uniform and unit modulus")
{
    // 10^5 draws, each point has probability 1/16: sigma = sqrt(n p (1 - p)) ~ 76.5
    auto cfg = small_config(4, 2, 1, 4, 100001);
    cfg.mod_order = 16;
    Rng rng(6);
    const cmat x = gen_symbols(cfg, rng);
    std::vector<int> count(16, 0);
    for (Index t = 1; t < x.cols(); ++t)
    {
        const cplx v = x(0, t);
        REQUIRE(std::abs(std::abs(v) - 1.0) < 1e-15);
        const double bins = std::arg(v) * 16.0 / (2.0 * std::numbers::pi);
        const long q = std::lround(bins);
        REQUIRE(std::abs(bins - static_cast<double>(q)) < 1e-9);
        ++count[static_cast<std::size_t>((q % 16 + 16) % 16)];
    }
    const double n = 100000.0, p = 1.0 / 16.0;
    const double sigma = std::sqrt(n * p * (1.0 - p));
    for (int c : count)
        CHECK(std::abs(c - n * p) <= 3.0 * sigma);
}

TEST_CASE("synth_received - scalar model")
{
    const SwitchingSchedule s(1, {{0}});
    cmat h(1, 1), c(1, 1), x(1, 1);
    h << cplx(0.3, -1.2);
    c << 1.0;
    x << cplx(0.0, 1.0);
    Rng rng(7);
    const auto y = synth_received(h, c, x, s, kNoiselessSnr, rng);
    REQUIRE(y.blocks() == 1);
    CHECK(std::abs(y.slices[0](0, 0) - h(0, 0) * x(0, 0)) < 1e-15);
}

TEST_CASE("synth_received - noiseless slices match the per-user sum")
{
    const auto cfg = small_config(6, 3, 3, 5, 4);
    Rng rng(8);
    const auto s = gen_switching(cfg, rng);
    const cmat h = gen_channel(cfg, rng);
    const cmat c = gen_coding(cfg);
    const cmat x = gen_symbols(cfg, rng);
    const auto y = synth_received(h, c, x, s, kNoiselessSnr, rng);

    for (Index p = 0; p < cfg.n_blocks; ++p)
    {
        const auto &sel = s.selected(p);
        for (Index m = 0; m < cfg.n_antennas; ++m)
            for (Index t = 0; t < cfg.n_slots; ++t)
            {
                cplx acc = 0.0;
                for (Index k = 0; k < cfg.n_users; ++k)
                    acc += h(sel[static_cast<std::size_t>(m)], k) * c(p, k) * x(k, t);
                CHECK(std::abs(y.slices[static_cast<std::size_t>(p)](m, t) - acc) < 1e-12);
            }
    }
}

TEST_CASE("synth_received - 0 dB gives equal signal and noise power")
{
    const auto cfg = small_config(10, 5, 5, 8, 10);
    double signal = 0.0, noise = 0.0;
    for (std::uint64_t r = 0; r < 100; ++r)
    {
        Rng rng(1000 + r);
        const auto s = gen_switching(cfg, rng);
        const cmat h = gen_channel(cfg, rng);
        const cmat c = gen_coding(cfg);
        const cmat x = gen_symbols(cfg, rng);
        const auto clean = noiseless_slices(h, c, x, s);
        const auto y = synth_received(h, c, x, s, 0.0, rng);
        for (std::size_t p = 0; p < clean.size(); ++p)
        {
            signal += clean[p].squaredNorm();
            noise += (y.slices[p] - clean[p]).squaredNorm();
        }
    }
    CHECK(std::abs(signal / noise - 1.0) < 0.05);
}

TEST_CASE("synth_received - fixed antenna reduces to H D_p(C) X")
{
    const auto cfg = small_config(4, 4, 3, 4, 5);
    Rng rng(9);
    const cmat h = gen_channel(cfg, rng);
    const cmat c = gen_coding(cfg);
    const cmat x = gen_symbols(cfg, rng);
    const auto y = synth_received(h, c, x, SwitchingSchedule::fixed(4, 4), kNoiselessSnr, rng);
    for (Index p = 0; p < 4; ++p)
        CHECK(max_abs_diff(y.slices[static_cast<std::size_t>(p)], h * diag_row(c, p) * x) < 1e-14);
}

TEST_CASE("synth_received - dimension mismatch and determinism")
{
    const auto cfg = small_config(5, 2, 2, 3, 4);
    Rng rng(10);
    const auto s = gen_switching(cfg, rng);
    const cmat h = gen_channel(cfg, rng);
    const cmat c = gen_coding(cfg);
    const cmat x = gen_symbols(cfg, rng);
    CHECK_THROWS_AS(synth_received(h.topRows(4), c, x, s, 10.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(synth_received(h, c.topRows(2), x, s, 10.0, rng), std::invalid_argument);

    Rng n1(55), n2(55);
    const auto y1 = synth_received(h, c, x, s, 10.0, n1);
    const auto y2 = synth_received(h, c, x, s, 10.0, n2);
    for (std::size_t p = 0; p < y1.slices.size(); ++p)
        CHECK(y1.slices[p] == y2.slices[p]);
}

TEST_CASE("ReceivedTensor - stacked and vectorized layouts")
{
    ReceivedTensor y;
    y.slices.push_back((cmat(2, 2) << 1, 3, 2, 4).finished());
    y.slices.push_back((cmat(2, 2) << 5, 7, 6, 8).finished());
    const cmat stacked = y.stacked();
    CHECK(stacked.rows() == 4);
    CHECK(stacked(2, 0) == cplx(5.0));
    const cvec v = y.vectorized();
    for (Index i = 0; i < 8; ++i)
        CHECK(v(i) == cplx(static_cast<double>(i + 1)));
}
