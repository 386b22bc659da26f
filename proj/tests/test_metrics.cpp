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

#include <numbers>

#include "mabals/metrics.hpp"
#include "mabals/airmodel.hpp"
#include "test_util.hpp"

using namespace mabals;
using mabals::testing::random_disk;

TEST_CASE("nmse")
{
    Rng rng(1);
    const cmat h = random_disk(10, 5, rng);
    CHECK(nmse(h, h) == 0.0);
    CHECK(nmse(h, cmat::Zero(10, 5)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(nmse(h, 2.0 * h) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(nmse(cmat::Zero(2, 2), h.topLeftCorner(2, 2)), std::invalid_argument);
    CHECK_THROWS_AS(nmse(h, h.topRows(3)), std::invalid_argument);
}

TEST_CASE("nmse - invariant under a common unitary rotation")
{
    Rng rng(2);
    const cmat h = random_disk(6, 4, rng);
    const cmat e = h + 0.1 * random_disk(6, 4, rng);
    const cmat u = Eigen::HouseholderQR<cmat>(random_disk(6, 6, rng)).householderQ();
    CHECK(nmse(u * h, u * e) == doctest::Approx(nmse(h, e)).epsilon(1e-12));
}

TEST_CASE("psk_detect - exact points, angle bins and ties")
{
    for (Index q : {2, 4, 8, 16})
    {
        cmat pts(1, q);
        for (Index i = 0; i < q; ++i)
            pts(0, i) = psk_point(i, q);
        const Eigen::MatrixXi idx = psk_detect(pts, q);
        for (Index i = 0; i < q; ++i)
            CHECK(idx(0, i) == i);
    }

    cmat one(1, 1);
    one(0, 0) = 0.9 * std::polar(1.0, 0.1);
    CHECK(psk_detect(one, 4)(0, 0) == 0);

    // exactly between point 0 and point 1 of QPSK
    one(0, 0) = cplx(1.0, 1.0);
    CHECK(psk_detect(one, 4)(0, 0) == 0);
    // exactly between point 3 and point 0
    one(0, 0) = cplx(1.0, -1.0);
    CHECK(psk_detect(one, 4)(0, 0) == 3);

    CHECK_THROWS_AS(psk_detect(one, 1), std::invalid_argument);
}

TEST_CASE("psk_detect - rotating by one step shifts every index")
{
    Rng rng(3);
    const cmat soft = random_disk(8, 20, rng);
    for (Index q : {4, 16})
    {
        const cplx step = std::polar(1.0, 2.0 * std::numbers::pi / static_cast<double>(q));
        const Eigen::MatrixXi base = psk_detect(soft, q);
        const Eigen::MatrixXi shifted = psk_detect(soft * step, q);
        for (Index j = 0; j < soft.cols(); ++j)
            for (Index i = 0; i < soft.rows(); ++i)
                CHECK(shifted(i, j) == (base(i, j) + 1) % q);
    }
}

TEST_CASE("ser")
{
    SystemConfig cfg; // K = 5, T = 10, 16-PSK
    Rng rng(4);
    const cmat x = gen_symbols(cfg, rng);
    CHECK(ser(x, x, 16) == 0.0);
    CHECK(ser(x, -x, 16) == 1.0);

    cmat one_wrong = x;
    one_wrong(2, 7) *= psk_point(1, 16);
    CHECK(ser(x, one_wrong, 16) == doctest::Approx(1.0 / 45.0).epsilon(1e-15));

    // slot 0 is the reference and never counts
    cmat ref_wrong = x;
    ref_wrong(0, 0) = -1.0;
    CHECK(ser(x, ref_wrong, 16) == 0.0);

    CHECK_THROWS_AS(ser(x.leftCols(1), x.leftCols(1), 16), std::invalid_argument);
    CHECK_THROWS_AS(ser(x, x.leftCols(4), 16), std::invalid_argument);
}

TEST_CASE("ser - scale invariance and range")
{
    SystemConfig cfg;
    Rng rng(5);
    const cmat x = gen_symbols(cfg, rng);
    for (int trial = 0; trial < 20; ++trial)
    {
        const cmat soft = x + 0.4 * random_disk(x.rows(), x.cols(), rng);
        const double base = ser(x, soft, 16);
        CHECK(base >= 0.0);
        CHECK(base <= 1.0);
        CHECK(ser(x, 3.7 * soft, 16) == base);
        CHECK(ser(x, 0.01 * soft, 16) == base);
    }
}
