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

// Seed derivation for reproducible Monte Carlo campaigns.
//
// Every random object is drawn from its own std::mt19937_64 stream whose seed
// is a SplitMix64 mix of a parent seed and a small tuple of labels. Streams
// therefore never depend on the order in which trials are executed.

#ifndef MABALS_RNG_HPP
#define MABALS_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mabals
{
    using Rng = std::mt19937_64;

    constexpr std::uint64_t splitmix64(std::uint64_t x)
    {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

    constexpr std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> labels)
    {
        std::uint64_t s = splitmix64(parent);
        for (auto l : labels)
            s = splitmix64(s ^ splitmix64(l + 0x632BE59BD9B4E019ull));
        return s;
    }

    // Per-trial substreams.
    enum class Stream : std::uint64_t
    {
        switching = 1,
        channel = 2,
        symbols = 3,
        noise = 4,
        init = 5
    };

    inline Rng make_stream(std::uint64_t trial_seed, Stream which)
    {
        return Rng(derive_seed(trial_seed, {static_cast<std::uint64_t>(which)}));
    }
}

#endif
