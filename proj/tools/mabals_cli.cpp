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

// mabals: Monte Carlo driver for the movable-antenna semi-blind receiver.
//
//   mabals sweep --config exp.json [--workers N] [--seed S]
//   mabals check --config exp.json [--seed S]
//
// Exit codes: 0 success, 1 runtime failure, 2 invalid config,
// 3 identifiability violation.

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <optional>
#include <thread>

#include "mabals/harness.hpp"

namespace
{
    constexpr int kExitRuntime = 1;
    constexpr int kExitConfig = 2;
    constexpr int kExitIdentifiability = 3;

    int run_check(const mabals::ExperimentSpec &spec)
    {
        bool all_ok = true;
        for (double v : spec.sweep_values)
        {
            const auto cfg = spec.config_at(v);
            const auto id = mabals::check_identifiability(cfg);
            const auto tmp = cfg.n_slots * cfg.n_antennas * cfg.n_blocks;
            const auto nk = cfg.n_ports * cfg.n_users;
            const auto pm = cfg.n_blocks * cfg.n_antennas;
            std::cout << mabals::to_string(spec.sweep_axis) << '=' << mabals::format_number(v)
                      << "  N=" << cfg.n_ports << " M=" << cfg.n_antennas << " K=" << cfg.n_users
                      << " P=" << cfg.n_blocks << " T=" << cfg.n_slots
                      << "  TMP=" << tmp << (id.channel_ok ? " >= " : " < ") << "NK=" << nk
                      << "  PM=" << pm << (id.symbols_ok ? " >= " : " < ") << "K=" << cfg.n_users
                      << "  " << (id.ok ? "ok" : "NOT IDENTIFIABLE") << "  max_users=" << id.max_users << '\n';
            all_ok = all_ok && id.ok;
        }
        return all_ok ? 0 : kExitIdentifiability;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"Joint channel and symbol estimation for port-switched antenna arrays"};
    app.require_subcommand(1);

    std::string config_path;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::optional<std::uint64_t> seed;

    auto *sweep = app.add_subcommand("sweep", "run a Monte Carlo sweep and write its CSV");
    sweep->add_option("--config", config_path, "experiment file (JSON)")->required();
    sweep->add_option("--workers", workers, "parallel trial workers")->check(CLI::PositiveNumber);
    sweep->add_option("--seed", seed, "override master_seed");

    auto *check = app.add_subcommand("check", "print the identifiability bound for every sweep point");
    check->add_option("--config", config_path, "experiment file (JSON)")->required();
    check->add_option("--seed", seed, "override master_seed");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try
    {
        auto spec = mabals::load_spec(config_path);
        if (seed)
            spec.base.master_seed = *seed;

        if (check->parsed())
            return run_check(spec);

        mabals::require_identifiable(spec);
        const auto rows = mabals::run_sweep(spec, workers);
        std::cerr << "wrote " << rows.size() << " rows to " << spec.output_path << '\n';
        return 0;
    }
    catch (const mabals::ConfigError &e)
    {
        std::cerr << "invalid config: " << e.what() << '\n';
        return kExitConfig;
    }
    catch (const mabals::IdentifiabilityError &e)
    {
        std::cerr << "identifiability violation: " << e.what() << '\n';
        return kExitIdentifiability;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
