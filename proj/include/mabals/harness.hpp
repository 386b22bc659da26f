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

// Monte Carlo campaigns: experiment description, per-trial seeding, trial
// execution for the three receivers, sweep aggregation and CSV output.

#ifndef MABALS_HARNESS_HPP
#define MABALS_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mabals/airmodel.hpp"
#include "mabals/metrics.hpp"
#include "mabals/receiver.hpp"

namespace mabals
{
    enum class SweepAxis
    {
        snr_db,
        n_ports
    };

    enum class ReceiverKind
    {
        semi_blind,   // BALS over the switched array
        pilot,        // channel LS with every symbol known
        fixed_antenna // BALS with S_p = I_N (requires M = N)
    };

    std::string_view to_string(SweepAxis axis);
    std::string_view to_string(ReceiverKind kind);
    std::optional<SweepAxis> parse_axis(std::string_view name);
    std::optional<ReceiverKind> parse_receiver(std::string_view name);

    struct ExperimentSpec
    {
        std::string experiment = "experiment";
        SystemConfig base;
        SweepAxis sweep_axis = SweepAxis::snr_db;
        std::vector<double> sweep_values;
        Index n_trials = 1;
        std::vector<ReceiverKind> receivers;
        std::string output_path;
        double delta = 1e-6;
        Index max_iters = 500;
        Index n_starts = 3;

        // Throws ConfigError.
        void validate() const;

        // Base configuration with the swept parameter set to `value`.
        SystemConfig config_at(double value) const;
    };

    /// Parses the JSON experiment file.
    ///
    /// Required keys: n_ports, n_antennas, n_users, n_blocks, n_slots,
    /// mod_order, master_seed, sweep_axis, sweep_values, n_trials, receivers,
    /// output_path. Optional: snr_db (required when sweeping n_ports),
    /// experiment, delta, max_iters, n_starts. An SNR given as the string "inf" means no
    /// noise. Unknown keys are rejected.
    ExperimentSpec parse_spec(std::string_view json_text);
    ExperimentSpec load_spec(const std::string &path);

    // Throws IdentifiabilityError naming the first sweep point that fails.
    void require_identifiable(const ExperimentSpec &spec);

    struct SweepRow
    {
        double axis_value = 0.0;
        ReceiverKind receiver = ReceiverKind::semi_blind;
        SystemConfig config;
        Index n_trials = 0;
        double nmse_mean = 0.0;
        std::optional<double> ser_mean;
        double iter_mean = 0.0;
        double converged_fraction = 0.0;
    };

    // Seed of Monte Carlo trial `trial`. It depends on neither the sweep point
    // nor the receiver: every point and every receiver sees the same random
    // streams (common random numbers), so curves are compared on matched
    // scenarios and extending a sweep never changes existing rows.
    std::uint64_t trial_seed(std::uint64_t master_seed, Index trial);

    // One full scenario drawn from trial_seed, one receiver, its metrics.
    TrialMetrics run_trial(const SystemConfig &cfg, ReceiverKind receiver, std::uint64_t trial_seed,
                           const BalsOptions &opts = {});

    // Runs every sweep point x receiver for n_trials trials on `workers`
    // threads and writes the CSV when output_path is non-empty. Rows come out
    // in sweep order, receivers in spec order within each point.
    std::vector<SweepRow> run_sweep(const ExperimentSpec &spec, unsigned workers = 1);

    inline constexpr std::string_view kCsvHeader =
        "experiment,receiver,axis,axis_value,n_ports,n_antennas,n_users,n_blocks,n_slots,mod_order,n_trials,"
        "nmse_mean,ser_mean,iter_mean,converged_fraction";

    void write_csv(std::ostream &os, const ExperimentSpec &spec, const std::vector<SweepRow> &rows);
    std::string format_number(double v);

    // Neumaier-compensated mean.
    double compensated_mean(const std::vector<double> &values);
}

#endif
