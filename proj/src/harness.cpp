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

#include "mabals/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace mabals
{
    namespace
    {
        using json = nlohmann::json;

        Index read_count(const json &j, const char *key)
        {
            const auto &v = j.at(key);
            if (!v.is_number_integer() || v.get<long long>() < 1)
                throw ConfigError(std::string(key) + " must be a positive integer");
            return static_cast<Index>(v.get<long long>());
        }

        double read_real(const json &v, const std::string &what)
        {
            if (v.is_number())
                return v.get<double>();
            if (v.is_string())
            {
                const auto s = v.get<std::string>();
                if (s == "inf" || s == "+inf" || s == "Inf")
                    return kNoiselessSnr;
            }
            throw ConfigError(what + " must be a number or \"inf\"");
        }

        bool is_count(double v)
        {
            return std::isfinite(v) && v >= 1.0 && v == std::floor(v) && v < 1e9;
        }
    }

    std::string_view to_string(SweepAxis axis)
    {
        return axis == SweepAxis::snr_db ? "snr_db" : "n_ports";
    }

    std::string_view to_string(ReceiverKind kind)
    {
        switch (kind)
        {
        case ReceiverKind::semi_blind:
            return "semi-blind";
        case ReceiverKind::pilot:
            return "pilot";
        case ReceiverKind::fixed_antenna:
            return "fixed-antenna";
        }
        return "unknown";
    }

    std::optional<SweepAxis> parse_axis(std::string_view name)
    {
        if (name == "snr_db")
            return SweepAxis::snr_db;
        if (name == "n_ports")
            return SweepAxis::n_ports;
        return std::nullopt;
    }

    std::optional<ReceiverKind> parse_receiver(std::string_view name)
    {
        for (auto k : {ReceiverKind::semi_blind, ReceiverKind::pilot, ReceiverKind::fixed_antenna})
            if (name == to_string(k))
                return k;
        return std::nullopt;
    }

    SystemConfig ExperimentSpec::config_at(double value) const
    {
        SystemConfig cfg = base;
        if (sweep_axis == SweepAxis::snr_db)
            cfg.snr_db = value;
        else
            cfg.n_ports = static_cast<Index>(value);
        return cfg;
    }

    void ExperimentSpec::validate() const
    {
        if (sweep_values.empty())
            throw ConfigError("sweep_values is empty");
        for (std::size_t i = 1; i < sweep_values.size(); ++i)
            if (!(sweep_values[i] > sweep_values[i - 1]))
                throw ConfigError("sweep_values must be strictly increasing");
        if (n_trials < 1)
            throw ConfigError("n_trials must be at least 1");
        if (receivers.empty())
            throw ConfigError("receivers is empty");
        if (std::set<ReceiverKind>(receivers.begin(), receivers.end()).size() != receivers.size())
            throw ConfigError("receivers lists a receiver twice");
        if (!(delta > 0.0) || max_iters < 1 || n_starts < 1)
            throw ConfigError("delta must be positive, max_iters and n_starts at least 1");
        if (base.n_slots < 2)
            throw ConfigError("n_slots must be at least 2 (slot 0 is the reference slot)");

        for (double v : sweep_values)
        {
            if (sweep_axis == SweepAxis::n_ports && !is_count(v))
                throw ConfigError("n_ports sweep value " + format_number(v) + " is not a positive integer");
            if (sweep_axis == SweepAxis::snr_db && (std::isnan(v) || v == -std::numeric_limits<double>::infinity()))
                throw ConfigError("snr_db sweep value must be a real number or +inf");
            const SystemConfig cfg = config_at(v);
            cfg.validate();
            for (auto r : receivers)
                if (r == ReceiverKind::fixed_antenna && cfg.n_antennas != cfg.n_ports)
                    throw ConfigError("fixed-antenna receiver needs n_antennas == n_ports, got M = " +
                                      std::to_string(cfg.n_antennas) + ", N = " + std::to_string(cfg.n_ports));
        }
    }

    ExperimentSpec parse_spec(std::string_view json_text)
    {
        json j;
        try
        {
            j = json::parse(json_text);
        }
        catch (const json::parse_error &e)
        {
            throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        if (!j.is_object())
            throw ConfigError("config must be a JSON object");

        static const std::set<std::string> required = {"n_ports",  "n_antennas",   "n_users",      "n_blocks",
                                                       "n_slots",  "mod_order",    "master_seed",  "sweep_axis",
                                                       "sweep_values", "n_trials", "receivers",    "output_path"};
        static const std::set<std::string> optional = {"snr_db", "experiment", "delta", "max_iters", "n_starts"};
        for (const auto &key : required)
            if (!j.contains(key))
                throw ConfigError("config is missing key '" + key + "'");
        for (const auto &[key, value] : j.items())
            if (!required.contains(key) && !optional.contains(key))
                throw ConfigError("config has unknown key '" + key + "'");

        ExperimentSpec spec;
        try
        {
            spec.base.n_ports = read_count(j, "n_ports");
            spec.base.n_antennas = read_count(j, "n_antennas");
            spec.base.n_users = read_count(j, "n_users");
            spec.base.n_blocks = read_count(j, "n_blocks");
            spec.base.n_slots = read_count(j, "n_slots");
            spec.base.mod_order = read_count(j, "mod_order");
            spec.n_trials = read_count(j, "n_trials");

            const auto &seed = j.at("master_seed");
            if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
                throw ConfigError("master_seed must be a non-negative integer");
            spec.base.master_seed = seed.get<std::uint64_t>();

            const auto axis = parse_axis(j.at("sweep_axis").get<std::string>());
            if (!axis)
                throw ConfigError("sweep_axis must be \"snr_db\" or \"n_ports\"");
            spec.sweep_axis = *axis;

            const auto &values = j.at("sweep_values");
            if (!values.is_array())
                throw ConfigError("sweep_values must be an array");
            for (const auto &v : values)
                spec.sweep_values.push_back(read_real(v, "sweep_values entry"));

            const auto &recv = j.at("receivers");
            if (!recv.is_array())
                throw ConfigError("receivers must be an array");
            for (const auto &r : recv)
            {
                const auto kind = parse_receiver(r.get<std::string>());
                if (!kind)
                    throw ConfigError("unknown receiver '" + r.get<std::string>() +
                                      "' (expected semi-blind, pilot or fixed-antenna)");
                spec.receivers.push_back(*kind);
            }

            spec.output_path = j.at("output_path").get<std::string>();

            if (j.contains("snr_db"))
                spec.base.snr_db = read_real(j.at("snr_db"), "snr_db");
            else if (spec.sweep_axis == SweepAxis::n_ports)
                throw ConfigError("snr_db is required when sweeping n_ports");
            if (j.contains("experiment"))
                spec.experiment = j.at("experiment").get<std::string>();
            if (j.contains("delta"))
                spec.delta = read_real(j.at("delta"), "delta");
            if (j.contains("max_iters"))
                spec.max_iters = read_count(j, "max_iters");
            if (j.contains("n_starts"))
                spec.n_starts = read_count(j, "n_starts");
        }
        catch (const json::exception &e)
        {
            throw ConfigError(std::string("config has a field of the wrong type: ") + e.what());
        }
        if (spec.experiment.find_first_of(",\"\n\r") != std::string::npos)
            throw ConfigError("experiment name may not contain commas, quotes or newlines");

        spec.validate();
        return spec;
    }

    ExperimentSpec load_spec(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot read config file '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_spec(ss.str());
    }

    void require_identifiable(const ExperimentSpec &spec)
    {
        for (double v : spec.sweep_values)
        {
            const SystemConfig cfg = spec.config_at(v);
            const auto id = check_identifiability(cfg);
            if (id.ok)
                continue;
            std::ostringstream msg;
            msg << to_string(spec.sweep_axis) << " = " << format_number(v) << ": ";
            if (!id.channel_ok)
                msg << "T*M*P = " << cfg.n_slots * cfg.n_antennas * cfg.n_blocks << " < N*K = "
                    << cfg.n_ports * cfg.n_users << "; ";
            if (!id.symbols_ok)
                msg << "P*M = " << cfg.n_blocks * cfg.n_antennas << " < K = " << cfg.n_users << "; ";
            msg << "max_users = " << id.max_users;
            throw IdentifiabilityError(msg.str());
        }
    }

    std::uint64_t trial_seed(std::uint64_t master_seed, Index trial)
    {
        return derive_seed(master_seed, {static_cast<std::uint64_t>(trial)});
    }

    TrialMetrics run_trial(const SystemConfig &cfg, ReceiverKind receiver, std::uint64_t seed, const BalsOptions &opts)
    {
        cfg.validate();
        if (!check_identifiability(cfg).ok)
            throw IdentifiabilityError("configuration violates T*M*P >= N*K or P*M >= K");
        if (receiver == ReceiverKind::fixed_antenna && cfg.n_antennas != cfg.n_ports)
            throw ConfigError("fixed-antenna receiver needs n_antennas == n_ports");

        Rng switching_rng = make_stream(seed, Stream::switching);
        Rng channel_rng = make_stream(seed, Stream::channel);
        Rng symbol_rng = make_stream(seed, Stream::symbols);
        Rng noise_rng = make_stream(seed, Stream::noise);
        Rng init_rng = make_stream(seed, Stream::init);

        const SwitchingSchedule schedule = receiver == ReceiverKind::fixed_antenna
                                               ? SwitchingSchedule::fixed(cfg.n_ports, cfg.n_blocks)
                                               : gen_switching(cfg, switching_rng);
        const cmat h = gen_channel(cfg, channel_rng);
        const cmat c = gen_coding(cfg);
        const cmat x = gen_symbols(cfg, symbol_rng);
        const ReceivedTensor y = synth_received(h, c, x, schedule, cfg.snr_db, noise_rng);

        TrialMetrics m;
        if (receiver == ReceiverKind::pilot)
        {
            m.nmse_channel = nmse(h, pilot_ls(y, x, c, schedule, opts.channel_solver));
            m.iterations = 1;
            m.converged = true;
            return m;
        }

        BalsOptions run_opts = opts;
        run_opts.mod_order = cfg.mod_order;
        const BalsResult est = bals(y, c, schedule, run_opts, init_rng);
        const auto [h_hat, x_hat] = remove_ambiguity(est.h_hat, est.x_hat);
        m.nmse_channel = nmse(h, h_hat);
        m.ser = ser(x, x_hat, cfg.mod_order);
        m.iterations = est.iterations;
        m.converged = est.converged;
        return m;
    }

    double compensated_mean(const std::vector<double> &values)
    {
        if (values.empty())
            return 0.0;
        double sum = 0.0, comp = 0.0;
        for (double v : values)
        {
            const double t = sum + v;
            if (std::abs(sum) >= std::abs(v))
                comp += (sum - t) + v;
            else
                comp += (v - t) + sum;
            sum = t;
        }
        return (sum + comp) / static_cast<double>(values.size());
    }

    std::vector<SweepRow> run_sweep(const ExperimentSpec &spec, unsigned workers)
    {
        spec.validate();
        require_identifiable(spec);

        std::ofstream out;
        if (!spec.output_path.empty())
        {
            out.open(spec.output_path, std::ios::binary | std::ios::trunc);
            if (!out)
                throw std::runtime_error("cannot open output file '" + spec.output_path + "'");
        }

        BalsOptions opts;
        opts.delta = spec.delta;
        opts.max_iters = spec.max_iters;
        opts.n_starts = spec.n_starts;

        const std::size_t n_points = spec.sweep_values.size();
        const std::size_t n_recv = spec.receivers.size();
        const std::size_t n_trials = static_cast<std::size_t>(spec.n_trials);
        const std::size_t n_tasks = n_points * n_recv * n_trials;

        // results keyed by (point, receiver, trial) so the reduction order never depends on scheduling
        std::vector<TrialMetrics> results(n_tasks);
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;

        auto work = [&] {
            for (std::size_t task = next++; task < n_tasks; task = next++)
            {
                const std::size_t trial = task % n_trials;
                const std::size_t recv = (task / n_trials) % n_recv;
                const std::size_t point = task / (n_trials * n_recv);
                const double value = spec.sweep_values[point];
                try
                {
                    results[task] = run_trial(spec.config_at(value), spec.receivers[recv],
                                              trial_seed(spec.base.master_seed, static_cast<Index>(trial)), opts);
                }
                catch (...)
                {
                    std::lock_guard lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                    next = n_tasks;
                }
            }
        };

        const unsigned n_threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n_tasks)));
        if (n_threads == 1)
            work();
        else
        {
            std::vector<std::jthread> pool;
            for (unsigned i = 0; i < n_threads; ++i)
                pool.emplace_back(work);
        }
        if (failure)
            std::rethrow_exception(failure);

        std::vector<SweepRow> rows;
        rows.reserve(n_points * n_recv);
        for (std::size_t point = 0; point < n_points; ++point)
            for (std::size_t recv = 0; recv < n_recv; ++recv)
            {
                const auto first = results.begin() + static_cast<std::ptrdiff_t>((point * n_recv + recv) * n_trials);
                std::vector<double> nmse_v, ser_v, iter_v, conv_v;
                for (auto it = first; it != first + static_cast<std::ptrdiff_t>(n_trials); ++it)
                {
                    nmse_v.push_back(it->nmse_channel);
                    if (it->ser)
                        ser_v.push_back(*it->ser);
                    iter_v.push_back(static_cast<double>(it->iterations));
                    conv_v.push_back(it->converged ? 1.0 : 0.0);
                }
                SweepRow row;
                row.axis_value = spec.sweep_values[point];
                row.receiver = spec.receivers[recv];
                row.config = spec.config_at(row.axis_value);
                row.n_trials = spec.n_trials;
                row.nmse_mean = compensated_mean(nmse_v);
                if (!ser_v.empty())
                    row.ser_mean = compensated_mean(ser_v);
                row.iter_mean = compensated_mean(iter_v);
                row.converged_fraction = compensated_mean(conv_v);
                rows.push_back(row);
            }

        if (out.is_open())
        {
            write_csv(out, spec, rows);
            out.flush();
            if (!out)
                throw std::runtime_error("failed writing output file '" + spec.output_path + "'");
        }
        return rows;
    }

    std::string format_number(double v)
    {
        if (std::isinf(v))
            return v > 0 ? "inf" : "-inf";
        if (std::isnan(v))
            return "nan";
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, res.ptr);
    }

    void write_csv(std::ostream &os, const ExperimentSpec &spec, const std::vector<SweepRow> &rows)
    {
        os << kCsvHeader << '\n';
        for (const auto &r : rows)
        {
            const auto &c = r.config;
            os << spec.experiment << ',' << to_string(r.receiver) << ',' << to_string(spec.sweep_axis) << ','
               << format_number(r.axis_value) << ',' << c.n_ports << ',' << c.n_antennas << ',' << c.n_users << ','
               << c.n_blocks << ',' << c.n_slots << ',' << c.mod_order << ',' << r.n_trials << ','
               << format_number(r.nmse_mean) << ',' << (r.ser_mean ? format_number(*r.ser_mean) : std::string())
               << ',' << format_number(r.iter_mean) << ',' << format_number(r.converged_fraction) << '\n';
        }
    }
}
