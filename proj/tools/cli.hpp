// SPDX-License-Identifier: Apache-2.0
//
// thzbt - hierarchical beam-tracking link-level simulator
// Copyright (C) 2026 The thzbt authors
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

// Command-line front end: run, sweep, dump-codebook and trace subcommands.
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#pragma once

#include "thzbt/thzbt.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace thzbt::cli
{

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_runtime = 3;
inline constexpr std::size_t full_scale_episodes = 10000;

struct Options
{
    int elements = 256;
    double snr_db = 10.0;
    std::string snr_reference = "level";
    std::vector<double> sigma_e{0.0};
    std::vector<int> qi{10};
    std::size_t episodes = 1000;
    std::uint64_t seed = 1;
    std::vector<std::string> trackers{"proposed"};
    std::vector<int> pilots_per_level;
    int refine_depth = 3;
    bool no_noise = false;
    bool full_scale = false;
    unsigned threads = 0;
    double step = 1.0;
    int steps = 10;
    double room = 5.0;
    double start_radius = 1.5;
    std::string out;

    // sweep
    std::string axis = "q_i";
    std::vector<double> values;

    // trace
    std::uint64_t episode = 0;
};

inline ScenarioConfig make_scenario(const Options &o)
{
    ScenarioConfig sc;
    sc.array.n_elements = o.elements;
    sc.array.validate();
    sc.room.width = o.room;
    sc.room.height = o.room;
    sc.room.ap_position = {0.0, 0.5 * o.room};
    sc.walk.step_length = o.step;
    sc.walk.num_original_steps = o.steps;
    sc.walk.start_disk_radius = o.start_radius;
    sc.snr_db = o.snr_db;
    sc.no_noise = o.no_noise;
    if (o.snr_reference == "level")
        sc.snr_reference = SnrReference::MeasuredLevel;
    else if (o.snr_reference == "finest")
        sc.snr_reference = SnrReference::FinestLevel;
    else
        throw ConfigError("snr reference must be 'level' or 'finest'");
    sc.episodes = o.full_scale ? full_scale_episodes : o.episodes;
    sc.base_seed = o.seed;
    sc.threads = o.threads;
    sc.q_i_values = o.qi;
    sc.sigma_e_values = o.sigma_e;
    sc.trackers.clear();
    for (const auto &t : o.trackers)
        sc.trackers.push_back(parse_tracker_kind(t));
    if (sc.trackers.empty())
        throw ConfigError("at least one tracker is required");
    const int levels = sc.array.levels();
    sc.tracker = TrackerConfig::defaults(levels);
    sc.tracker.refine_depth = o.refine_depth;
    if (!o.pilots_per_level.empty())
        sc.tracker.pilots_per_level = o.pilots_per_level;
    if (sc.q_i_values.empty() || sc.sigma_e_values.empty())
        throw ConfigError("--qi and --sigma-e need at least one value");
    return sc;
}

// Writes to --out when given, otherwise to `fallback`.
class Sink
{
  public:
    Sink(const std::string &path, std::ostream &fallback) : os_(&fallback)
    {
        if (!path.empty())
        {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_)
                throw std::runtime_error("cannot open output file '" + path + "'");
            os_ = file_.get();
        }
    }
    std::ostream &stream() { return *os_; }

  private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream *os_;
};

inline int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
    CLI::App app{"THz hierarchical beam-tracking Monte Carlo simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "INI config file; command-line flags override it");

    Options o;
    app.add_option("--elements", o.elements, "ULA elements (power of two)")->capture_default_str();
    app.add_option("--snr-db", o.snr_db, "Per-pilot SNR in dB")->capture_default_str();
    app.add_option("--snr-reference", o.snr_reference, "SNR reference: level (each codeword's peak) or finest")
        ->capture_default_str();
    app.add_option("--sigma-e", o.sigma_e, "Ranging noise std in meters (comma list)")->delimiter(',');
    app.add_option("--qi", o.qi, "Resampling factor Q_I (comma list)")->delimiter(',');
    app.add_option("--episodes", o.episodes, "Monte Carlo episodes")->capture_default_str();
    app.add_option("--seed", o.seed, "Base seed")->capture_default_str();
    app.add_option("--tracker", o.trackers, "proposed, fct, level8 (comma list)")->delimiter(',');
    app.add_option("--pilots-per-level", o.pilots_per_level, "Pilots for each level 1..U (comma list)")
        ->delimiter(',');
    app.add_option("--refine-depth", o.refine_depth, "Refinement starts at level U - g")->capture_default_str();
    app.add_flag("--no-noise", o.no_noise, "Disable measurement noise");
    app.add_flag("--full-scale", o.full_scale, "Run 10000 episodes");
    app.add_option("--threads", o.threads, "Worker threads (0: all cores)");
    app.add_option("--step", o.step, "Random-walk step length in meters")->capture_default_str();
    app.add_option("--steps", o.steps, "Original random-walk steps per episode")->capture_default_str();
    app.add_option("--room", o.room, "Square room side in meters")->capture_default_str();
    app.add_option("--start-radius", o.start_radius, "Start disk radius in meters")->capture_default_str();
    app.add_option("--out", o.out, "Output path (default stdout)");

    auto *run = app.add_subcommand("run", "Run one scenario, one CSV row per tracker");
    auto *sweep_cmd = app.add_subcommand("sweep", "Sweep one axis, one CSV row per value and tracker");
    sweep_cmd->add_option("--axis", o.axis, "sigma_e, q_i or pilots_per_level")->capture_default_str();
    sweep_cmd->add_option("--values", o.values, "Axis values (comma list)")->delimiter(',')->required();
    auto *dump = app.add_subcommand("dump-codebook", "Write the codebook as text");
    auto *trace = app.add_subcommand("trace", "Per-slot trace of one episode");
    trace->add_option("--episode", o.episode, "Episode index")->capture_default_str();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_config;
    }

    try
    {
        const ScenarioConfig sc = make_scenario(o);
        const Codebook book = build_codebook(sc.array);
        Sink sink(o.out, out);

        if (*dump)
        {
            dump_codebook(book, sink.stream());
            return exit_ok;
        }
        sc.validate(book);
        if (*run)
        {
            std::vector<SweepRow> rows;
            for (int q : sc.q_i_values)
                for (double s : sc.sigma_e_values)
                    for (TrackerKind k : sc.trackers)
                    {
                        const auto eps = run_batch(book, sc, k, q, s);
                        rows.push_back({std::string(to_string(k)), q, s, sc.no_noise ? INFINITY : sc.snr_db,
                                        reduce(eps)});
                    }
            write_csv(sink.stream(), rows);
        }
        else if (*sweep_cmd)
        {
            const auto rows = sweep(book, sc, parse_sweep_axis(o.axis), o.values);
            write_csv(sink.stream(), rows);
        }
        else if (*trace)
        {
            const auto ep = run_episode(book, sc, sc.trackers.front(), sc.q_i_values.front(),
                                        sc.sigma_e_values.front(), o.episode, true);
            write_trace(sink.stream(), ep.trace);
        }
        return exit_ok;
    }
    catch (const ConfigError &e)
    {
        err << "configuration error: " << e.what() << '\n';
        return exit_config;
    }
    catch (const std::exception &e)
    {
        err << "error: " << e.what() << '\n';
        return exit_runtime;
    }
}

} // namespace thzbt::cli
