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

// Monte Carlo driver: episodes, pooled metrics with 95% confidence half-widths,
// parameter sweeps and CSV / trace emission.
//
// Episode e draws its motion from stream (base_seed, e, 0) and its channel
// phase, measurement noise and ranging noise from stream (base_seed, e, 1).
// Every tracker therefore sees the same motions for the same seed, and results
// do not depend on how episodes are spread over threads.

#pragma once

#include "channel.hpp"
#include "codebook.hpp"
#include "geometry.hpp"
#include "trackers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace thzbt
{

struct ScenarioConfig
{
    RoomConfig room{};
    WalkParams walk{};
    ArrayConfig array{};
    double snr_db = 10.0;
    bool no_noise = false;
    SnrReference snr_reference = SnrReference::MeasuredLevel;
    double detection_factor = 4.0;
    PathlossModel pathloss{};
    TrackerConfig tracker = TrackerConfig::defaults(8);
    std::size_t episodes = 1000;
    std::uint64_t base_seed = 1;
    unsigned threads = 0; // 0: hardware concurrency

    std::vector<int> q_i_values{10};
    std::vector<double> sigma_e_values{0.0};
    std::vector<TrackerKind> trackers{TrackerKind::Proposed};

    NoiseModel noise() const
    {
        NoiseModel n;
        n.snr_db = snr_db;
        n.enabled = !no_noise;
        n.reference = snr_reference;
        n.detection_factor = detection_factor;
        return n;
    }

    void validate(const Codebook &book) const
    {
        room.validate();
        walk.validate(room);
        tracker.validate(book);
        if (episodes < 1)
            throw ConfigError("episodes must be >= 1");
        if (!std::isfinite(snr_db))
            throw ConfigError("snr_db must be finite");
        for (int q : q_i_values)
            if (q < 1)
                throw ConfigError("q_i values must be >= 1");
        for (double s : sigma_e_values)
            if (!(s >= 0.0))
                throw ConfigError("sigma_e values must be non-negative");
    }
};

struct EpisodeResult
{
    std::size_t timeslots = 0;
    std::size_t pilots = 0;       // sum of per-slot pilots_used
    std::size_t pilot_audit = 0;  // measure_pilot invocations
    double squared_error = 0.0;   // sum over slots of (theta~ - theta)^2
    std::size_t restarts = 0;
    std::vector<SlotResult> trace; // filled on request

    double mse() const noexcept { return timeslots ? squared_error / timeslots : 0.0; }
    double avg_pilots() const noexcept { return timeslots ? static_cast<double>(pilots) / timeslots : 0.0; }
};

struct RunMetrics
{
    double mse = 0.0;
    double mse_ci95 = 0.0;
    double avg_pilots = 0.0;
    double avg_pilots_ci95 = 0.0;
    double restart_rate = 0.0;
    std::size_t episodes = 0;
    std::size_t timeslots = 0;
};

/// One motion, tracked over its timeslots. Timeslot t serves positions[t],
/// t = 0 .. timeslot_count - 1.
inline EpisodeResult run_episode(const Codebook &book, const ScenarioConfig &sc, TrackerKind kind, int q_i,
                                 double sigma_e, std::uint64_t episode, bool keep_trace = false)
{
    WalkParams walk = sc.walk;
    walk.q_i = q_i;
    walk.rng_seed = sc.base_seed;
    Rng motion_rng = make_stream(sc.base_seed, episode, 0);
    const MotionPath path = generate_motion(sc.room, walk, motion_rng);

    TrackerConfig cfg = sc.tracker;
    cfg.sigma_e = sigma_e;
    Rng rng = make_stream(sc.base_seed, episode, 1);
    LinkContext link;
    link.book = &book;
    link.ap = sc.room.ap_position;
    link.noise = sc.noise();
    link.pathloss = sc.pathloss;
    link.beta_phase = draw_channel_phase(rng);

    EpisodeResult out;
    TrackerState state;
    const std::size_t slots = path.timeslot_count();
    if (keep_trace)
        out.trace.reserve(slots);
    for (std::size_t t = 0; t < slots; ++t)
    {
        const SlotResult res = step(kind, state, path.positions[t], cfg, link, rng);
        const double err = res.estimated_theta - res.true_theta;
        out.squared_error += err * err;
        out.pilots += res.pilots_used;
        if (keep_trace)
            out.trace.push_back(res);
    }
    out.timeslots = slots;
    out.restarts = state.restarts;
    out.pilot_audit = state.pilots.count;
    return out;
}

/// Episodes [0, sc.episodes) in index order, spread over worker threads.
inline std::vector<EpisodeResult> run_batch(const Codebook &book, const ScenarioConfig &sc, TrackerKind kind, int q_i,
                                            double sigma_e)
{
    std::vector<EpisodeResult> results(sc.episodes);
    unsigned workers = sc.threads ? sc.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, sc.episodes));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t e = next++; e < sc.episodes; e = next++)
            results[e] = run_episode(book, sc, kind, q_i, sigma_e, e);
    };
    if (workers <= 1)
    {
        work();
        return results;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back(work);
    return results;
}

/// Mean of squared errors.
inline double compute_mse(std::span<const double> errors)
{
    if (errors.empty())
        throw std::invalid_argument("compute_mse needs at least one error");
    double acc = 0.0;
    for (double e : errors)
        acc += e * e;
    return acc / static_cast<double>(errors.size());
}

/// Total pilots over total timeslots.
inline double compute_avg_pilots(std::span<const EpisodeResult> episodes)
{
    if (episodes.empty())
        throw std::invalid_argument("compute_avg_pilots needs at least one episode");
    std::size_t pilots = 0;
    std::size_t slots = 0;
    for (const auto &e : episodes)
    {
        pilots += e.pilots;
        slots += e.timeslots;
    }
    if (slots == 0)
        throw std::invalid_argument("compute_avg_pilots needs at least one timeslot");
    return static_cast<double>(pilots) / static_cast<double>(slots);
}

namespace detail
{

// 1.96 * standard error of the mean of xs.
inline double ci95(std::span<const double> xs)
{
    const std::size_t n = xs.size();
    if (n < 2)
        return 0.0;
    double mean = 0.0;
    for (double x : xs)
        mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : xs)
        ss += (x - mean) * (x - mean);
    return 1.96 * std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

} // namespace detail

/// Pooled metrics. The confidence half-widths treat episodes as the
/// independent replicates (per-episode MSE and per-episode pilots per slot).
inline RunMetrics reduce(std::span<const EpisodeResult> episodes)
{
    if (episodes.empty())
        throw std::invalid_argument("reduce needs at least one episode");
    RunMetrics m;
    m.episodes = episodes.size();
    double sq = 0.0;
    std::size_t restarts = 0;
    std::vector<double> ep_mse;
    std::vector<double> ep_pilots;
    ep_mse.reserve(episodes.size());
    ep_pilots.reserve(episodes.size());
    for (const auto &e : episodes)
    {
        sq += e.squared_error;
        m.timeslots += e.timeslots;
        restarts += e.restarts;
        ep_mse.push_back(e.mse());
        ep_pilots.push_back(e.avg_pilots());
    }
    m.avg_pilots = compute_avg_pilots(episodes);
    m.mse = sq / static_cast<double>(m.timeslots);
    m.restart_rate = static_cast<double>(restarts) / static_cast<double>(m.timeslots);
    m.mse_ci95 = detail::ci95(ep_mse);
    m.avg_pilots_ci95 = detail::ci95(ep_pilots);
    return m;
}

enum class SweepAxis
{
    SigmaE,
    QI,
    PilotsPerLevel,
};

inline SweepAxis parse_sweep_axis(std::string_view s)
{
    if (s == "sigma_e" || s == "sigma-e")
        return SweepAxis::SigmaE;
    if (s == "q_i" || s == "qi")
        return SweepAxis::QI;
    if (s == "pilots_per_level" || s == "pilots-per-level" || s == "pilots")
        return SweepAxis::PilotsPerLevel;
    throw ConfigError("unknown sweep axis '" + std::string(s) + "'");
}

struct SweepRow
{
    std::string tracker;
    int q_i = 1;
    double sigma_e = 0.0;
    double snr_db = 0.0;
    RunMetrics metrics;
};

/// One row per (q_i, sigma_e, [pilots], tracker). The axis values replace the
/// scenario's own list for that axis. On the pilots axis, value p sets levels
/// 3..U to p pilots and the tracker label becomes e.g. "proposed:p3".
inline std::vector<SweepRow> sweep(const Codebook &book, ScenarioConfig sc, SweepAxis axis,
                                   std::span<const double> values)
{
    if (values.empty())
        throw ConfigError("sweep needs at least one axis value");
    std::vector<int> pilot_values{0};
    switch (axis)
    {
    case SweepAxis::SigmaE:
        sc.sigma_e_values.assign(values.begin(), values.end());
        break;
    case SweepAxis::QI:
        sc.q_i_values.clear();
        for (double v : values)
            sc.q_i_values.push_back(static_cast<int>(std::lround(v)));
        break;
    case SweepAxis::PilotsPerLevel:
        pilot_values.clear();
        for (double v : values)
            pilot_values.push_back(static_cast<int>(std::lround(v)));
        break;
    }

    std::vector<SweepRow> rows;
    const TrackerConfig base_cfg = sc.tracker;
    for (int q : sc.q_i_values)
        for (double s : sc.sigma_e_values)
            for (int p : pilot_values)
            {
                ScenarioConfig run = sc;
                if (p > 0)
                    run.tracker = TrackerConfig::with_pilots(book.levels(), p);
                else
                    run.tracker = base_cfg;
                run.validate(book);
                for (TrackerKind k : sc.trackers)
                {
                    SweepRow row;
                    row.tracker = std::string(to_string(k));
                    if (p > 0)
                        row.tracker += ":p" + std::to_string(p);
                    row.q_i = q;
                    row.sigma_e = s;
                    row.snr_db = sc.no_noise ? INFINITY : sc.snr_db;
                    const auto eps = run_batch(book, run, k, q, s);
                    row.metrics = reduce(eps);
                    rows.push_back(std::move(row));
                }
            }
    return rows;
}

inline constexpr const char *csv_header =
    "tracker,q_i,sigma_e_m,snr_db,episodes,mse_rad2,mse_ci95,avg_pilots,avg_pilots_ci95,restart_rate";

namespace detail
{
inline std::string fmt_double(double v)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}
} // namespace detail

inline void write_csv(std::ostream &os, std::span<const SweepRow> rows)
{
    os << csv_header << '\n';
    for (const auto &r : rows)
    {
        const RunMetrics &m = r.metrics;
        os << r.tracker << ',' << r.q_i << ',' << detail::fmt_double(r.sigma_e) << ','
           << detail::fmt_double(r.snr_db) << ',' << m.episodes << ',' << detail::fmt_double(m.mse) << ','
           << detail::fmt_double(m.mse_ci95) << ',' << detail::fmt_double(m.avg_pilots) << ','
           << detail::fmt_double(m.avg_pilots_ci95) << ',' << detail::fmt_double(m.restart_rate) << '\n';
    }
}

inline constexpr const char *trace_header = "timeslot,phase,pilots,theta_rad,theta_hat_rad,restart";

/// Per-slot trace, one record per line.
inline void write_trace(std::ostream &os, std::span<const SlotResult> trace)
{
    os << trace_header << '\n';
    for (std::size_t t = 0; t < trace.size(); ++t)
    {
        const SlotResult &s = trace[t];
        os << t << ',' << (s.phase == Phase::Initializing ? "init" : "track") << ',' << s.pilots_used << ','
           << detail::fmt_double(s.true_theta) << ',' << detail::fmt_double(s.estimated_theta) << ','
           << (s.restarted ? 1 : 0) << '\n';
    }
}

} // namespace thzbt
