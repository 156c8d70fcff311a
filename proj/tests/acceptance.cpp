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

// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit status if
// any criterion fails.

#include "thzbt/thzbt.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace thzbt;

namespace
{

using Clock = std::chrono::steady_clock;

struct Outcome
{
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string &name, const Outcome &o, double seconds)
{
    std::printf("[%s] criterion %d: %s (%.1f s) -- %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), seconds,
                o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
}

void run_criterion(int id, const std::string &name, const std::function<Outcome()> &fn)
{
    const auto t0 = Clock::now();
    Outcome o;
    try
    {
        o = fn();
    }
    catch (const std::exception &e)
    {
        o = {false, std::string("exception: ") + e.what()};
    }
    report(id, name, o, std::chrono::duration<double>(Clock::now() - t0).count());
}

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char *f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const Codebook &book()
{
    static const Codebook b = build_codebook(ArrayConfig{});
    return b;
}

ScenarioConfig reference_scenario()
{
    ScenarioConfig sc;
    sc.episodes = 1000;
    sc.base_seed = 20260101;
    return sc;
}

// 95% half-width of the mean paired difference a - b over episodes.
struct Paired
{
    double mean = 0.0;
    double ci95 = 0.0;
};

Paired paired_mse_difference(const std::vector<EpisodeResult> &a, const std::vector<EpisodeResult> &b)
{
    const std::size_t n = a.size();
    double s = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double d = a[i].mse() - b[i].mse();
        s += d;
        ss += d * d;
    }
    const double mean = s / n;
    const double var = (ss - n * mean * mean) / (n - 1);
    return {mean, 1.96 * std::sqrt(var / n)};
}

} // namespace

int main()
{
    const Codebook &cb = book();
    const TrackerConfig defaults = TrackerConfig::defaults(cb.levels());

    run_criterion(1, "initialization slots use exactly 28 pilots (78.125% below 128)", [&] {
        const auto t0 = Clock::now();
        ScenarioConfig sc = reference_scenario();
        std::size_t init_slots_seen = 0;
        for (TrackerKind k : {TrackerKind::Proposed, TrackerKind::Level8})
            for (std::uint64_t e = 0; e < 100; ++e)
            {
                const auto ep = run_episode(cb, sc, k, 1 + static_cast<int>(e % 10), 0.5 * (e % 2), e, true);
                for (const auto &s : ep.trace)
                    if (s.phase == Phase::Initializing)
                    {
                        ++init_slots_seen;
                        if (s.pilots_used != 28)
                            return Outcome{false, fmt("init slot used %zu pilots", s.pilots_used)};
                    }
            }
        int schedule = 0;
        for (int u = 1; u <= cb.levels(); ++u)
            schedule += defaults.pilots(u);
        const double reduction = 100.0 * (1.0 - static_cast<double>(schedule) / 128.0);
        const bool rounds = std::abs(std::round(reduction * 100.0) / 100.0 - 78.13) < 1e-9;
        const double t = elapsed(t0);
        return Outcome{schedule == 28 && rounds && t < 1.0,
                       fmt("%zu init slots checked, schedule %d pilots, reduction %.3f%%", init_slots_seen, schedule,
                           reduction)};
    });

    run_criterion(2, "tracking slots use exactly 16 pilots (proposed, fct, level8)", [&] {
        const auto t0 = Clock::now();
        ScenarioConfig sc = reference_scenario();
        std::map<TrackerKind, std::size_t> seen;
        for (TrackerKind k : {TrackerKind::Proposed, TrackerKind::Fct, TrackerKind::Level8})
            for (std::uint64_t e = 0; e < 60; ++e)
            {
                const auto ep = run_episode(cb, sc, k, 1 + static_cast<int>(e % 10), 0.5 * (e % 2), e, true);
                for (const auto &s : ep.trace)
                    if (s.phase == Phase::Tracking)
                    {
                        ++seen[k];
                        if (s.pilots_used != 16)
                            return Outcome{false, fmt("%s tracking slot used %zu pilots",
                                                      std::string(to_string(k)).c_str(), s.pilots_used)};
                    }
            }
        const double t = elapsed(t0);
        return Outcome{t < 1.0 && seen[TrackerKind::Proposed] > 0 && seen[TrackerKind::Fct] > 0 &&
                           seen[TrackerKind::Level8] > 0,
                       fmt("tracking slots checked: proposed %zu, fct %zu, level8 %zu", seen[TrackerKind::Proposed],
                           seen[TrackerKind::Fct], seen[TrackerKind::Level8])};
    });

    // Shared pilot-overhead runs for criteria 3 and 4.
    const std::vector<int> qis{1, 2, 5, 10};
    const std::vector<double> sigmas{0.0, 0.5};
    std::map<std::tuple<TrackerKind, int, double>, RunMetrics> overhead;
    double overhead_seconds = 0.0;
    {
        const auto t0 = Clock::now();
        const ScenarioConfig sc = reference_scenario();
        for (int q : qis)
            for (double s : sigmas)
                for (TrackerKind k : {TrackerKind::Proposed, TrackerKind::Level8, TrackerKind::Fct})
                    overhead[{k, q, s}] = reduce(run_batch(cb, sc, k, q, s));
        overhead_seconds = elapsed(t0);
    }

    run_criterion(3, "overhead ordering proposed < level8 < fct, proposed/fct CIs disjoint", [&] {
        std::ostringstream os;
        bool ok = overhead_seconds < 300.0;
        for (int q : qis)
            for (double s : sigmas)
            {
                const auto &p = overhead[{TrackerKind::Proposed, q, s}];
                const auto &l = overhead[{TrackerKind::Level8, q, s}];
                const auto &f = overhead[{TrackerKind::Fct, q, s}];
                const bool row = p.avg_pilots < l.avg_pilots && l.avg_pilots < f.avg_pilots &&
                                 p.avg_pilots + p.avg_pilots_ci95 < f.avg_pilots - f.avg_pilots_ci95;
                ok = ok && row;
                os << fmt("Q_I=%d s=%.1f: %.2f/%.2f/%.2f%s; ", q, s, p.avg_pilots, l.avg_pilots, f.avg_pilots,
                          row ? "" : " (violated)");
            }
        os << fmt("runtime %.1f s", overhead_seconds);
        return Outcome{ok, os.str()};
    });

    run_criterion(4, "proposed pilots non-increasing in Q_I; Q_I=10, sigma_e=0 within [16, 30]", [&] {
        std::ostringstream os;
        bool ok = true;
        for (double s : sigmas)
        {
            for (std::size_t i = 0; i + 1 < qis.size(); ++i)
            {
                const auto &a = overhead[{TrackerKind::Proposed, qis[i], s}];
                const auto &b = overhead[{TrackerKind::Proposed, qis[i + 1], s}];
                const bool step = b.avg_pilots <= a.avg_pilots + a.avg_pilots_ci95 + b.avg_pilots_ci95;
                ok = ok && step;
                if (!step)
                    os << fmt("increase at s=%.1f Q_I %d->%d; ", s, qis[i], qis[i + 1]);
            }
            os << fmt("s=%.1f: ", s);
            for (int q : qis)
                os << fmt("%.2f ", overhead[{TrackerKind::Proposed, q, s}].avg_pilots);
            os << "; ";
        }
        const double at10 = overhead[{TrackerKind::Proposed, 10, 0.0}].avg_pilots;
        ok = ok && at10 >= 16.0 && at10 <= 30.0;
        os << fmt("Q_I=10 s=0: %.2f", at10);
        return Outcome{ok, os.str()};
    });

    run_criterion(5, "MSE ordering 4 < 3 < 2 pilots per level at Q_I=10 (paired 95%)", [&] {
        ScenarioConfig sc = reference_scenario();
        std::map<int, std::vector<EpisodeResult>> runs;
        for (int p : {2, 3, 4})
        {
            sc.tracker = TrackerConfig::with_pilots(cb.levels(), p);
            runs[p] = run_batch(cb, sc, TrackerKind::Proposed, 10, 0.0);
        }
        const Paired d32 = paired_mse_difference(runs[3], runs[2]);
        const Paired d43 = paired_mse_difference(runs[4], runs[3]);
        const bool ok = d32.mean + d32.ci95 < 0.0 && d43.mean + d43.ci95 < 0.0;
        return Outcome{ok, fmt("MSE p2 %.5f, p3 %.5f, p4 %.5f rad^2; p3-p2 %.5f +- %.5f, p4-p3 %.5f +- %.5f",
                               reduce(runs[2]).mse, reduce(runs[3]).mse, reduce(runs[4]).mse, d32.mean, d32.ci95,
                               d43.mean, d43.ci95)};
    });

    run_criterion(6, "MSE(fct) / MSE(proposed) > 1.5 at Q_I=10, sigma_e in {0, 0.5}", [&] {
        const ScenarioConfig sc = reference_scenario();
        std::ostringstream os;
        bool ok = true;
        for (double s : sigmas)
        {
            const double fct = reduce(run_batch(cb, sc, TrackerKind::Fct, 10, s)).mse;
            const double prop = reduce(run_batch(cb, sc, TrackerKind::Proposed, 10, s)).mse;
            const double ratio = fct / prop;
            ok = ok && ratio > 1.5;
            os << fmt("s=%.1f: %.5f / %.5f = %.2f; ", s, fct, prop, ratio);
        }
        return Outcome{ok, os.str()};
    });

    run_criterion(7, "property suite", [&] {
        const auto t0 = Clock::now();
        std::ostringstream os;
        bool ok = true;
        auto check = [&](bool cond, const std::string &what) {
            ok = ok && cond;
            os << what << (cond ? " ok; " : " FAILED; ");
        };

        // tiling on exact integer sector edges
        bool tiling = true;
        const double sr = cb.config().spacing_ratio;
        for (int u = 1; u <= cb.levels(); ++u)
            for (const Codeword &cw : cb.level(u))
            {
                const double w = cb.sector_width(u);
                tiling = tiling && std::abs((cw.sector_low() + sr) / w - (cw.index - 1)) < 1e-9 &&
                         std::abs((cw.sector_high() + sr) / w - cw.index) < 1e-9;
            }
        check(tiling, "tiling");

        double rot = 0.0;
        for (int u = 1; u <= cb.levels(); ++u)
        {
            const Codeword &first = cb.at(u, 1);
            for (const Codeword &cw : cb.level(u))
                for (int g = 0; g < 1024; g += (u >= 7 ? 8 : 1))
                {
                    const double psi = -0.5 + (g + 0.5) / 1024.0;
                    const double dpsi = (cw.index - 1) * first.sector_width;
                    rot = std::max(rot, std::abs(codeword_gain(cw, psi, cb.config()) -
                                                 codeword_gain(first, psi - dpsi, cb.config())));
                }
        }
        check(rot < 1e-9, fmt("rotation closure %.2e", rot));

        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> upsi(-0.5, 0.5);
        double norm_err = 0.0;
        for (int i = 0; i < 1000; ++i)
        {
            double s = 0.0;
            for (const auto &x : steering_vector(cb.config(), upsi(rng)))
                s += std::norm(x);
            norm_err = std::max(norm_err, std::abs(s - 1.0));
        }
        check(norm_err < 1e-12, fmt("steering norm %.2e", norm_err));

        double pred = 0.0;
        std::uniform_real_distribution<double> upos(-5.0, 5.0);
        for (int i = 0; i < 100000; ++i)
        {
            const Point2D p0{upos(rng), upos(rng)};
            const Point2D v{0.1 * upos(rng), 0.1 * upos(rng)};
            const Point2D d = predict_location(p0, p0 + v, p0 + 2.0 * v) - (p0 + 3.0 * v);
            pred = std::max(pred, std::hypot(d.x, d.y));
        }
        check(pred < 1e-13, fmt("location prediction %.2e", pred));

        int hits = 0;
        constexpr int draws = 10000;
        NoiseModel quiet;
        quiet.enabled = false;
        std::vector<const Codeword *> all;
        for (const Codeword &cw : cb.level(cb.levels()))
            all.push_back(&cw);
        Rng mrng(2);
        PilotCounter counter;
        for (int i = 0; i < draws; ++i)
        {
            LosChannel ch;
            ch.psi = upsi(rng);
            hits += best_codeword(all, ch, quiet, cb, mrng, counter).winner->index == cb.sector_of(cb.levels(), ch.psi);
        }
        check(hits >= 0.99 * draws, fmt("noiseless in-sector %.4f", static_cast<double>(hits) / draws));

        bool sound = true;
        ScenarioConfig sc = reference_scenario();
        for (TrackerKind k : {TrackerKind::Proposed, TrackerKind::Fct, TrackerKind::Level8})
            for (std::uint64_t e = 0; e < 100; ++e)
            {
                const auto ep = run_episode(cb, sc, k, 1 + static_cast<int>(e % 10), 0.5, e, true);
                for (std::size_t t = 0; t + 1 < ep.trace.size(); ++t)
                {
                    const double err = std::abs(ep.trace[t].estimated_theta - ep.trace[t].true_theta);
                    const bool lost = err > restart_threshold(ep.trace[t].codeword, sc.tracker, cb);
                    if (lost && ep.trace[t + 1].phase != Phase::Initializing)
                        sound = false;
                }
            }
        check(sound, "restart soundness");

        sc.episodes = 200;
        sc.trackers = {TrackerKind::Proposed, TrackerKind::Fct, TrackerKind::Level8};
        const std::vector<double> q{2, 10};
        auto csv = [&](unsigned threads) {
            ScenarioConfig run = sc;
            run.threads = threads;
            std::ostringstream out;
            write_csv(out, sweep(cb, run, SweepAxis::QI, q));
            return out.str();
        };
        const std::string serial = csv(1);
        check(serial == csv(1) && serial == csv(4), "determinism serial/parallel");

        const double t = elapsed(t0);
        check(t < 60.0, fmt("runtime %.1f s", t));
        return Outcome{ok, os.str()};
    });

    run_criterion(8, "noiseless, sigma_e=0, Q_I=10: zero restarts, MSE within quantization bound", [&] {
        ScenarioConfig sc = reference_scenario();
        sc.no_noise = true;
        std::size_t restarts = 0;
        std::size_t restart_episodes = 0;
        double sq = 0.0;
        double bound = 0.0;
        std::size_t slots = 0;
        double clean_sq = 0.0;
        double clean_bound = 0.0;
        std::size_t clean_slots = 0;
        for (std::uint64_t e = 0; e < sc.episodes; ++e)
        {
            const auto ep = run_episode(cb, sc, TrackerKind::Proposed, 10, 0.0, e, true);
            restarts += ep.restarts;
            restart_episodes += ep.restarts > 0;
            sq += ep.squared_error;
            double ep_bound = 0.0;
            for (const auto &s : ep.trace)
            {
                // half-width in theta of the finest sector holding the true direction
                const Codeword &cw = cb.at(cb.levels(), cb.sector_of(cb.levels(), spatial_direction(s.true_theta, cb.config())));
                const double half = 0.5 * (direction_angle(cw.sector_high(), cb.config()) -
                                           direction_angle(cw.sector_low(), cb.config()));
                ep_bound += half * half;
            }
            bound += ep_bound;
            slots += ep.timeslots;
            if (ep.restarts == 0)
            {
                clean_sq += ep.squared_error;
                clean_bound += ep_bound;
                clean_slots += ep.timeslots;
            }
        }
        const double mse = sq / slots;
        const double mse_bound = bound / slots;
        return Outcome{restarts == 0 && mse <= mse_bound,
                       fmt("restarts %zu in %zu of %zu episodes; MSE %.3e vs bound %.3e rad^2; restart-free "
                           "episodes alone: MSE %.3e vs bound %.3e",
                           restarts, restart_episodes, sc.episodes, mse, mse_bound, clean_sq / clean_slots,
                           clean_bound / clean_slots)};
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
