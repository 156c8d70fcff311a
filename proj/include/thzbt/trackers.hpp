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

// Per-timeslot beam trackers: the three-phase hierarchical tracker, the
// fast channel tracking (FCT) baseline, and the finest-level-only ablation.
//
// All trackers share one restart rule: when the angular error of a slot
// exceeds the half-power beamwidth of the serving beam, or the slot's search
// failed outright, the link is considered lost and the next slot starts a
// fresh three-slot initialization.

#pragma once

#include "channel.hpp"
#include "codebook.hpp"
#include "geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace thzbt
{

enum class TrackerKind
{
    Proposed,
    Fct,
    Level8,
};

inline std::string_view to_string(TrackerKind k) noexcept
{
    switch (k)
    {
    case TrackerKind::Proposed:
        return "proposed";
    case TrackerKind::Fct:
        return "fct";
    case TrackerKind::Level8:
        return "level8";
    }
    return "unknown";
}

inline TrackerKind parse_tracker_kind(std::string_view s)
{
    if (s == "proposed")
        return TrackerKind::Proposed;
    if (s == "fct")
        return TrackerKind::Fct;
    if (s == "level8")
        return TrackerKind::Level8;
    throw ConfigError("unknown tracker '" + std::string(s) + "' (expected proposed, fct or level8)");
}

inline constexpr int init_slots = 3;
inline constexpr double min_range_estimate = 0.001;

struct TrackerConfig
{
    std::vector<int> pilots_per_level; // entry u-1 is the budget of level u
    int refine_depth = 3;              // g: refinement starts at level U - g
    double sigma_e = 0.0;              // ranging noise std, meters
    int restart_beamwidth_level = 0;   // 0 selects the finest level
    int fct_init_pilots = 0;           // 0 selects N / 2
    int fct_tracking_pilots = 16;

    /// 2 pilots for levels 1-2, 4 above; refinement over the last four levels.
    static TrackerConfig defaults(int levels)
    {
        TrackerConfig cfg;
        cfg.pilots_per_level.assign(static_cast<std::size_t>(levels), 4);
        for (int u = 1; u <= std::min(2, levels); ++u)
            cfg.pilots_per_level[static_cast<std::size_t>(u - 1)] = 2;
        cfg.refine_depth = std::max(1, std::min(3, levels - 3));
        return cfg;
    }

    /// Uniform budget p for levels 3 and up, 2 for levels 1-2.
    static TrackerConfig with_pilots(int levels, int p)
    {
        TrackerConfig cfg = defaults(levels);
        for (int u = 3; u <= levels; ++u)
            cfg.pilots_per_level[static_cast<std::size_t>(u - 1)] = p;
        return cfg;
    }

    int pilots(int level) const { return pilots_per_level.at(static_cast<std::size_t>(level - 1)); }

    int refine_start_level(const Codebook &book) const noexcept { return book.levels() - refine_depth; }

    int restart_level(const Codebook &book) const noexcept
    {
        return restart_beamwidth_level == 0 ? book.levels() : restart_beamwidth_level;
    }

    int fct_init_budget(const Codebook &book) const noexcept
    {
        return fct_init_pilots == 0 ? book.config().n_elements / 2 : fct_init_pilots;
    }

    /// Pilots of one refinement slot; the finest-level ablation spends the same.
    int refine_pilots(const Codebook &book) const
    {
        int total = 0;
        for (int u = refine_start_level(book); u <= book.levels(); ++u)
            total += pilots(u);
        return total;
    }

    void validate(const Codebook &book) const
    {
        const int levels = book.levels();
        if (static_cast<int>(pilots_per_level.size()) != levels)
            throw ConfigError("pilots_per_level needs one entry per codebook level (" + std::to_string(levels) + ")");
        for (int u = 1; u <= levels; ++u)
            if (pilots(u) < 1 || pilots(u) > book.size(u))
                throw ConfigError("pilots for level " + std::to_string(u) + " must lie in [1, " +
                                  std::to_string(book.size(u)) + "]");
        if (levels < 4 || refine_depth < 1 || refine_depth > levels - 3)
            throw ConfigError("refine_depth must satisfy 1 <= g <= U - 3");
        if (!(sigma_e >= 0.0))
            throw ConfigError("sigma_e must be non-negative");
        if (restart_beamwidth_level < 0 || restart_beamwidth_level > levels)
            throw ConfigError("restart_beamwidth_level out of range");
        const int budget = fct_init_budget(book);
        if (budget < 3 || budget - 2 > book.size(levels) / 2)
            throw ConfigError("FCT initialization budget must lie in [3, N/2 + 2]");
        if (fct_tracking_pilots < 1 || fct_tracking_pilots > book.size(levels))
            throw ConfigError("FCT tracking pilots out of range");
    }
};

enum class Phase
{
    Initializing,
    Tracking,
};

struct TrackerState
{
    Phase phase = Phase::Initializing;
    int init_slots_done = 0;
    std::vector<Point2D> location_history; // oldest first, at most three
    std::vector<double> theta_history;     // estimated directions, oldest first, at most three
    CodewordId current_codeword{};
    PilotCounter pilots;
    std::size_t restarts = 0;
    std::size_t timeslot = 0;

    void reset_history()
    {
        phase = Phase::Initializing;
        init_slots_done = 0;
        location_history.clear();
        theta_history.clear();
    }
};

struct SlotResult
{
    double estimated_theta = 0.0;
    Point2D estimated_location{};
    std::size_t pilots_used = 0;
    bool restarted = false; // link lost in this slot; the next slot re-initializes
    bool failed = false;    // no level of the search produced a reliable detection
    Phase phase = Phase::Initializing;
    double true_theta = 0.0;
    CodewordId codeword{};
};

// Everything a slot needs to know about the physical link.
struct LinkContext
{
    const Codebook *book = nullptr;
    Point2D ap{};
    NoiseModel noise{};
    cdouble beta_phase{1.0, 0.0};
    PathlossModel pathloss{};
};

/// r~ = r + e with e ~ N(0, sigma_e^2), floored at 1 mm.
inline double estimate_distance(double r_true, double sigma_e, Rng &rng)
{
    if (!(r_true > 0.0))
        throw std::invalid_argument("true range must be positive");
    if (sigma_e == 0.0)
        return r_true;
    std::normal_distribution<double> err(0.0, sigma_e);
    return std::max(r_true + err(rng), min_range_estimate);
}

inline Point2D estimate_location(double r_tilde, double theta_tilde) noexcept
{
    return {r_tilde * std::cos(theta_tilde), r_tilde * std::sin(theta_tilde)};
}

/// p(t+1) = p(t) + ((p(t) - p(t-1)) + (p(t-1) - p(t-2))) / 2.
inline Point2D predict_location(const Point2D &p2, const Point2D &p1, const Point2D &p0) noexcept
{
    return p0 + 0.5 * ((p0 - p1) + (p1 - p2));
}

inline Point2D predict_location(std::span<const Point2D> history)
{
    if (history.size() != 3)
        throw std::invalid_argument("location prediction needs exactly three points");
    return predict_location(history[0], history[1], history[2]);
}

/// Direction of an AP-frame point, clamped to the visible half-plane.
inline double direction_of(Point2D p) noexcept
{
    if (p.x == 0.0 && p.y == 0.0)
        return 0.0;
    return std::clamp(std::atan2(p.y, p.x), -0.5 * std::numbers::pi, 0.5 * std::numbers::pi);
}

namespace detail
{

struct DescentOutcome
{
    const Codeword *finest = nullptr;
    bool any_success = false;
};

// Multi-level search from `start_level` to the finest level. Each level tests
// codewords_near the current anchor; a failed detection leaves the anchor at
// the last reliable level so the next level searches around that instead.
inline DescentOutcome descend(int start_level, std::vector<const Codeword *> first_candidates,
                              const TrackerConfig &cfg, const LosChannel &ch, const LinkContext &link, Rng &rng,
                              TrackerState &state)
{
    const Codebook &book = *link.book;
    DescentOutcome out;
    double anchor = 0.0;
    std::vector<const Codeword *> cands = std::move(first_candidates);
    for (int u = start_level;; ++u)
    {
        const Detection det = best_codeword(cands, ch, link.noise, book, rng, state.pilots, state.timeslot);
        if (det.success || u == start_level)
            anchor = det.winner->sector_center;
        out.any_success = out.any_success || det.success;
        if (u == book.levels())
        {
            out.finest = det.winner;
            break;
        }
        cands = codewords_near(u + 1, anchor, cfg.pilots(u + 1), book);
    }
    return out;
}

inline double beam_direction(const Codeword &cw, const Codebook &book) noexcept
{
    return direction_angle(cw.sector_center, book.config());
}

inline SlotResult finish_slot(const Codeword &finest, bool failed, std::size_t pilots_before, const LosChannel &ch,
                              const TrackerConfig &cfg, Rng &rng, TrackerState &state, const LinkContext &link)
{
    SlotResult res;
    res.phase = state.phase;
    res.codeword = finest.id();
    res.estimated_theta = beam_direction(finest, *link.book);
    res.estimated_location = estimate_location(estimate_distance(ch.r, cfg.sigma_e, rng), res.estimated_theta);
    res.pilots_used = state.pilots.count - pilots_before;
    res.failed = failed;
    res.true_theta = ch.theta;
    state.current_codeword = finest.id();
    return res;
}

template <class T> void push_bounded(std::vector<T> &v, const T &x)
{
    if (v.size() == init_slots)
        v.erase(v.begin());
    v.push_back(x);
}

} // namespace detail

/// One initialization slot: exhaustive search of level 1, then hierarchical
/// refinement down to the finest level.
inline SlotResult phase1_slot(TrackerState &state, const LosChannel &ch, const TrackerConfig &cfg,
                              const LinkContext &link, Rng &rng)
{
    const Codebook &book = *link.book;
    const std::size_t before = state.pilots.count;
    std::vector<const Codeword *> all;
    for (const Codeword &cw : book.level(1))
        all.push_back(&cw);
    const auto out = detail::descend(1, std::move(all), cfg, ch, link, rng, state);
    return detail::finish_slot(*out.finest, !out.any_success, before, ch, cfg, rng, state, link);
}

/// One tracking slot: search level U - g around the predicted direction, then
/// refine level by level down to the finest.
inline SlotResult phase3_slot(TrackerState &state, Point2D predicted, const LosChannel &ch, const TrackerConfig &cfg,
                              const LinkContext &link, Rng &rng)
{
    const Codebook &book = *link.book;
    const std::size_t before = state.pilots.count;
    const int start = cfg.refine_start_level(book);
    const double psi = spatial_direction(direction_of(predicted), book.config());
    auto cands = codewords_near(start, psi, cfg.pilots(start), book);
    const auto out = detail::descend(start, std::move(cands), cfg, ch, link, rng, state);
    return detail::finish_slot(*out.finest, !out.any_success, before, ch, cfg, rng, state, link);
}

/// Finest-level-only tracking slot with the refinement slot's pilot budget.
inline SlotResult level8_slot(TrackerState &state, Point2D predicted, const LosChannel &ch, const TrackerConfig &cfg,
                              const LinkContext &link, Rng &rng)
{
    const Codebook &book = *link.book;
    const std::size_t before = state.pilots.count;
    const double psi = spatial_direction(direction_of(predicted), book.config());
    const auto cands = codewords_near(book.levels(), psi, cfg.refine_pilots(book), book);
    const Detection det = best_codeword(cands, ch, link.noise, book, rng, state.pilots, state.timeslot);
    return detail::finish_slot(*det.winner, !det.success, before, ch, cfg, rng, state, link);
}

/// FCT initialization slot: every other finest-level codeword (even indices)
/// with all but two pilots, then the two odd neighbours of the best one.
inline SlotResult fct_init_slot(TrackerState &state, const LosChannel &ch, const TrackerConfig &cfg,
                                const LinkContext &link, Rng &rng)
{
    const Codebook &book = *link.book;
    const int u = book.levels();
    const std::size_t before = state.pilots.count;
    const int coarse = cfg.fct_init_budget(book) - 2;
    std::vector<const Codeword *> cands;
    cands.reserve(static_cast<std::size_t>(coarse));
    for (int i = 0; i < coarse; ++i)
        cands.push_back(&book.at(u, 2 * (i + 1)));
    const Detection first = best_codeword(cands, ch, link.noise, book, rng, state.pilots, state.timeslot);

    const int m = first.winner->index;
    std::vector<const Codeword *> fine{&book.at(u, m - 1)};
    if (m < book.size(u))
        fine.push_back(&book.at(u, m + 1));
    else
        fine.push_back(&book.at(u, m - 2)); // keeps the budget fixed at the top edge
    const Detection second = best_codeword(fine, ch, link.noise, book, rng, state.pilots, state.timeslot);

    const Detection &best = second.power > first.power ? second : first;
    return detail::finish_slot(*best.winner, !(first.success || second.success), before, ch, cfg, rng, state, link);
}

/// FCT tracking slot: extrapolate the direction linearly from the last two
/// estimates and search the nearest finest-level codewords.
inline SlotResult fct_tracking_slot(TrackerState &state, const LosChannel &ch, const TrackerConfig &cfg,
                                    const LinkContext &link, Rng &rng)
{
    const Codebook &book = *link.book;
    const std::size_t before = state.pilots.count;
    const auto &h = state.theta_history;
    const double predicted =
        std::clamp(2.0 * h[h.size() - 1] - h[h.size() - 2], -0.5 * std::numbers::pi, 0.5 * std::numbers::pi);
    const double psi = spatial_direction(predicted, book.config());
    const auto cands = codewords_near(book.levels(), psi, cfg.fct_tracking_pilots, book);
    const Detection det = best_codeword(cands, ch, link.noise, book, rng, state.pilots, state.timeslot);
    return detail::finish_slot(*det.winner, !det.success, before, ch, cfg, rng, state, link);
}

/// Half-power beamwidth of the serving beam at the restart level: the ancestor
/// (or the codeword itself) of the estimate at that level.
inline double restart_threshold(CodewordId estimate, const TrackerConfig &cfg, const Codebook &book)
{
    const int level = cfg.restart_level(book);
    int index = estimate.index;
    for (int u = estimate.level; u > level; --u)
        index = (index + 1) / 2;
    return book.beamwidth(book.at(level, index));
}

/// Applies the restart rule to a finished slot and advances the state machine.
inline void apply_restart_rule(TrackerState &state, SlotResult &res, const TrackerConfig &cfg, const Codebook &book)
{
    const double err = std::abs(res.estimated_theta - res.true_theta);
    if (res.failed || err > restart_threshold(res.codeword, cfg, book))
    {
        res.restarted = true;
        ++state.restarts;
        state.reset_history();
        return;
    }
    detail::push_bounded(state.location_history, res.estimated_location);
    detail::push_bounded(state.theta_history, res.estimated_theta);
    if (state.phase == Phase::Initializing && ++state.init_slots_done >= init_slots)
        state.phase = Phase::Tracking;
}

namespace detail
{

template <class SlotFn>
SlotResult run_step(TrackerState &state, Point2D true_position, const TrackerConfig &cfg, const LinkContext &link,
                    SlotFn &&slot)
{
    const LosChannel ch = los_channel(true_position, link.ap, link.book->config(), link.beta_phase, link.pathloss);
    SlotResult res = slot(ch);
    apply_restart_rule(state, res, cfg, *link.book);
    ++state.timeslot;
    return res;
}

} // namespace detail

/// Hierarchical tracker step. true_position is in room coordinates.
inline SlotResult track_step(TrackerState &state, Point2D true_position, const TrackerConfig &cfg,
                             const LinkContext &link, Rng &rng)
{
    return detail::run_step(state, true_position, cfg, link, [&](const LosChannel &ch) {
        if (state.phase == Phase::Initializing)
            return phase1_slot(state, ch, cfg, link, rng);
        return phase3_slot(state, predict_location(state.location_history), ch, cfg, link, rng);
    });
}

inline SlotResult level8_track_step(TrackerState &state, Point2D true_position, const TrackerConfig &cfg,
                                    const LinkContext &link, Rng &rng)
{
    return detail::run_step(state, true_position, cfg, link, [&](const LosChannel &ch) {
        if (state.phase == Phase::Initializing)
            return phase1_slot(state, ch, cfg, link, rng);
        return level8_slot(state, predict_location(state.location_history), ch, cfg, link, rng);
    });
}

inline SlotResult fct_track_step(TrackerState &state, Point2D true_position, const TrackerConfig &cfg,
                                 const LinkContext &link, Rng &rng)
{
    return detail::run_step(state, true_position, cfg, link, [&](const LosChannel &ch) {
        if (state.phase == Phase::Initializing)
            return fct_init_slot(state, ch, cfg, link, rng);
        return fct_tracking_slot(state, ch, cfg, link, rng);
    });
}

inline SlotResult step(TrackerKind kind, TrackerState &state, Point2D true_position, const TrackerConfig &cfg,
                       const LinkContext &link, Rng &rng)
{
    switch (kind)
    {
    case TrackerKind::Proposed:
        return track_step(state, true_position, cfg, link, rng);
    case TrackerKind::Fct:
        return fct_track_step(state, true_position, cfg, link, rng);
    case TrackerKind::Level8:
        return level8_track_step(state, true_position, cfg, link, rng);
    }
    throw std::logic_error("unhandled tracker kind");
}

} // namespace thzbt
