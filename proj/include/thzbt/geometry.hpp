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

// UE mobility: disk-sampled start, bounded random walk, Q_I resampling, and
// ground-truth polar coordinates relative to the AP.

#pragma once

#include "common.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace thzbt
{

struct Point2D
{
    double x = 0.0;
    double y = 0.0;

    friend constexpr Point2D operator+(Point2D a, Point2D b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point2D operator-(Point2D a, Point2D b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point2D operator*(double s, Point2D a) noexcept { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Point2D a, Point2D b) noexcept = default;
};

inline double distance(Point2D a, Point2D b) noexcept
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

// Room occupies [0, width] x [0, height] in room coordinates. The AP sits at the
// midpoint of the x = 0 wall and its array boresight points along +x; every
// AP-relative quantity is expressed in a frame shifted so the AP is at (0, 0).
struct RoomConfig
{
    double width = 5.0;
    double height = 5.0;
    Point2D ap_position{0.0, 2.5};

    Point2D center() const noexcept { return {0.5 * width, 0.5 * height}; }

    bool contains(Point2D p) const noexcept
    {
        return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
    }

    void validate() const
    {
        if (!(width > 0.0) || !(height > 0.0))
            throw ConfigError("room dimensions must be positive");
        if (!contains(ap_position))
            throw ConfigError("AP must lie on or inside the room boundary");
    }
};

struct WalkParams
{
    double step_length = 1.0;
    int num_original_steps = 10;
    int q_i = 1;
    double start_disk_radius = 1.5;
    std::uint64_t rng_seed = 1;
    double ap_clearance = 0.0; // steps ending closer than this to the AP are redrawn

    // Redraw budget for a step that would leave the room.
    static constexpr int max_redraws = 1000;

    void validate(const RoomConfig &room) const
    {
        if (!(step_length > 0.0))
            throw ConfigError("step_length must be positive");
        if (num_original_steps < 0)
            throw ConfigError("num_original_steps must be non-negative");
        if (q_i < 1)
            throw ConfigError("q_i must be >= 1");
        if (!(start_disk_radius >= 0.0))
            throw ConfigError("start_disk_radius must be non-negative");
        const Point2D c = room.center();
        if (c.x - start_disk_radius < 0.0 || c.x + start_disk_radius > room.width ||
            c.y - start_disk_radius < 0.0 || c.y + start_disk_radius > room.height)
            throw ConfigError("start disk exceeds the room bounds");
        if (!(ap_clearance >= 0.0))
            throw ConfigError("ap_clearance must be non-negative");
        if (ap_clearance > 0.0 && distance(c, room.ap_position) - start_disk_radius < ap_clearance)
            throw ConfigError("start disk intersects the AP clearance zone");
    }

    bool admissible(const RoomConfig &room, Point2D p) const noexcept
    {
        return room.contains(p) && (ap_clearance == 0.0 || distance(p, room.ap_position) >= ap_clearance);
    }
};

// positions[t] is the UE location at timeslot t; positions[0] is the start.
struct MotionPath
{
    std::vector<Point2D> positions;

    std::size_t timeslot_count() const noexcept { return positions.empty() ? 0 : positions.size() - 1; }
};

struct Polar
{
    double r = 0.0;
    double theta = 0.0;
    bool serviceable = true; // false when |theta| >= pi/2 (endfire or behind the array)
};

template <class Generator>
Point2D sample_start_location(const RoomConfig &room, const WalkParams &params, Generator &rng)
{
    params.validate(room);
    const Point2D c = room.center();
    if (params.start_disk_radius == 0.0)
        return c;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    // sqrt of a uniform variate gives uniform density over area
    const double rad = params.start_disk_radius * std::sqrt(unit(rng));
    const double phi = 2.0 * std::numbers::pi * unit(rng);
    return {c.x + rad * std::cos(phi), c.y + rad * std::sin(phi)};
}

template <class Generator>
std::vector<Point2D> generate_random_walk(Point2D start, const RoomConfig &room, const WalkParams &params,
                                          Generator &rng)
{
    params.validate(room);
    if (!room.contains(start))
        throw ConfigError("walk start lies outside the room");

    std::uniform_real_distribution<double> heading(0.0, 2.0 * std::numbers::pi);
    std::vector<Point2D> walk;
    walk.reserve(static_cast<std::size_t>(params.num_original_steps) + 1);
    walk.push_back(start);

    Point2D cur = start;
    for (int s = 0; s < params.num_original_steps; ++s)
    {
        Point2D next = cur;
        for (int attempt = 0; attempt < WalkParams::max_redraws; ++attempt)
        {
            const double h = heading(rng);
            const Point2D cand{cur.x + params.step_length * std::cos(h), cur.y + params.step_length * std::sin(h)};
            if (params.admissible(room, cand))
            {
                next = cand;
                break;
            }
        }
        walk.push_back(next);
        cur = next;
    }
    return walk;
}

// Linear interpolation with q_i - 1 points inserted per segment. The start point
// is kept as timeslot 0, so the result holds q_i * segments + 1 positions.
inline MotionPath resample_path(const std::vector<Point2D> &walk, int q_i)
{
    if (q_i < 1)
        throw ConfigError("q_i must be >= 1");
    if (walk.size() < 2)
        throw ConfigError("resampling needs at least two walk points");

    MotionPath path;
    path.positions.reserve((walk.size() - 1) * static_cast<std::size_t>(q_i) + 1);
    path.positions.push_back(walk.front());
    for (std::size_t i = 1; i < walk.size(); ++i)
    {
        const Point2D a = walk[i - 1];
        const Point2D b = walk[i];
        for (int k = 1; k < q_i; ++k)
        {
            const double f = static_cast<double>(k) / q_i;
            path.positions.push_back(a + f * (b - a));
        }
        path.positions.push_back(b);
    }
    return path;
}

// Range and azimuth of the UE seen from the AP, boresight along +x.
inline Polar true_polar(Point2D ue, Point2D ap)
{
    const Point2D d = ue - ap;
    const double r = std::hypot(d.x, d.y);
    if (r == 0.0)
        throw GeometryError("UE coincides with the AP");
    const double theta = std::atan2(d.y, d.x);
    return {r, theta, std::abs(theta) < 0.5 * std::numbers::pi};
}

// Convenience: full motion for one episode.
template <class Generator>
MotionPath generate_motion(const RoomConfig &room, const WalkParams &params, Generator &rng)
{
    const Point2D start = sample_start_location(room, params, rng);
    if (params.num_original_steps == 0)
        return MotionPath{{start}};
    return resample_path(generate_random_walk(start, room, params, rng), params.q_i);
}

} // namespace thzbt
