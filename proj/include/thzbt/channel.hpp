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

// Line-of-sight channel, noisy per-pilot power measurements and argmax
// codeword detection with pilot accounting.

#pragma once

#include "codebook.hpp"
#include "geometry.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>

namespace thzbt
{

struct LosChannel
{
    cdouble beta{1.0, 0.0};
    double psi = 0.0;
    double r = 1.0;
    double theta = 0.0;
};

// Where the configured SNR is referenced. FinestLevel: noise variance is fixed
// at peak_gain(U) / snr, so coarse levels see proportionally less SNR.
// MeasuredLevel: every pilot sees snr at the boresight of its own codeword.
enum class SnrReference
{
    FinestLevel,
    MeasuredLevel,
};

struct NoiseModel
{
    double snr_db = 10.0;
    bool enabled = true;
    SnrReference reference = SnrReference::MeasuredLevel;
    double detection_factor = 4.0; // winner must exceed this multiple of the noise variance

    double variance(int level, const Codebook &book) const noexcept
    {
        if (!enabled)
            return 0.0;
        const int ref_level = reference == SnrReference::FinestLevel ? book.levels() : level;
        return book.peak_gain(ref_level) / std::pow(10.0, snr_db / 10.0);
    }
};

struct PilotMeasurement
{
    CodewordId codeword;
    double power = 0.0;
    std::size_t timeslot = 0;
};

// Counts every pilot transmitted in an episode.
struct PilotCounter
{
    std::size_t count = 0;
};

// Free-space style amplitude scaling; off by default.
struct PathlossModel
{
    bool enabled = false;
    double exponent = 2.0;
    double reference_distance = 1.0;
};

inline cdouble draw_channel_phase(Rng &rng)
{
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    return std::polar(1.0, phase(rng));
}

/// LoS channel towards ue. beta_phase carries the episode's (unit-modulus)
/// random phase. Throws GeometryError if ue coincides with the AP.
inline LosChannel los_channel(Point2D ue, Point2D ap, const ArrayConfig &config, cdouble beta_phase = {1.0, 0.0},
                              const PathlossModel &pathloss = {})
{
    const Polar pol = true_polar(ue, ap);
    const double theta = std::clamp(pol.theta, -0.5 * std::numbers::pi, 0.5 * std::numbers::pi);
    LosChannel ch;
    ch.r = pol.r;
    ch.theta = pol.theta;
    ch.psi = spatial_direction(theta, config);
    double mag = 1.0;
    if (pathloss.enabled)
        mag = std::pow(pathloss.reference_distance / pol.r, 0.5 * pathloss.exponent);
    ch.beta = mag * beta_phase / std::abs(beta_phase);
    return ch;
}

/// One pilot through cw: o = beta * (w^H a(psi)) + z, power = |o|^2.
inline PilotMeasurement measure_pilot(const Codeword &cw, const LosChannel &ch, const NoiseModel &noise,
                                      const Codebook &book, Rng &rng, PilotCounter &counter, std::size_t timeslot = 0)
{
    cdouble obs = ch.beta * book.amplitude(cw, ch.psi);
    const double var = noise.variance(cw.level, book);
    if (var > 0.0)
    {
        std::normal_distribution<double> gauss(0.0, std::sqrt(0.5 * var));
        const double re = gauss(rng);
        const double im = gauss(rng);
        obs += cdouble{re, im};
    }
    ++counter.count;
    return {cw.id(), std::norm(obs), timeslot};
}

struct Detection
{
    const Codeword *winner = nullptr;
    std::size_t pilots_used = 0;
    bool success = false;
    double power = 0.0;
};

/// One pilot per candidate; the winner is the strongest measurement, ties going
/// to the earlier (lower-index) candidate. success is false when the winner is
/// below detection_factor times the noise variance.
inline Detection best_codeword(std::span<const Codeword *const> candidates, const LosChannel &ch,
                               const NoiseModel &noise, const Codebook &book, Rng &rng, PilotCounter &counter,
                               std::size_t timeslot = 0)
{
    if (candidates.empty())
        throw std::invalid_argument("best_codeword needs at least one candidate");
    Detection det;
    for (const Codeword *cw : candidates)
    {
        const PilotMeasurement m = measure_pilot(*cw, ch, noise, book, rng, counter, timeslot);
        ++det.pilots_used;
        if (det.winner == nullptr || m.power > det.power)
        {
            det.winner = cw;
            det.power = m.power;
        }
    }
    det.success = det.power >= noise.detection_factor * noise.variance(det.winner->level, book);
    return det;
}

} // namespace thzbt
