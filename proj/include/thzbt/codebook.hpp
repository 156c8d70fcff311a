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

// Uniform linear array and the U-level hierarchical beamforming codebook.
//
// Level u holds 2^u codewords. Codeword (u, 1) activates the 2^u central
// elements of the array, phased towards the center of the first sector and
// normalised to unit power; every other codeword of the level is a phase
// rotation of (u, 1). Sectors at level u split the spatial-direction range
// [-d/lambda, d/lambda] into 2^u equal intervals, indexed from the negative end,
// and the sector of (u, m) is the union of those of its children (u+1, 2m-1)
// and (u+1, 2m).

#pragma once

#include "common.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace thzbt
{

using cdouble = std::complex<double>;
using WeightVector = std::vector<cdouble>;

struct ArrayConfig
{
    int n_elements = 256;
    double spacing_ratio = 0.5; // d / lambda
    double carrier_frequency = 275e9;

    void validate() const
    {
        if (n_elements < 2 || (n_elements & (n_elements - 1)) != 0)
            throw ConfigError("n_elements must be a power of two >= 2, got " + std::to_string(n_elements));
        if (!(spacing_ratio > 0.0))
            throw ConfigError("spacing_ratio must be positive");
        if (!(carrier_frequency > 0.0))
            throw ConfigError("carrier_frequency must be positive");
    }

    int levels() const noexcept { return std::countr_zero(static_cast<unsigned>(n_elements)); }

    double wavelength() const noexcept { return 299'792'458.0 / carrier_frequency; }

    // Symmetric element position l - (N-1)/2, in units of the spacing.
    double element_index(int l) const noexcept { return l - 0.5 * (n_elements - 1); }
};

struct CodewordId
{
    int level = 1;
    int index = 1;
    friend constexpr bool operator==(CodewordId, CodewordId) noexcept = default;
};

struct Codeword
{
    int level = 1;
    int index = 1;
    WeightVector weights;
    double sector_center = 0.0; // spatial direction psi
    double sector_width = 0.0;
    int active_elements = 0; // contiguous central elements carrying power

    CodewordId id() const noexcept { return {level, index}; }
    double sector_low() const noexcept { return sector_center - 0.5 * sector_width; }
    double sector_high() const noexcept { return sector_center + 0.5 * sector_width; }
};

/// a(psi) = N^{-1/2} [exp(-j 2 pi psi m)] over the symmetric index set.
inline WeightVector steering_vector(const ArrayConfig &config, double psi)
{
    const int n = config.n_elements;
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    WeightVector a(static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l)
        a[static_cast<std::size_t>(l)] = std::polar(norm, -2.0 * std::numbers::pi * psi * config.element_index(l));
    return a;
}

/// psi = (d / lambda) sin(theta). Throws for |theta| > pi/2.
inline double spatial_direction(double theta, const ArrayConfig &config)
{
    if (!(std::abs(theta) <= 0.5 * std::numbers::pi))
        throw std::out_of_range("direction outside [-pi/2, pi/2]");
    return config.spacing_ratio * std::sin(theta);
}

/// Inverse of spatial_direction; psi is clamped to the visible range.
inline double direction_angle(double psi, const ArrayConfig &config) noexcept
{
    return std::asin(std::clamp(psi / config.spacing_ratio, -1.0, 1.0));
}

/// |w^H a(psi)|^2 by explicit inner product.
inline double codeword_gain(const Codeword &cw, double psi, const ArrayConfig &config)
{
    const WeightVector a = steering_vector(config, psi);
    cdouble acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += std::conj(cw.weights[i]) * a[i];
    return std::norm(acc);
}

// Closed form of w^H a(psi) for a codeword of this construction: a Dirichlet
// kernel over the M active elements, real-valued because the index set is
// symmetric. Used on the measurement hot path.
inline double array_factor(int active_elements, int n_elements, double offset)
{
    const double m = active_elements;
    const double s = std::sin(std::numbers::pi * offset);
    double kernel;
    if (std::abs(s) < 1e-12)
    {
        // limit of sin(pi M x)/sin(pi x) at integer x: M * (-1)^{x (M-1)}
        const long long k = std::llround(offset);
        kernel = ((k * (active_elements - 1)) % 2 == 0) ? m : -m;
    }
    else
    {
        kernel = std::sin(std::numbers::pi * m * offset) / s;
    }
    return kernel / std::sqrt(m * n_elements);
}

class Codebook
{
  public:
    const ArrayConfig &config() const noexcept { return config_; }
    int levels() const noexcept { return static_cast<int>(levels_.size()); }
    int size(int level) const noexcept { return 1 << level; }

    const Codeword &at(int level, int index) const
    {
        if (level < 1 || level > levels())
            throw std::out_of_range("codebook level " + std::to_string(level) + " out of range");
        if (index < 1 || index > size(level))
            throw std::out_of_range("codeword index " + std::to_string(index) + " out of range");
        return levels_[static_cast<std::size_t>(level - 1)][static_cast<std::size_t>(index - 1)];
    }
    const Codeword &at(CodewordId id) const { return at(id.level, id.index); }

    std::span<const Codeword> level(int u) const
    {
        if (u < 1 || u > levels())
            throw std::out_of_range("codebook level " + std::to_string(u) + " out of range");
        return levels_[static_cast<std::size_t>(u - 1)];
    }

    double sector_width(int level) const noexcept { return 2.0 * config_.spacing_ratio / size(level); }

    /// Index of the level-u sector containing psi (half-open sectors; psi is
    /// clamped to the tiled range first).
    int sector_of(int level, double psi) const noexcept
    {
        const double lo = -config_.spacing_ratio;
        const int idx = static_cast<int>(std::floor((psi - lo) / sector_width(level))) + 1;
        return std::clamp(idx, 1, size(level));
    }

    /// Gain of (level, index) at psi via the closed-form array factor.
    double gain(const Codeword &cw, double psi) const noexcept
    {
        const double af = amplitude(cw, psi);
        return af * af;
    }

    /// Real amplitude w^H a(psi) via the closed-form array factor.
    double amplitude(const Codeword &cw, double psi) const noexcept
    {
        return array_factor(cw.active_elements, config_.n_elements, psi - cw.sector_center);
    }

    /// Boresight gain of any codeword at this level.
    double peak_gain(int level) const noexcept { return static_cast<double>(size(level)) / config_.n_elements; }

    /// Half-power beamwidth in theta of one codeword, measured from the -3 dB
    /// offsets of its level's pattern (identical for all rotations in psi).
    double beamwidth(const Codeword &cw) const
    {
        const double h = half_power_offset(cw.level);
        const double lo = direction_angle(cw.sector_center - h, config_);
        const double hi = direction_angle(cw.sector_center + h, config_);
        return hi - lo;
    }

    /// -3 dB half-width in psi of the level pattern.
    double half_power_offset(int level) const
    {
        if (level < 1 || level > levels())
            throw std::out_of_range("codebook level " + std::to_string(level) + " out of range");
        return half_power_offsets_[static_cast<std::size_t>(level - 1)];
    }

  private:
    friend Codebook build_codebook(const ArrayConfig &);

    explicit Codebook(const ArrayConfig &config) : config_(config)
    {
        config_.validate();
        levels_.resize(static_cast<std::size_t>(config_.levels()));
    }

    ArrayConfig config_;
    std::vector<std::vector<Codeword>> levels_;
    std::vector<double> half_power_offsets_;
};

/// Measures the -3 dB half-width in psi of a codeword pattern: a coarse scan
/// over the main lobe followed by bisection on the crossing.
inline double measure_half_power_offset(const Codeword &cw, const ArrayConfig &config)
{
    const double peak = codeword_gain(cw, cw.sector_center, config);
    const double lobe = 2.0 * config.spacing_ratio / (1 << cw.level);
    constexpr int grid = 1024;
    double lo = 0.0;
    double hi = lobe;
    for (int i = 1; i <= grid; ++i)
    {
        const double x = lobe * i / grid;
        if (codeword_gain(cw, cw.sector_center + x, config) < 0.5 * peak)
        {
            lo = lobe * (i - 1) / grid;
            hi = x;
            break;
        }
    }
    for (int it = 0; it < 60; ++it)
    {
        const double mid = 0.5 * (lo + hi);
        if (codeword_gain(cw, cw.sector_center + mid, config) >= 0.5 * peak)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Rotates the first codeword of a level onto sector m by the element-wise
/// factor exp(-j 2 pi dpsi i), dpsi = (m - 1) * sector_width.
inline Codeword rotate_codeword(const Codeword &base, int m, const ArrayConfig &config)
{
    if (base.index != 1)
        throw std::invalid_argument("rotation base must be the first codeword of its level");
    if (m < 1 || m > (1 << base.level))
        throw std::out_of_range("rotation target index " + std::to_string(m) + " out of range");
    const double dpsi = (m - 1) * base.sector_width;
    Codeword cw = base;
    cw.index = m;
    cw.sector_center = base.sector_center + dpsi;
    for (int l = 0; l < config.n_elements; ++l)
        cw.weights[static_cast<std::size_t>(l)] *= std::polar(1.0, -2.0 * std::numbers::pi * dpsi * config.element_index(l));
    return cw;
}

inline Codeword first_codeword(int level, const ArrayConfig &config)
{
    const int n = config.n_elements;
    const int active = 1 << level;
    const double width = 2.0 * config.spacing_ratio / active;
    Codeword cw;
    cw.level = level;
    cw.index = 1;
    cw.sector_width = width;
    cw.sector_center = -config.spacing_ratio + 0.5 * width;
    cw.active_elements = active;
    cw.weights.assign(static_cast<std::size_t>(n), cdouble{0.0, 0.0});
    const double amp = 1.0 / std::sqrt(static_cast<double>(active));
    const int first = (n - active) / 2;
    for (int l = first; l < first + active; ++l)
        cw.weights[static_cast<std::size_t>(l)] =
            std::polar(amp, -2.0 * std::numbers::pi * cw.sector_center * config.element_index(l));
    return cw;
}

inline Codebook build_codebook(const ArrayConfig &config)
{
    Codebook book(config);
    for (int u = 1; u <= book.levels(); ++u)
    {
        auto &lvl = book.levels_[static_cast<std::size_t>(u - 1)];
        const Codeword base = first_codeword(u, book.config());
        lvl.reserve(static_cast<std::size_t>(1) << u);
        lvl.push_back(base);
        for (int m = 2; m <= (1 << u); ++m)
            lvl.push_back(rotate_codeword(base, m, book.config()));
        book.half_power_offsets_.push_back(measure_half_power_offset(base, book.config()));
    }
    return book;
}

/// The two level-(u+1) codewords tiling the sector of cw.
inline std::pair<const Codeword *, const Codeword *> children(const Codeword &cw, const Codebook &book)
{
    if (cw.level >= book.levels())
        throw std::out_of_range("codeword at the finest level has no children");
    return {&book.at(cw.level + 1, 2 * cw.index - 1), &book.at(cw.level + 1, 2 * cw.index)};
}

/// The k level-u codewords whose sector centers are nearest to psi, as a
/// contiguous index window grown from the sector containing psi. Equal
/// distances extend the window towards higher psi; the window is clipped to
/// the codebook without wraparound. Returned in increasing index order.
inline std::vector<const Codeword *> codewords_near(int level, double psi, int count, const Codebook &book)
{
    const int n = book.size(level);
    if (count < 1 || count > n)
        throw std::out_of_range("codewords_near count " + std::to_string(count) + " out of range");
    const int c = book.sector_of(level, psi);
    int lo = c;
    int hi = c;
    while (hi - lo + 1 < count)
    {
        if (lo == 1)
        {
            ++hi;
            continue;
        }
        if (hi == n)
        {
            --lo;
            continue;
        }
        const double dl = std::abs(psi - book.at(level, lo - 1).sector_center);
        const double dh = std::abs(book.at(level, hi + 1).sector_center - psi);
        if (dh <= dl)
            ++hi;
        else
            --lo;
    }
    std::vector<const Codeword *> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int m = lo; m <= hi; ++m)
        out.push_back(&book.at(level, m));
    return out;
}

/// Half-power beamwidth in theta of the level-u codeword nearest broadside.
inline double half_power_beamwidth(int level, const Codebook &book)
{
    const Codeword &cw = book.at(level, book.size(level) / 2 + 1);
    return book.beamwidth(cw);
}

/// Text export, one codeword per line:
///   level index psi_low psi_high re_0 im_0 ... re_{N-1} im_{N-1}
inline void dump_codebook(const Codebook &book, std::ostream &os)
{
    const auto old_precision = os.precision(17);
    os << "# thzbt codebook N=" << book.config().n_elements << " d_over_lambda=" << book.config().spacing_ratio
       << " levels=" << book.levels() << "\n";
    os << "# level index psi_low psi_high weights(re im)...\n";
    for (int u = 1; u <= book.levels(); ++u)
        for (const Codeword &cw : book.level(u))
        {
            os << cw.level << ' ' << cw.index << ' ' << cw.sector_low() << ' ' << cw.sector_high();
            for (const cdouble &w : cw.weights)
                os << ' ' << w.real() << ' ' << w.imag();
            os << '\n';
        }
    os.precision(old_precision);
}

} // namespace thzbt
