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

#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace thzbt
{

// Invalid scenario or construction parameters. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument
{
  public:
    explicit ConfigError(const std::string &what) : std::invalid_argument(what) {}
};

// UE and AP coincide, or a direction is requested for a zero-length vector.
class GeometryError : public std::domain_error
{
  public:
    explicit GeometryError(const std::string &what) : std::domain_error(what) {}
};

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive decorrelated seeds from a counter.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Independent stream for (base_seed, episode, stream). Streams of one episode
// are separated so that every tracker sees the same motion for a given seed.
inline Rng make_stream(std::uint64_t base_seed, std::uint64_t episode, std::uint64_t stream)
{
    const std::uint64_t s = splitmix64(splitmix64(base_seed ^ episode) + stream);
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(episode), static_cast<std::uint32_t>(stream)};
    return Rng(seq);
}

} // namespace thzbt
