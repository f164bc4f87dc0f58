// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

namespace emf::protocol {

/// Simulated edge link. Latency in whole milliseconds, bandwidth in bytes per
/// second.
struct LinkParams {
    std::uint64_t latency_ms = 20;
    std::uint64_t bandwidth_bps = 10'000'000;
    double drop_probability = 0.0;
    std::uint64_t seed = 0;

    void validate() const;

    bool operator==(const LinkParams&) const = default;
};

struct TransferOutcome {
    bool delivered = true;
    std::uint64_t elapsed_ms = 0;  // meaningful only when delivered

    bool operator==(const TransferOutcome&) const = default;
};

/// Exactly one draw from `rng` per call. Delivered time is
/// latency + ceil(1000 * bytes / bandwidth).
TransferOutcome simulate_transfer(std::uint64_t bytes_len, const LinkParams& link, std::mt19937_64& rng);

/// Transfer time without the drop draw.
std::uint64_t transfer_time_ms(std::uint64_t bytes_len, const LinkParams& link);

/// Owns the per-link seeded stream.
class LinkSimulator {
public:
    explicit LinkSimulator(LinkParams link) : link_(link), rng_(link.seed) {}

    TransferOutcome transfer(std::uint64_t bytes_len) { return simulate_transfer(bytes_len, link_, rng_); }
    const LinkParams& params() const { return link_; }

private:
    LinkParams link_;
    std::mt19937_64 rng_;
};

}  // namespace emf::protocol
