// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "emf/protocol/link.hpp"

#include <cmath>

#include "emf/error.hpp"

namespace emf::protocol {

void LinkParams::validate() const {
    if (bandwidth_bps == 0) fail(ErrorCode::InvalidArgument, "link bandwidth must be positive");
    // 1.0 is accepted so tests can force a black-holed link.
    if (!(drop_probability >= 0.0 && drop_probability <= 1.0)) {
        fail(ErrorCode::InvalidArgument, "link drop probability must lie in [0, 1]");
    }
}

std::uint64_t transfer_time_ms(std::uint64_t bytes_len, const LinkParams& link) {
    const auto scaled = static_cast<unsigned __int128>(bytes_len) * 1000u;
    const auto bw = static_cast<unsigned __int128>(link.bandwidth_bps);
    return link.latency_ms + static_cast<std::uint64_t>((scaled + bw - 1) / bw);
}

TransferOutcome simulate_transfer(std::uint64_t bytes_len, const LinkParams& link, std::mt19937_64& rng) {
    // 53-bit uniform in [0, 1); independent of the standard library's
    // distribution implementation.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u < link.drop_probability) {
        return {false, 0};
    }
    return {true, transfer_time_ms(bytes_len, link)};
}

}  // namespace emf::protocol
