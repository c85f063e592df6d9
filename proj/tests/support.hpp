#pragma once

#include <functional>
#include <optional>
#include <string>

#include "dht/core.hpp"
#include "dht/simnet.hpp"

namespace testing_support {

inline dht::BitString random_bits(dht::Rng& rng, std::size_t n) {
    dht::BitString b;
    for (std::size_t i = 0; i < n; ++i) b.push_back(rng.next() & 1U);
    return b;
}

/// Code of the dht::Error thrown by f, or nullopt if none is thrown.
inline std::optional<dht::ErrorCode> error_code(const std::function<void()>& f) {
    try {
        f();
    } catch (const dht::Error& e) {
        return e.code();
    }
    return std::nullopt;
}

/// A 20-byte frame: short enough for padding, long enough for a 16-bit
/// retransmission payload.
inline dht::OvertPacket short_frame(dht::FlowId flow = dht::FlowId{0}) {
    dht::OvertPacket p;
    p.flow = flow;
    p.payload_len = 20;
    return p;
}

inline dht::NetworkConfig lossless(std::uint64_t seed = 1) {
    dht::NetworkConfig c;
    c.seed = seed;
    c.base_delay = 5;
    return c;
}

inline std::vector<dht::OvertPacket> packets_of(const std::vector<dht::Delivery>& deliveries) {
    std::vector<dht::OvertPacket> out;
    for (const auto& d : deliveries) out.push_back(d.packet);
    return out;
}

} // namespace testing_support
