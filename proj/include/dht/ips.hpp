#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "dht/carriers.hpp"

namespace dht {

/// Shared secret that drives carrier-protocol hopping.
class HopKey {
public:
    explicit HopKey(std::vector<std::uint8_t> secret);
    static HopKey from_hex(std::string_view hex);

    const std::vector<std::uint8_t>& secret() const noexcept { return secret_; }
    /// 128-bit PRF key derived from the secret.
    const std::array<std::uint8_t, 16>& prf_key() const noexcept { return prf_key_; }

    friend bool operator==(const HopKey& a, const HopKey& b) { return a.secret_ == b.secret_; }

private:
    std::vector<std::uint8_t> secret_;
    std::array<std::uint8_t, 16> prf_key_{};
};

/// Which upper-layer protocol marks the ordinal-th carrier frame. Keyed
/// SipHash of the ordinal, reduced mod 4 (2^64 is a multiple of 4, so the
/// reduction is unbiased).
CarrierProtocolTag carrier_protocol_at(const HopKey& key, std::uint64_t ordinal);

/// Puts the frame under the keyed protocol tag and embeds into its padding.
Embedded ips_embed(const BitString& bits, const HopKey& key, std::uint64_t ordinal,
                   const OvertPacket& frame_template, const CarrierConfig& cfg);

/// A protocol tag guaranteed to differ from the keyed one at `ordinal`,
/// for frames that must not be read as carriers.
CarrierProtocolTag decoy_protocol(const HopKey& key, std::uint64_t ordinal, CarrierProtocolTag preferred);

/// Receiver side. Frames are examined in delivery order; a frame whose
/// protocol does not match the expected tag is skipped and the counter stays
/// put, so decoy traffic cannot desynchronise the channel.
class IpsExtractor {
public:
    IpsExtractor(HopKey key, CarrierConfig cfg);

    std::optional<BitString> offer(const OvertPacket& frame);
    std::uint64_t counter() const noexcept { return counter_; }

private:
    HopKey key_;
    CarrierConfig cfg_;
    std::uint64_t counter_ = 0;
};

} // namespace dht
