#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "dht/core.hpp"
#include "dht/simnet.hpp"

namespace dht {

enum class CarrierMethodId { MultiHoming, MultiStreaming, ChunkCount, EthPadding, RetransPayload };

inline constexpr std::array<CarrierMethodId, 5> kAllCarrierMethods{
    CarrierMethodId::MultiHoming, CarrierMethodId::MultiStreaming, CarrierMethodId::ChunkCount,
    CarrierMethodId::EthPadding, CarrierMethodId::RetransPayload};

std::string_view to_string(CarrierMethodId method);
CarrierMethodId parse_method(std::string_view name);

struct CarrierConfig {
    std::uint32_t stream_count = 1;       // S, power of two
    std::uint32_t address_count = 1;      // A, power of two
    std::uint32_t max_chunk_count = 1;    // C, power of two
    std::size_t min_payload_bytes = 46;   // P_min
    std::size_t retrans_payload_bits = 16;  // R

    void validate() const;
    friend bool operator==(const CarrierConfig&, const CarrierConfig&) = default;
};

/// Bits one packet built from `packet_template` can carry.
///
/// Throws NoCapacity when the template cannot host the method at all: a frame
/// that needs no padding, or a retransmission whose payload is shorter than R
/// bits. A single-stream (or single-address, single-chunk) configuration is
/// not an error; it simply carries zero bits.
std::size_t capacity(CarrierMethodId method, const CarrierConfig& cfg, const OvertPacket& packet_template);

/// Same as capacity() but reports unusable templates as zero.
std::size_t usable_capacity(CarrierMethodId method, const CarrierConfig& cfg,
                            const OvertPacket& packet_template) noexcept;

/// True when the capacity does not depend on the template.
bool template_independent(CarrierMethodId method) noexcept;

struct Embedded {
    OvertPacket packet;
    BitString remaining;
    std::size_t consumed = 0;
};

/// Writes the next min(capacity, bits.size()) bits into the method's carrier
/// field. A final partial symbol is zero-filled on the right, so extract()
/// returns a full symbol of which the consumed bits are the prefix.
Embedded embed(CarrierMethodId method, const CarrierConfig& cfg, const BitString& bits,
               const OvertPacket& packet_template);

/// Reads the full symbol carried by `packet` (capacity(...) bits).
BitString extract(CarrierMethodId method, const CarrierConfig& cfg, const OvertPacket& packet);

/// Whether extract() would accept the packet.
bool is_carrier(CarrierMethodId method, const CarrierConfig& cfg, const OvertPacket& packet) noexcept;

} // namespace dht
