#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dht/sgh.hpp"

namespace dht {

/// Two-level stack: the upper method hides bits in packets, the lower level
/// hides one bit per time slot in whether any upper carrier was sent.
///
/// Upper methods must leave non-carriers recognisable (EthPadding,
/// RetransPayload); a method that reads every packet as a carrier would make
/// every occupied slot a 1.
struct MlsStack {
    HoppingSchedule upper;
    Tick slot_ticks = 1;
    Tick epoch = 0;
    Tick path_delay = 0;      // subtracted from arrivals before slotting
    std::size_t lower_bits = 0;

    void validate() const;
    Tick horizon() const noexcept { return static_cast<Tick>(lower_bits) * slot_ticks; }
    /// Slot of a send time (or of an arrival already corrected by path_delay).
    std::optional<std::size_t> slot_of(Tick t) const noexcept;
};

struct MlsSendResult {
    std::vector<SendRecord> records;
    std::size_t upper_consumed = 0;
    std::size_t stego_packets = 0;
};

/// Lower bit i = 1 puts one upper carrier at epoch + i*T + T/4. Optional
/// cover frames are sent in every slot; they must not read as carriers.
MlsSendResult mls_encode(const BitString& upper_bits, const BitString& lower_bits, const MlsStack& stack,
                         const CarrierConfig& cfg, FlowId flow, Network& net, const OvertPacket& stego_template,
                         const std::optional<OvertPacket>& cover_template = std::nullopt,
                         std::size_t cover_per_slot = 0);

struct MlsDecoded {
    BitString upper;  // full extracted symbols, in arrival order
    BitString lower;  // exactly stack.lower_bits long
    std::size_t upper_packets = 0;
};

MlsDecoded mls_decode(const std::vector<Delivery>& deliveries, const MlsStack& stack, const CarrierConfig& cfg);

struct MlsBandwidths {
    double overt = 0.0;  // wire bits per tick inside the horizon
    double upper = 0.0;  // decoded upper bits per tick
    double lower = 0.0;  // 1-slots per tick
};

MlsBandwidths mls_bandwidths(const std::vector<Delivery>& deliveries, const MlsStack& stack,
                             const MlsDecoded& decoded);

} // namespace dht
